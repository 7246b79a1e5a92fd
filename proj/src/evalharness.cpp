#include "toolverse/evalharness.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "toolverse/error.hpp"
#include "toolverse/parallel.hpp"

namespace toolverse {

BenchmarkItem benchmark_item_from_json(const Json& doc, std::size_t line) {
  const std::string where = line ? "line " + std::to_string(line) + ": " : "";
  auto fail = [&](const std::string& what) { throw Error(ErrorCode::kSchemaViolation, where + what); };
  if (!doc.is_object()) fail("item must be an object");
  BenchmarkItem item;
  try {
    item.id = doc.at("id").is_string() ? doc["id"].get<std::string>() : doc["id"].dump();
    item.question = doc.at("question").get<std::string>();
    item.options = doc.at("options").get<Options>();
    item.correct = doc.at("correct").get<std::string>();
    item.task = doc.value("task", "");
    item.family = doc.value("family", "original");
    if (doc.contains("acceptable_drugs")) item.acceptable_drugs = doc["acceptable_drugs"].get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    fail(std::string("malformed item: ") + e.what());
  }
  if (item.options.size() < 2 || item.options.size() > 5) fail("item " + item.id + " needs 2 to 5 options");
  if (!item.options.count(item.correct)) fail("item " + item.id + ": correct letter '" + item.correct + "' is not an option");
  if (std::find(kBenchmarkFamilies.begin(), kBenchmarkFamilies.end(), item.family) == kBenchmarkFamilies.end()) {
    fail("item " + item.id + ": unknown family '" + item.family + "'");
  }
  if (item.family == "description" && item.acceptable_drugs.empty()) {
    fail("item " + item.id + ": description items need acceptable_drugs");
  }
  return item;
}

Json benchmark_item_to_json(const BenchmarkItem& item) {
  Json out = Json::object();
  out["id"] = item.id;
  out["question"] = item.question;
  out["options"] = item.options;
  out["correct"] = item.correct;
  out["task"] = item.task;
  out["family"] = item.family;
  if (!item.acceptable_drugs.empty()) out["acceptable_drugs"] = item.acceptable_drugs;
  return out;
}

std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path) {
  std::vector<BenchmarkItem> items;
  std::size_t line = 0;
  std::set<std::string> ids;
  for (const auto& raw : split_lines(read_file(path))) {
    ++line;
    if (trim(raw).empty()) continue;
    Json doc;
    try {
      doc = Json::parse(raw);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + ": line " + std::to_string(line) + ": " + e.what());
    }
    auto item = benchmark_item_from_json(doc, line);
    if (!ids.insert(item.id).second) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + ": line " + std::to_string(line) +
                                                   ": duplicate id " + item.id);
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::map<std::string, std::size_t> family_counts(const std::vector<BenchmarkItem>& items) {
  std::map<std::string, std::size_t> out;
  for (const auto& i : items) ++out[i.family];
  return out;
}

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::kCorrect: return "correct";
    case Verdict::kIncorrect: return "incorrect";
    case Verdict::kInvalid: return "invalid";
  }
  return "invalid";
}

Json eval_outcome_to_json(const EvalOutcome& o) {
  Json out = Json::object();
  out["item_id"] = o.item_id;
  out["task"] = o.task;
  out["verdict"] = verdict_name(o.verdict);
  out["predicted"] = o.predicted ? Json(*o.predicted) : Json(nullptr);
  if (o.identified_drug || o.ungated) {
    out["identified_drug"] = o.identified_drug ? Json(*o.identified_drug) : Json(nullptr);
    out["drug_correct"] = o.drug_correct;
    out["near_miss"] = o.near_miss;
    out["ungated"] = o.ungated ? Json(verdict_name(*o.ungated)) : Json(nullptr);
  }
  out["steps"] = o.steps;
  out["tool_calls"] = o.tool_calls;
  if (!o.trace_path.empty()) out["trace_path"] = o.trace_path;
  if (!o.error.empty()) out["error"] = o.error;
  return out;
}

AgentRunner make_agent_runner(const Registry& registry, AgentServices services, AgentConfig config) {
  return [&registry, services, config](const std::string& prompt) {
    auto trace = config.thought_mode == ThoughtMode::kNoThoughts
                     ? run_inference_no_thought(prompt, registry, services, config)
                     : run_inference(prompt, registry, services, config);
    trace.id = hash_hex(prompt);
    return trace;
  };
}

std::string multiple_choice_prompt(const BenchmarkItem& item) {
  return item.question + "\n" + render_options(item.options);
}

std::string drug_identification_prompt(const BenchmarkItem& item) {
  return "The following question describes a drug without naming it.\n\n" + item.question +
         "\n\nIdentify the drug being described. Give its name only.";
}

namespace {

std::string normalize_name(std::string_view s) {
  auto t = to_lower(trim(s));
  while (!t.empty() && (t.back() == '.' || t.back() == '"' || t.back() == '\'')) t.pop_back();
  while (!t.empty() && (t.front() == '"' || t.front() == '\'')) t.erase(t.begin());
  return trim(t);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct ItemRun {
  std::optional<ReasoningTrace> trace;
  std::string error;
  std::string path;
};

ItemRun run_item(const AgentRunner& agent, const std::string& prompt, const EvalOptions& options,
                 const std::string& stem) {
  ItemRun run;
  auto start = std::chrono::steady_clock::now();
  try {
    run.trace = agent(prompt);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  if (options.item_timeout.count() > 0 && std::chrono::steady_clock::now() - start > options.item_timeout) {
    run.error = "timeout";
  }
  if (run.trace && options.trace_dir) {
    auto path = *options.trace_dir / (stem + ".json");
    write_file(path, trace_to_json(*run.trace).dump(2) + "\n");
    run.path = path.string();
  }
  return run;
}

// The committed answer, or nullopt when the run failed or was aborted.
std::optional<std::string> answer_of(const ItemRun& run) {
  if (!run.error.empty() || !run.trace || run.trace->terminal == Terminal::kAborted) return std::nullopt;
  if (!run.trace->final_answer || trim(*run.trace->final_answer).empty()) return std::nullopt;
  return run.trace->final_answer;
}

void record_usage(EvalOutcome& o, const ItemRun& run) {
  if (!run.trace) {
    if (o.error.empty()) o.error = run.error;
    return;
  }
  o.steps += static_cast<int>(run.trace->steps.size());
  for (const auto& s : run.trace->steps) {
    for (const auto& c : s.calls) o.tool_calls += is_terminal_tool(c.tool_name) ? 0 : 1;
  }
  if (o.trace_path.empty()) o.trace_path = run.path;
  if (o.error.empty()) o.error = run.error.empty() && run.trace->terminal == Terminal::kAborted
                                     ? run.trace->abort_reason
                                     : run.error;
}

std::optional<std::string> letter_for(const BenchmarkItem& item, const std::string& answer, ChatService* mapper) {
  if (auto l = extract_choice_letter(answer, item.options)) return l;
  if (!mapper) return std::nullopt;
  return map_answer_to_choice(item.question, item.options, answer, *mapper);
}

Verdict judge_letter(const BenchmarkItem& item, const std::optional<std::string>& letter) {
  if (!letter) return Verdict::kInvalid;
  return *letter == item.correct ? Verdict::kCorrect : Verdict::kIncorrect;
}

EvalOutcome base_outcome(const BenchmarkItem& item) {
  EvalOutcome o;
  o.item_id = item.id;
  o.task = item.task;
  return o;
}

template <typename F>
std::vector<EvalOutcome> evaluate_each(const std::vector<BenchmarkItem>& items, const EvalOptions& options, F&& one) {
  if (options.trace_dir) std::filesystem::create_directories(*options.trace_dir);
  std::vector<EvalOutcome> out(items.size());
  parallel_for(items.size(), options.concurrency, [&](std::size_t i) {
    try {
      out[i] = one(items[i]);
    } catch (const std::exception& e) {
      out[i] = base_outcome(items[i]);
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace

bool drug_matches(const std::string& answer, const std::vector<std::string>& acceptable, bool* near_miss) {
  if (near_miss) *near_miss = false;
  auto a = normalize_name(answer);
  if (a.empty()) return false;
  bool close = false;
  for (const auto& name : acceptable) {
    auto n = normalize_name(name);
    if (a == n) return true;
    if (n.empty()) continue;
    if (edit_distance(a, n) <= 2 || contains(a, n) || contains(n, a)) close = true;
  }
  if (near_miss) *near_miss = close;
  return false;
}

std::vector<EvalOutcome> evaluate_multiple_choice(const std::vector<BenchmarkItem>& items, const AgentRunner& agent,
                                                  const EvalOptions& options) {
  return evaluate_each(items, options, [&](const BenchmarkItem& item) {
    auto o = base_outcome(item);
    auto run = run_item(agent, multiple_choice_prompt(item), options, item.id);
    record_usage(o, run);
    if (auto answer = answer_of(run)) o.predicted = letter_for(item, *answer, options.mapper);
    o.verdict = judge_letter(item, o.predicted);
    return o;
  });
}

std::vector<EvalOutcome> evaluate_open_ended(const std::vector<BenchmarkItem>& items, const AgentRunner& agent,
                                             const EvalOptions& options) {
  if (!options.mapper) throw Error(ErrorCode::kInvalidArgument, "open-ended evaluation needs an answer mapper");
  return evaluate_each(items, options, [&](const BenchmarkItem& item) {
    auto o = base_outcome(item);
    auto run = run_item(agent, item.question, options, item.id);
    record_usage(o, run);
    if (auto answer = answer_of(run)) {
      o.predicted = map_answer_to_choice(item.question, item.options, *answer, *options.mapper);
    }
    o.verdict = judge_letter(item, o.predicted);
    return o;
  });
}

std::vector<EvalOutcome> evaluate_description_two_step(const std::vector<BenchmarkItem>& items,
                                                       const AgentRunner& agent, const EvalOptions& options) {
  for (const auto& item : items) {
    if (item.acceptable_drugs.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "item " + item.id + " has no acceptable_drugs");
    }
  }
  return evaluate_each(items, options, [&](const BenchmarkItem& item) {
    auto o = base_outcome(item);
    auto identify = run_item(agent, drug_identification_prompt(item), options, item.id + "-identify");
    record_usage(o, identify);
    if (auto drug = answer_of(identify)) {
      o.identified_drug = trim(*drug);
      o.drug_correct = drug_matches(*drug, item.acceptable_drugs, &o.near_miss);
    }
    auto answer_run = run_item(agent, multiple_choice_prompt(item), options, item.id);
    o.trace_path.clear();
    record_usage(o, answer_run);
    if (auto answer = answer_of(answer_run)) o.predicted = letter_for(item, *answer, options.mapper);
    o.ungated = judge_letter(item, o.predicted);
    o.verdict = *o.ungated == Verdict::kCorrect && !o.drug_correct ? Verdict::kIncorrect : *o.ungated;
    return o;
  });
}

double population_variance(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size());
}

MetricsReport compute_metrics(const std::vector<OutcomeSet>& sets) {
  if (sets.empty()) throw Error(ErrorCode::kInvalidArgument, "no outcome sets");
  MetricsReport report;
  std::vector<double> accuracies;
  for (const auto& set : sets) {
    if (set.outcomes.empty()) throw Error(ErrorCode::kInvalidArgument, "outcome set '" + set.name + "' is empty");
    SetMetrics m;
    m.name = set.name;
    double steps = 0, calls = 0;
    std::size_t drug_ok = 0, ungated_ok = 0;
    bool description = false;
    for (const auto& o : set.outcomes) {
      for (Tally* t : {&m.tally, &m.per_task[o.task]}) {
        ++t->total;
        if (o.verdict == Verdict::kCorrect) ++t->correct;
        if (o.verdict == Verdict::kIncorrect) ++t->incorrect;
        if (o.verdict == Verdict::kInvalid) ++t->invalid;
      }
      steps += o.steps;
      calls += o.tool_calls;
      if (o.ungated) {
        description = true;
        drug_ok += o.drug_correct ? 1 : 0;
        ungated_ok += *o.ungated == Verdict::kCorrect ? 1 : 0;
      }
    }
    const double n = static_cast<double>(set.outcomes.size());
    m.mean_steps = steps / n;
    m.mean_tool_calls = calls / n;
    if (description) {
      m.drug_id_accuracy = static_cast<double>(drug_ok) / n;
      m.ungated_accuracy = static_cast<double>(ungated_ok) / n;
    }
    accuracies.push_back(100.0 * m.tally.accuracy());
    report.sets.push_back(std::move(m));
  }
  report.accuracy_variance = population_variance(accuracies);
  return report;
}

namespace {

Json tally_json(const Tally& t) {
  return {{"total", t.total},         {"correct", t.correct},   {"incorrect", t.incorrect},
          {"invalid", t.invalid},     {"accuracy", t.accuracy()}, {"invalid_rate", t.invalid_rate()}};
}

}  // namespace

Json metrics_to_json(const MetricsReport& report) {
  Json sets = Json::array();
  for (const auto& m : report.sets) {
    Json s = tally_json(m.tally);
    s["name"] = m.name;
    Json tasks = Json::object();
    for (const auto& [task, t] : m.per_task) tasks[task] = tally_json(t);
    s["per_task"] = tasks;
    s["mean_steps"] = m.mean_steps;
    s["mean_tool_calls"] = m.mean_tool_calls;
    if (m.drug_id_accuracy) s["drug_id_accuracy"] = *m.drug_id_accuracy;
    if (m.ungated_accuracy) {
      s["ungated_accuracy"] = *m.ungated_accuracy;
      s["gated_accuracy"] = m.tally.accuracy();
    }
    sets.push_back(std::move(s));
  }
  return {{"sets", sets}, {"accuracy_variance", report.accuracy_variance}};
}

std::string render_metrics_table(const MetricsReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %7s %9s %9s %7s %7s\n", "set", "n", "accuracy", "invalid", "steps", "calls");
  out += line;
  for (const auto& m : report.sets) {
    std::snprintf(line, sizeof line, "%-24s %7zu %8.2f%% %8.2f%% %7.2f %7.2f\n", m.name.c_str(), m.tally.total,
                  100.0 * m.tally.accuracy(), 100.0 * m.tally.invalid_rate(), m.mean_steps, m.mean_tool_calls);
    out += line;
    if (m.drug_id_accuracy) {
      std::snprintf(line, sizeof line, "  drug id %.2f%%, gated %.2f%%, ungated %.2f%%\n", 100.0 * *m.drug_id_accuracy,
                    100.0 * m.tally.accuracy(), 100.0 * m.ungated_accuracy.value_or(0.0));
      out += line;
    }
  }
  std::snprintf(line, sizeof line, "variance of accuracy across sets: %.5f\n", report.accuracy_variance);
  return out + line;
}

std::vector<std::string> load_subset_manifest(const std::filesystem::path& path) {
  try {
    auto doc = Json::parse(read_file(path));
    return doc.get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, path.string() + ": manifest must be a JSON array of names: " + e.what());
  }
}

std::vector<Registry> nested_subsets(const Registry& registry, const std::vector<std::vector<std::string>>& manifests) {
  if (!manifests_are_nested(manifests)) throw Error(ErrorCode::kInvalidArgument, "subset manifests are not nested");
  std::vector<Registry> out;
  for (const auto& m : manifests) out.push_back(subset_registry(registry, m));
  return out;
}

}  // namespace toolverse
