#include <algorithm>
#include <set>

#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"

namespace toolverse {

Json training_sample_to_json(const TrainingSample& s) {
  Json input = Json::object();
  input["system"] = s.system;
  input["question"] = s.question;
  input["trace_prefix"] = s.trace_prefix;
  input["tools"] = s.tools;
  Json out = Json::object();
  out["input"] = std::move(input);
  out["output"] = s.output;
  out["step"] = s.step;
  out["trace_id"] = s.trace_id;
  return out;
}

void write_training_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += training_sample_to_json(s).dump() + "\n";
  write_file(path, out);
}

Json render_prefix_step(const ReasoningStep& step) {
  Json calls = Json::array();
  for (const auto& c : step.calls) calls.push_back(function_call_to_json(c, true));
  Json results = Json::array();
  for (const auto& r : step.results) results.push_back({{"id", r.call_id}, {"content", r.payload}});
  return {{"i", step.index}, {"thought", step.thought}, {"calls", calls}, {"results", results}};
}

std::string render_sample_output(const ReasoningStep& step, const std::optional<std::string>& answer) {
  if (!answer) return render_assistant_turn(step, false);
  Json calls = Json::array();
  for (const auto& c : step.calls) calls.push_back(function_call_to_json(c, false));
  std::string out = step.thought;
  if (!out.empty()) out += " ";
  return out + std::string(kFinalAnswerMarker) + " " + *answer + " " + std::string(kToolCallsMarker) + calls.dump();
}

namespace {

std::vector<std::string> toolrag_names(const ReasoningStep& step) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < step.calls.size() && k < step.results.size(); ++k) {
    const auto& r = step.results[k];
    if (step.calls[k].tool_name != kToolRag || r.status != ResultStatus::kOk || !r.payload.is_array()) continue;
    for (const auto& n : r.payload) {
      if (n.is_string()) out.push_back(n.get<std::string>());
    }
  }
  return out;
}

void append_unique(std::vector<std::string>& to, const std::string& name, const Registry& registry) {
  if (registry.contains(name) && std::find(to.begin(), to.end(), name) == to.end()) to.push_back(name);
}

// Renames every API tool through the rephrase pool and rewrites the trace to
// match. Returns the augmented registry.
Registry augment_trace(ReasoningTrace& trace, const Registry& registry, const RephrasePool& pool,
                       std::uint64_t seed) {
  std::set<std::string> taken;
  for (const auto& n : registry.names()) taken.insert(n);
  std::map<std::string, NameRemap> remaps;
  Registry out;
  for (const auto& name : registry.api_tool_names()) {
    std::set<std::string> others = taken;
    others.erase(name);
    auto [spec, remap] = augment_tool_spec(registry.at(name), pool, derive_seed(seed, trace.id), others);
    taken.insert(spec.name);
    out.add(std::move(spec));
    remaps.emplace(name, std::move(remap));
  }
  auto rename = [&](const std::string& n) {
    auto it = remaps.find(n);
    return it == remaps.end() ? n : it->second.tool_to;
  };
  for (auto& step : trace.steps) {
    for (std::size_t k = 0; k < step.calls.size(); ++k) {
      auto& c = step.calls[k];
      const bool rag = c.tool_name == kToolRag;
      if (auto it = remaps.find(c.tool_name); it != remaps.end()) c = it->second.apply(c);
      if (rag && k < step.results.size() && step.results[k].payload.is_array()) {
        for (auto& n : step.results[k].payload) {
          if (n.is_string()) n = rename(n.get<std::string>());
        }
      }
    }
  }
  for (auto& tools : trace.available_tools) {
    for (auto& n : tools) n = rename(n);
  }
  return out;
}

std::size_t input_size(const ReasoningTrace& trace, const Registry& registry, std::size_t upto) {
  std::size_t n = trace.question.size();
  for (std::size_t j = 0; j < upto && j < trace.steps.size(); ++j) n += render_prefix_step(trace.steps[j]).dump().size();
  std::vector<std::string> tools = registry.default_tools();
  for (std::size_t j = 0; j < upto && j < trace.steps.size(); ++j) {
    for (const auto& name : toolrag_names(trace.steps[j])) append_unique(tools, name, registry);
  }
  return n + agent_system_prompt(registry, tools).size();
}

}  // namespace

std::vector<TrainingSample> export_training_samples(const ReasoningTrace& trace, const Registry& registry,
                                                    const AugmentConfig& augment,
                                                    std::optional<int> max_steps_filter) {
  if (!trace.final_answer || trace.steps.empty()) {
    throw Error(ErrorCode::kPrecondition, "trace " + trace.id + " has no final answer");
  }
  const std::size_t m = trace.steps.size();
  if (max_steps_filter && static_cast<long>(m) > *max_steps_filter) return {};

  ReasoningTrace t = trace;
  Registry augmented;
  const Registry* reg = &registry;
  if (augment.rephrase) {
    augmented = augment_trace(t, registry, *augment.rephrase, augment.seed);
    reg = &augmented;
  }

  if (augment.context_limit_chars > 0) {
    if (!augment.summarizer) throw Error(ErrorCode::kInvalidArgument, "a context limit needs a summarizer");
    // Earliest results first, until the longest input fits.
    for (std::size_t j = 0; j + 1 < m && input_size(t, *reg, m - 1) > augment.context_limit_chars; ++j) {
      auto& step = t.steps[j];
      for (std::size_t k = 0; k < step.results.size() && k < step.calls.size(); ++k) {
        auto& r = step.results[k];
        if (r.summarized || r.status != ResultStatus::kOk || r.source == ResultSource::kLocal) continue;
        r = summarize_result(step.thought, step.calls[k], r, *augment.summarizer, 0);
        if (input_size(t, *reg, m - 1) <= augment.context_limit_chars) break;
      }
    }
  }

  std::vector<std::string> retrieved;
  for (const auto& s : t.steps) {
    for (const auto& n : toolrag_names(s)) append_unique(retrieved, n, *reg);
  }

  Rng rng(derive_seed(augment.seed, "export:" + t.id));
  std::vector<TrainingSample> samples;
  Json prefix = Json::array();
  for (std::size_t i = 0; i < m; ++i) {
    const auto& step = t.steps[i];
    std::vector<std::string> tools;
    if (i < t.available_tools.size()) {
      for (const auto& n : t.available_tools[i]) append_unique(tools, n, *reg);
    } else {
      tools = reg->default_tools();
      for (std::size_t j = 0; j < i; ++j) {
        for (const auto& n : toolrag_names(t.steps[j])) append_unique(tools, n, *reg);
      }
    }
    for (const auto& c : step.calls) append_unique(tools, c.tool_name, *reg);
    if (augment.extend_with_retrieved) {
      for (const auto& n : retrieved) append_unique(tools, n, *reg);
    }
    if (augment.random_extra_tools > 0) {
      std::vector<std::string> pool;
      for (const auto& n : reg->api_tool_names()) {
        if (std::find(tools.begin(), tools.end(), n) == tools.end()) pool.push_back(n);
      }
      rng.shuffle(pool);
      auto extra = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(augment.random_extra_tools));
      tools.insert(tools.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(extra));
    }
    if (augment.shuffle) rng.shuffle(tools);

    TrainingSample s;
    s.system = agent_system_prompt(*reg, tools);
    s.question = t.question;
    s.trace_prefix = prefix;
    s.tools = std::move(tools);
    s.output = render_sample_output(step, i + 1 == m ? t.final_answer : std::nullopt);
    s.step = static_cast<int>(i) + 1;
    s.trace_id = t.id;
    samples.push_back(std::move(s));
    prefix.push_back(render_prefix_step(step));
  }
  return samples;
}

std::vector<StageReport> run_staged_datagen(const std::vector<QuestionRecord>& records, const Registry& registry,
                                            int rounds, const StageHooks& hooks,
                                            std::vector<ReasoningTrace>* traces) {
  if (rounds < 1) throw Error(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  if (!hooks.generate) throw Error(ErrorCode::kInvalidArgument, "no trace generator");
  std::vector<StageReport> reports;
  std::vector<RetrievalPair> pairs;
  Retriever retriever;
  for (int round = 0; round < rounds; ++round) {
    StageReport report;
    report.round = round;
    std::vector<ReasoningTrace> accepted;
    for (const auto& r : records) {
      if (auto t = hooks.generate(r, retriever)) {
        accepted.push_back(std::move(*t));
      } else {
        ++report.rejected;
      }
    }
    report.accepted = accepted.size();
    auto fresh = extract_training_pairs(accepted, registry);
    report.pairs = fresh.size();
    pairs.insert(pairs.end(), fresh.begin(), fresh.end());
    if (traces) traces->insert(traces->end(), accepted.begin(), accepted.end());
    reports.push_back(report);
    if (round + 1 < rounds && hooks.retrain) retriever = hooks.retrain(pairs, round);
  }
  return reports;
}

}  // namespace toolverse
