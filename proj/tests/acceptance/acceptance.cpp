// Prints one PASS/FAIL/SKIP line per acceptance criterion. Exits nonzero on
// any FAIL.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/datagen.hpp"
#include "toolverse/evalharness.hpp"
#include "toolverse/http.hpp"
#include "toolverse/request_builder.hpp"
#include "retrieval_oracle.hpp"
#include "test_support.hpp"

using namespace toolverse;
namespace fs = std::filesystem;

namespace {

struct Skip {
  std::string why;
};

// Collects the first failed expectation of a criterion.
struct Check {
  std::string failure;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

Gateway fixture_gateway(CassetteStore& store, Retriever retriever) {
  GatewayOptions o;
  o.mode = ExecMode::kFixture;
  o.cassettes = &store;
  o.retriever = std::move(retriever);
  return Gateway(tvt::corpus(), o);
}

void variance(Check& c) {
  auto start = std::chrono::steady_clock::now();
  auto report = [] {
    std::vector<OutcomeSet> sets;
    // Accuracies of 93.8%, 93.6% and 93.7% over 1000 items each.
    for (int correct : {938, 936, 937}) {
      OutcomeSet s{"set" + std::to_string(correct), {}};
      for (int i = 0; i < 1000; ++i) {
        EvalOutcome o;
        o.verdict = i < correct ? Verdict::kCorrect : Verdict::kIncorrect;
        s.outcomes.push_back(o);
      }
      sets.push_back(std::move(s));
    }
    return compute_metrics(sets);
  }();
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(std::abs(report.accuracy_variance - 0.00667) <= 0.0001,
           "variance " + std::to_string(report.accuracy_variance));
  c.expect(std::abs(population_variance({93.8, 93.6, 93.7}) - 0.00667) <= 0.0001, "population_variance");
  c.expect(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
}

void three_step_loop(Check& c) {
  CassetteStore store(tvt::fixture("cassettes"));
  const std::vector<std::string> retrieved = {"get_dosage_by_drug_name", "get_indications", "get_dosage_forms_by_drug_name"};
  auto gw = fixture_gateway(store, [&](const std::string&, int) { return retrieved; });
  ScriptedChat model(tvt::replies({
      tvt::step_reply("I should find a dosage tool.", "ToolRAG", {{"description", "drug dosage"}}),
      tvt::step_reply("Look up the dosage.", "get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}),
      R"(The label gives the schedule. [FinalAnswer] 700 mg every four weeks for three doses [TOOL_CALLS][{"name":"Finish","arguments":{}}])",
  }));
  auto trace = run_inference("What is the dosage of Kisunla?", tvt::corpus(), {model, gw});
  c.expect(trace.terminal == Terminal::kFinished, "not finished: " + trace.abort_reason);
  c.expect(trace.steps.size() == 3, "steps " + std::to_string(trace.steps.size()));
  c.expect(trace.final_answer && trace.final_answer->starts_with("700 mg"), "final answer");
  auto requests = model.requests();
  if (requests.size() != 3) return c.expect(false, "generations " + std::to_string(requests.size()));
  auto p0 = tvt::corpus().default_tools();
  auto p1 = p0;
  p1.insert(p1.end(), retrieved.begin(), retrieved.end());
  // The step-2 prompt is exactly the prompt for the defaults plus what ToolRAG returned.
  c.expect(requests[0].system_prompt == agent_system_prompt(tvt::corpus(), p0), "step-1 prompt");
  c.expect(requests[1].system_prompt == agent_system_prompt(tvt::corpus(), p1), "step-2 prompt");
  for (const auto& name : retrieved) {
    c.expect(contains(requests[1].system_prompt, tvt::corpus().at(name).description), "missing " + name);
    c.expect(!contains(requests[0].system_prompt, "\"" + name + "\""), name + " shown before retrieval");
  }
  c.expect(!contains(requests[1].system_prompt, "\"get_adverse_reactions\""), "unretrieved tool shown");
  c.expect(trace.steps[1].results[0].status == ResultStatus::kOk, "tool result not ok");
}

void no_thought_loop(Check& c) {
  CassetteStore store(tvt::fixture("cassettes"));
  auto gw = fixture_gateway(store, [](const std::string&, int) { return std::vector<std::string>{"get_dosage_by_drug_name"}; });
  ScriptedChat model(tvt::replies({
      tvt::tool_call("ToolRAG", {{"description", "dosage"}}).dump(),
      tvt::tool_call("get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}).dump(),
      "700 mg every four weeks",
  }));
  auto trace = run_inference_no_thought("Kisunla dose?", tvt::corpus(), {model, gw});
  c.expect(trace.steps.size() == 3, "steps " + std::to_string(trace.steps.size()));
  for (const auto& s : trace.steps) c.expect(s.thought.empty(), "step has a thought");
  c.expect(trace.final_answer == "700 mg every four weeks", "answer");
  c.expect(trace.terminal == Terminal::kFinished, "terminal");
}

void step_limit(Check& c) {
  for (int max_steps : {1, 3, 5}) {
    CassetteStore store(tvt::fixture("cassettes"));
    auto gw = fixture_gateway(store, [](const std::string&, int) { return std::vector<std::string>{}; });
    // Keeps searching unless told to answer.
    int n = 0;
    CallbackChat model([&](const ChatRequest& req) {
      ++n;
      if (contains(req.messages.back().content, "[FinalAnswer]")) return std::string("Forced. [FinalAnswer] unknown");
      return tvt::step_reply("Search more " + std::to_string(n), "ToolRAG", {{"description", "q" + std::to_string(n)}});
    });
    AgentConfig cfg;
    cfg.max_steps = max_steps;
    auto trace = run_inference("q?", tvt::corpus(), {model, gw}, cfg);
    auto tag = "max_steps " + std::to_string(max_steps) + ": ";
    c.expect(n == max_steps, tag + "generations " + std::to_string(n));
    c.expect(trace.generations == max_steps, tag + "trace generations");
    c.expect(static_cast<int>(trace.steps.size()) == max_steps, tag + "steps");
    c.expect(trace.terminal == Terminal::kStepLimitForced, tag + "not forced");
    c.expect(trace.final_answer == "unknown", tag + "answer");
  }
}

void retrieval_oracle(Check& c) {
  auto start = std::chrono::steady_clock::now();
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto n = 1 + rng.index(1000);
    auto d = 4 + rng.index(61);
    auto index = tvt::random_index(rng, n, d);
    std::vector<float> q;
    for (std::size_t j = 0; j < d; ++j) q.push_back(static_cast<float>(static_cast<int>(rng.index(5)) - 2));
    int k = 1 + static_cast<int>(rng.index(20));
    c.expect(retrieve_by_vector(index, q, k).names == tvt::eigen_top_k(index, q, k), "trial " + std::to_string(trial));
  }
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(elapsed < 10.0, "took " + std::to_string(elapsed) + " s");
}

void export_decomposition(Check& c) {
  Rng rng(11);
  AugmentConfig plain;
  plain.random_extra_tools = 0;
  plain.shuffle = false;
  std::vector<ReasoningTrace> traces;
  for (int i = 0; i < 100; ++i) {
    traces.push_back(tvt::synthetic_trace("t" + std::to_string(i), 1 + static_cast<int>(rng.index(8)), rng, tvt::corpus()));
  }
  for (const auto& t : traces) {
    const auto m = t.steps.size();
    auto samples = export_training_samples(t, tvt::corpus(), plain);
    if (samples.size() != m) return c.expect(false, t.id + ": " + std::to_string(samples.size()) + " samples for M=" + std::to_string(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto& s = samples[i];
      c.expect(s.trace_prefix.size() == i, t.id + ": prefix size");
      // Each prefix extends the previous one by the previous step.
      if (i > 0) {
        auto expected = samples[i - 1].trace_prefix;
        expected.push_back(render_prefix_step(t.steps[i - 1]));
        c.expect(s.trace_prefix == expected, t.id + ": prefix consistency at step " + std::to_string(i + 1));
      }
      c.expect(contains(s.output, "[FinalAnswer]") == (i + 1 == m), t.id + ": answer placement");
    }
  }
  std::vector<std::set<std::string>> sets;
  for (std::optional<int> f : {std::optional<int>(1), std::optional<int>(3), std::optional<int>(5), std::optional<int>()}) {
    std::set<std::string> keys;
    std::size_t total = 0;
    for (const auto& t : traces) {
      auto samples = export_training_samples(t, tvt::corpus(), plain, f);
      c.expect(samples.empty() == (f && static_cast<int>(t.steps.size()) > *f), t.id + ": filter");
      for (const auto& s : samples) keys.insert(t.id + "#" + std::to_string(s.step) + "#" + training_sample_to_json(s).dump());
      total += samples.size();
    }
    c.expect(keys.size() == total, "duplicate samples");
    sets.push_back(std::move(keys));
  }
  for (std::size_t i = 1; i < sets.size(); ++i) {
    c.expect(sets[i - 1].size() <= sets[i].size(), "filter sizes not monotone");
    c.expect(std::includes(sets[i].begin(), sets[i].end(), sets[i - 1].begin(), sets[i - 1].end()), "filters not nested");
  }
}

void trace_filter(Check& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tvt::fixture("traces"))) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::set<std::string> seeded;
  int clean = 0;
  for (const auto& f : files) {
    auto doc = Json::parse(read_file(f));
    ScriptedChat judge(doc["judge_replies"].get<std::vector<Json>>());
    auto ev = evaluate_trace(trace_from_json(doc["trace"]), question_record_from_json(doc["record"]), tvt::corpus(), judge);
    auto expected = doc["expected_reasons"].get<std::vector<std::string>>();
    std::string got;
    for (const auto& r : ev.reasons) got += r + " ";
    c.expect(ev.reasons == expected, f.filename().string() + ": got [" + got + "]");
    c.expect(ev.pass == expected.empty(), f.filename().string() + ": pass flag");
    if (expected.empty()) ++clean;
    if (expected.size() == 1) seeded.insert(expected[0]);
  }
  c.expect(clean == 1, "clean fixtures " + std::to_string(clean));
  c.expect(seeded == std::set<std::string>{"answer_wrong", "trace_judge_fail", "bad_call", "hallucinated_id",
                                            "ungrounded_answer", "repeated_thought", "repeated_call"},
           "defect codes not covered");
}

void request_goldens(Check& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(tvt::fixture("goldens"))) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  c.expect(files.size() == 12, "golden count " + std::to_string(files.size()));
  std::set<std::string> kinds;
  for (const auto& f : files) {
    auto g = Json::parse(read_file(f));
    auto spec = g.contains("spec") ? tool_spec_from_json(g["spec"]) : tvt::corpus().at(g["tool"].get<std::string>());
    kinds.insert(std::string(mapping_kind_name(spec.mapping)));
    auto req = compile_call(spec, g["arguments"], g.value("fda_limit", kDefaultFdaLimit));
    c.expect(req.serialize() == g["expected"].get<std::string>(), f.filename().string());
  }
  c.expect(kinds.size() == 3, "mapping kinds covered " + std::to_string(kinds.size()));
  // Replay through cassettes with no network.
  CassetteStore store(tvt::fixture("cassettes"));
  auto gw = fixture_gateway(store, {});
  auto r = gw.execute({"c1", "get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}});
  c.expect(r.status == ResultStatus::kOk && r.source == ResultSource::kFixture, "cassette replay");
}

void description_gating(Check& c) {
  auto items = load_benchmark(tvt::fixture("benchmarks/description.jsonl"));
  c.expect(items.size() == 20, "item count");
  auto verify = [&](const std::vector<EvalOutcome>& out, const std::string& tag) {
    auto m = compute_metrics({{"description", out}}).sets.at(0);
    double gated = m.tally.accuracy();
    c.expect(gated <= *m.drug_id_accuracy + 1e-12, tag + ": gated above drug id");
    c.expect(gated <= *m.ungated_accuracy + 1e-12, tag + ": gated above ungated");
    for (const auto& o : out) {
      if (!o.drug_correct && o.ungated == Verdict::kCorrect) {
        c.expect(o.verdict == Verdict::kIncorrect, tag + ": " + o.item_id + " wrong drug scored correct");
      }
    }
    return m;
  };
  auto m = verify(evaluate_description_two_step(items, tvt::description_runner(items)), "scripted");
  c.expect(m.tally.accuracy() < *m.ungated_accuracy, "scripted run never exercises the gate");
  // Random agents: each item gets a random drug and letter.
  Rng rng(3);
  for (int run = 0; run < 50; ++run) {
    std::map<std::string, std::pair<std::string, std::string>> plays;
    static const std::vector<std::string> letters = {"A", "B", "C", "D", "none"};
    for (const auto& item : items) {
      auto drug = rng.index(2) ? item.acceptable_drugs[rng.index(item.acceptable_drugs.size())] : "Lipitor";
      plays[item.question] = {drug, letters[rng.index(letters.size())]};
    }
    AgentRunner agent = [&](const std::string& prompt) {
      for (const auto& [q, p] : plays) {
        if (contains(prompt, q)) return tvt::answered(contains(prompt, "Identify the drug") ? p.first : p.second);
      }
      throw std::runtime_error("unexpected prompt");
    };
    verify(evaluate_description_two_step(items, agent), "run " + std::to_string(run));
  }
}

void network_smoke(Check& c) {
  const char* base = std::getenv("TOOLVERSE_CHAT_BASE");
  const char* model = std::getenv("TOOLVERSE_CHAT_MODEL");
  if (!base || !*base || !model || !*model) throw Skip{"no chat service configured"};
  {
    HttplibTransport http;
    HttpRequest probe;
    probe.url = "https://api.fda.gov/drug/label.json?limit=1";
    probe.timeout_ms = 5000;
    try {
      if (http.send(probe).status != 200) throw Skip{"openFDA unreachable"};
    } catch (const std::exception&) {
      throw Skip{"offline"};
    }
  }
  tvt::TempDir dir;
  auto trace_path = dir / "smoke.json";
  std::string cmd = std::string(TOOLVERSE_CLI_PATH) + " --mode live --set paths.specs=" + tvt::spec_dir().string() +
                    " --json ask --trace-out " + trace_path.string() +
                    " 'What is Bizengri indicated for? Use the get_indications tool.' > " + (dir / "out.json").string();
  int rc = std::system(cmd.c_str());
  c.expect(rc == 0, "ask exited " + std::to_string(rc));
  if (rc != 0) return;
  auto trace = trace_from_json(Json::parse(read_file(trace_path)));
  c.expect(trace.terminal == Terminal::kFinished && trace.final_answer, "no answer");
  bool live = false;
  for (const auto& s : trace.steps) {
    for (std::size_t k = 0; k < s.calls.size(); ++k) {
      live = live || (s.calls[k].tool_name == "get_indications" && s.results[k].status == ResultStatus::kOk &&
                      s.results[k].source == ResultSource::kLive);
    }
  }
  c.expect(live, "no live get_indications result in the trace");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"variance of accuracies across tool sets", variance},
      {"three-step loop shows exactly the retrieved tools", three_step_loop},
      {"no-thought loop", no_thought_loop},
      {"step limit forces an answer at 1, 3 and 5 steps", step_limit},
      {"retrieval matches brute-force cosine on 200 indexes", retrieval_oracle},
      {"step-wise export decomposition and nested step filters", export_decomposition},
      {"trace filter catches each seeded defect", trace_filter},
      {"request builder goldens", request_goldens},
      {"description gating", description_gating},
      {"live end-to-end smoke", network_smoke},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    std::string status = "PASS", detail;
    try {
      criteria[i].second(c);
      if (!c.failure.empty()) status = "FAIL", detail = c.failure;
    } catch (const Skip& s) {
      status = "SKIP", detail = s.why;
    } catch (const std::exception& e) {
      status = "FAIL", detail = std::string("exception: ") + e.what();
    }
    failed += status == "FAIL";
    std::cout << status << " " << (i + 1) << " " << criteria[i].first << (detail.empty() ? "" : ": " + detail) << "\n";
  }
  return failed ? 1 : 0;
}
