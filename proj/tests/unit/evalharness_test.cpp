#include <gtest/gtest.h>

#include "toolverse/error.hpp"
#include "toolverse/evalharness.hpp"
#include "test_support.hpp"

using namespace toolverse;

TEST(Metrics, PopulationVariance) {
  EXPECT_NEAR(population_variance({93.8, 93.6, 93.7}), 0.0066667, 1e-6);
  EXPECT_EQ(population_variance({}), 0.0);
  EXPECT_EQ(population_variance({5.0}), 0.0);
}

TEST(Benchmark, LoadsAndValidates) {
  auto mc = load_benchmark(tvt::fixture("benchmarks/mc.jsonl"));
  ASSERT_EQ(mc.size(), 6u);
  EXPECT_EQ(mc[0].correct, "B");
  EXPECT_EQ(mc[0].options.at("B"), "Altace");
  auto counts = family_counts(mc);
  EXPECT_EQ(counts["brand"], 2u);
  EXPECT_EQ(benchmark_item_from_json(benchmark_item_to_json(mc[5])).options.size(), 5u);

  auto bad = [](const char* text) {
    try {
      benchmark_item_from_json(Json::parse(text), 3);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
      return contains(e.what(), "line 3");
    }
    return false;
  };
  EXPECT_TRUE(bad(R"({"id":"x","question":"q","options":{"A":"a"},"correct":"A"})"));
  EXPECT_TRUE(bad(R"({"id":"x","question":"q","options":{"A":"a","B":"b"},"correct":"C"})"));
  EXPECT_TRUE(bad(R"({"id":"x","question":"q","options":{"A":"a","B":"b"},"correct":"A","family":"other"})"));
  EXPECT_TRUE(bad(R"({"id":"x","question":"q","options":{"A":"a","B":"b"},"correct":"A","family":"description"})"));
  EXPECT_TRUE(bad(R"({"question":"q"})"));

  tvt::TempDir dir;
  write_file(dir / "dup.jsonl", read_file(tvt::fixture("benchmarks/mc.jsonl")) +
                                     Json(benchmark_item_to_json(mc[0])).dump() + "\n");
  EXPECT_THROW(load_benchmark(dir / "dup.jsonl"), Error);
}

TEST(EvalMc, VerdictsFromFinalAnswers) {
  auto items = load_benchmark(tvt::fixture("benchmarks/mc.jsonl"));
  // Answers by item: right letter, wrong letter, letter in a phrase, no letter, error, aborted.
  AgentRunner agent = [&](const std::string& prompt) -> ReasoningTrace {
    if (contains(prompt, items[0].question)) return tvt::answered("B");
    if (contains(prompt, items[1].question)) return tvt::answered("A. 350 mg once");
    if (contains(prompt, items[2].question)) return tvt::answered("Answer: C, NRG1 fusion-positive tumors");
    if (contains(prompt, items[3].question)) return tvt::answered("unsure");
    if (contains(prompt, items[4].question)) throw Error(ErrorCode::kTransport, "down");
    auto t = tvt::answered("");
    t.final_answer.reset();
    t.terminal = Terminal::kAborted;
    t.abort_reason = "parse failures";
    return t;
  };
  tvt::TempDir dir;
  EvalOptions opts;
  opts.trace_dir = dir.path();
  opts.concurrency = 3;
  auto out = evaluate_multiple_choice(items, agent, opts);
  ASSERT_EQ(out.size(), 6u);
  std::vector<Verdict> verdicts;
  for (const auto& o : out) verdicts.push_back(o.verdict);
  EXPECT_EQ(verdicts, (std::vector<Verdict>{Verdict::kCorrect, Verdict::kIncorrect, Verdict::kCorrect,
                                            Verdict::kInvalid, Verdict::kInvalid, Verdict::kInvalid}));
  EXPECT_EQ(out[1].predicted, "A");
  EXPECT_TRUE(std::filesystem::exists(dir / "mc-01.json"));
  EXPECT_TRUE(contains(out[4].error, "down"));
  EXPECT_EQ(out[5].error, "parse failures");
}

TEST(EvalMc, MapperResolvesFreeText) {
  auto items = load_benchmark(tvt::fixture("benchmarks/mc.jsonl"));
  items.resize(1);
  AgentRunner agent = [](const std::string&) { return tvt::answered("the ACE inhibitor ramipril"); };
  ScriptedChat mapper(tvt::replies({"B"}));
  EvalOptions opts;
  opts.mapper = &mapper;
  EXPECT_EQ(evaluate_multiple_choice(items, agent, opts)[0].verdict, Verdict::kCorrect);
  EXPECT_EQ(evaluate_multiple_choice(items, agent)[0].verdict, Verdict::kInvalid);
}

TEST(EvalOpen, PromptHasNoOptionsAndMapperDecides) {
  auto items = load_benchmark(tvt::fixture("benchmarks/mc.jsonl"));
  items.resize(2);
  std::vector<std::string> prompts;
  AgentRunner agent = [&](const std::string& p) {
    prompts.push_back(p);
    return tvt::answered("some text");
  };
  EXPECT_THROW(evaluate_open_ended(items, agent), Error);
  ScriptedChat mapper(tvt::replies({"B", "None"}));
  EvalOptions opts;
  opts.mapper = &mapper;
  auto out = evaluate_open_ended(items, agent, opts);
  EXPECT_EQ(out[0].verdict, Verdict::kCorrect);
  EXPECT_EQ(out[1].verdict, Verdict::kInvalid);
  for (const auto& p : prompts) EXPECT_FALSE(contains(p, "A. ")) << p;
}

TEST(EvalDescription, DrugNameMatching) {
  bool near = true;
  EXPECT_TRUE(drug_matches(" Altace. ", {"Altace", "ramipril"}, &near));
  EXPECT_FALSE(near);
  EXPECT_TRUE(drug_matches("RAMIPRIL", {"Altace", "ramipril"}));
  EXPECT_FALSE(drug_matches("Altase", {"Altace", "ramipril"}, &near));
  EXPECT_TRUE(near);
  EXPECT_FALSE(drug_matches("ramipril tablets", {"ramipril"}, &near));
  EXPECT_TRUE(near);
  EXPECT_FALSE(drug_matches("Lipitor", {"Altace", "ramipril"}, &near));
  EXPECT_FALSE(near);
  EXPECT_FALSE(drug_matches("", {"Altace"}));
}

TEST(EvalDescription, GatingMatchesOracle) {
  auto items = load_benchmark(tvt::fixture("benchmarks/description.jsonl"));
  ASSERT_EQ(items.size(), 20u);
  auto out = evaluate_description_two_step(items, tvt::description_runner(items));
  std::size_t correct = 0, ungated = 0, drugs = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto play = tvt::description_play(items[i], i);
    // Oracle: lower-cased exact names, a letter only when the answer starts with one.
    std::string lname = play.drug, a0 = to_lower(items[i].acceptable_drugs[0]), a1 = to_lower(items[i].acceptable_drugs[1]);
    lname = to_lower(lname);
    bool drug_ok = lname == a0 || lname == a1;
    std::optional<std::string> letter;
    if (!play.answer.empty() && play.answer[0] >= 'A' && play.answer[0] <= 'E') letter = play.answer.substr(0, 1);
    if (play.answer.rfind("The answer is ", 0) == 0) letter = play.answer.substr(14, 1);
    Verdict expected_ungated = !letter ? Verdict::kInvalid
                                       : (*letter == items[i].correct ? Verdict::kCorrect : Verdict::kIncorrect);
    Verdict expected = expected_ungated == Verdict::kCorrect && !drug_ok ? Verdict::kIncorrect : expected_ungated;
    EXPECT_EQ(out[i].verdict, expected) << items[i].id;
    EXPECT_EQ(out[i].ungated, expected_ungated) << items[i].id;
    EXPECT_EQ(out[i].drug_correct, drug_ok) << items[i].id;
    EXPECT_EQ(out[i].near_miss, i % 5 == 3) << items[i].id;
    correct += expected == Verdict::kCorrect;
    ungated += expected_ungated == Verdict::kCorrect;
    drugs += drug_ok;
  }
  // The scenario must exercise the gate.
  EXPECT_LT(correct, ungated);
  auto report = compute_metrics({{"description", out}});
  EXPECT_DOUBLE_EQ(report.sets[0].tally.accuracy(), correct / 20.0);
  EXPECT_DOUBLE_EQ(*report.sets[0].ungated_accuracy, ungated / 20.0);
  EXPECT_DOUBLE_EQ(*report.sets[0].drug_id_accuracy, drugs / 20.0);
}

TEST(Metrics, ReportAndTable) {
  auto outcome = [](const std::string& task, Verdict v, int steps) {
    EvalOutcome o;
    o.task = task;
    o.verdict = v;
    o.steps = steps;
    o.tool_calls = steps - 1;
    return o;
  };
  std::vector<OutcomeSet> sets = {
      {"small", {outcome("dosage", Verdict::kCorrect, 3), outcome("dosage", Verdict::kIncorrect, 5)}},
      {"large", {outcome("dosage", Verdict::kCorrect, 2), outcome("indication", Verdict::kInvalid, 4),
                 outcome("indication", Verdict::kCorrect, 3), outcome("indication", Verdict::kCorrect, 3)}}};
  auto report = compute_metrics(sets);
  EXPECT_DOUBLE_EQ(report.sets[0].tally.accuracy(), 0.5);
  EXPECT_DOUBLE_EQ(report.sets[1].tally.invalid_rate(), 0.25);
  EXPECT_DOUBLE_EQ(report.sets[1].per_task["indication"].accuracy(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(report.sets[0].mean_steps, 4.0);
  EXPECT_DOUBLE_EQ(report.accuracy_variance, population_variance({50.0, 75.0}));
  auto j = metrics_to_json(report);
  EXPECT_EQ(j["sets"][1]["per_task"]["indication"]["invalid"], 1);
  EXPECT_FALSE(j["sets"][0].contains("drug_id_accuracy"));
  auto table = render_metrics_table(report);
  EXPECT_TRUE(contains(table, "50.00%"));
  EXPECT_TRUE(contains(table, "variance of accuracy across sets: 156.25000"));
  EXPECT_THROW(compute_metrics({}), Error);
  EXPECT_THROW(compute_metrics({{"empty", {}}}), Error);
}

TEST(Subsets, NestedManifests) {
  const auto& reg = tvt::corpus();
  auto names = reg.api_tool_names();
  std::vector<std::string> a(names.begin(), names.begin() + 10), b(names.begin(), names.begin() + 50);
  tvt::TempDir dir;
  write_file(dir / "a.json", Json(a).dump());
  EXPECT_EQ(load_subset_manifest(dir / "a.json"), a);
  write_file(dir / "bad.json", "{}");
  EXPECT_THROW(load_subset_manifest(dir / "bad.json"), Error);
  auto regs = nested_subsets(reg, {a, b, names});
  ASSERT_EQ(regs.size(), 3u);
  EXPECT_EQ(regs[0].api_tool_names().size(), 10u);
  EXPECT_EQ(regs[2].size(), reg.size());
  EXPECT_THROW(nested_subsets(reg, {b, a}), Error);
}
