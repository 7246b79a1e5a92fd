#include <gtest/gtest.h>

#include "toolverse/agent.hpp"
#include "toolverse/error.hpp"
#include "test_support.hpp"

using namespace toolverse;
using tvt::step_reply;

namespace {

struct Harness {
  CassetteStore store{tvt::fixture("cassettes")};
  std::vector<std::string> retrieved = {"get_dosage_by_drug_name"};
  Gateway gw;
  Harness()
      : gw(tvt::corpus(), [this] {
          GatewayOptions o;
          o.mode = ExecMode::kFixture;
          o.cassettes = &store;
          o.retriever = [this](const std::string&, int) { return retrieved; };
          return o;
        }()) {}
};

std::vector<std::string> tool_names_in_prompt(const std::string& system_prompt) {
  auto json = system_prompt.substr(system_prompt.find('['));
  std::vector<std::string> out;
  for (const auto& f : Json::parse(json)) out.push_back(f["name"].get<std::string>());
  return out;
}

}  // namespace

TEST(AgentParse, CallsAfterMarker) {
  Rng rng(1);
  auto p = parse_step_reply(R"(I need tools. [TOOL_CALLS][{"name":"ToolRAG","arguments":{"description":"dose"}}])", rng);
  EXPECT_EQ(p.thought, "I need tools.");
  ASSERT_EQ(p.calls.size(), 1u);
  EXPECT_EQ(p.calls[0].tool_name, "ToolRAG");
  EXPECT_EQ(p.calls[0].call_id.size(), 8u);
  EXPECT_FALSE(p.final_answer);
}

TEST(AgentParse, FinalAnswerSplitsOutCalls) {
  Rng rng(1);
  auto p = parse_step_reply(R"(Done. [FinalAnswer] 700 mg [TOOL_CALLS][{"name":"Finish","arguments":{}}])", rng);
  EXPECT_EQ(p.final_answer, "700 mg");
  ASSERT_EQ(p.calls.size(), 1u);
  EXPECT_EQ(p.calls[0].tool_name, "Finish");
}

TEST(AgentParse, BareJsonAndStringArguments) {
  Rng rng(1);
  auto calls = parse_function_calls(R"(call {"name": "get_indications", "arguments": "{\"drug_name\": \"X\"}"})", rng);
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].arguments["drug_name"], "X");
}

TEST(AgentParse, MalformedInputsThrowParse) {
  Rng rng(1);
  for (std::string bad : {"no json here", "[TOOL_CALLS][{\"name\": 1}]", "[TOOL_CALLS][{\"name\":\"a\",\"arguments\":[1]}",
                          "[TOOL_CALLS] nothing", "[TOOL_CALLS][]"}) {
    try {
      parse_step_reply(bad, rng);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParse) << bad;
    }
  }
}

TEST(AgentParse, CallIdsUniqueWithinStep) {
  Rng rng(3);
  auto calls = parse_function_calls(R"([{"name":"a","arguments":{}},{"name":"b","arguments":{}},{"name":"c"}])", rng);
  std::set<std::string> ids;
  for (const auto& c : calls) ids.insert(c.call_id);
  EXPECT_EQ(ids.size(), 3u);
}

TEST(Agent, ThreeStepTraceExposesRetrievedTools) {
  Harness h;
  ScriptedChat model(tvt::replies({
      step_reply("I should find a dosage tool.", "ToolRAG", {{"description", "drug dosage"}}),
      step_reply("Look up the dosage.", "get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}),
      R"(The label gives the schedule. [FinalAnswer] 700 mg every four weeks for three doses, then 1400 mg. [TOOL_CALLS][{"name":"Finish","arguments":{}}])",
  }));
  auto trace = run_inference("What is the dosage of Kisunla?", tvt::corpus(), {model, h.gw});
  ASSERT_EQ(trace.terminal, Terminal::kFinished) << trace.abort_reason;
  ASSERT_EQ(trace.steps.size(), 3u);
  EXPECT_TRUE(check_trace_well_formed(trace).empty()) << check_trace_well_formed(trace);
  EXPECT_EQ(trace.steps[1].results[0].status, ResultStatus::kOk);
  EXPECT_TRUE(trace.final_answer->starts_with("700 mg"));

  auto requests = model.requests();
  ASSERT_EQ(requests.size(), 3u);
  auto p0 = tvt::corpus().default_tools();
  EXPECT_EQ(tool_names_in_prompt(requests[0].system_prompt), p0);
  auto p1 = p0;
  p1.push_back("get_dosage_by_drug_name");
  EXPECT_EQ(tool_names_in_prompt(requests[1].system_prompt), p1);
  EXPECT_EQ(trace.available_tools, (std::vector<std::vector<std::string>>{p0, p1, p1}));
}

TEST(Agent, NoThoughtModeEndsOnPlainText) {
  Harness h;
  ScriptedChat model(tvt::replies({
      tvt::tool_call("ToolRAG", {{"description", "dosage"}}).dump(),
      tvt::tool_call("get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}).dump(),
      "700 mg every four weeks",
  }));
  auto trace = run_inference_no_thought("Kisunla dose?", tvt::corpus(), {model, h.gw});
  ASSERT_EQ(trace.steps.size(), 3u);
  for (const auto& s : trace.steps) EXPECT_EQ(s.thought, "");
  EXPECT_EQ(trace.final_answer, "700 mg every four weeks");
  EXPECT_EQ(trace.terminal, Terminal::kFinished);
}

TEST(Agent, StepLimitForcesAnswer) {
  for (int max_steps : {1, 3, 5}) {
    Harness h;
    std::vector<Json> script;
    for (int i = 0; i < max_steps - 1; ++i) {
      script.emplace_back(step_reply("Search again " + std::to_string(i), "ToolRAG",
                                     {{"description", "query " + std::to_string(i)}}));
    }
    script.emplace_back("I must answer now. [FinalAnswer] unknown");
    ScriptedChat model(script);
    AgentConfig cfg;
    cfg.max_steps = max_steps;
    auto trace = run_inference("q?", tvt::corpus(), {model, h.gw}, cfg);
    EXPECT_EQ(trace.terminal, Terminal::kStepLimitForced);
    EXPECT_EQ(static_cast<int>(trace.steps.size()), max_steps);
    EXPECT_EQ(trace.final_answer, "unknown");
    EXPECT_EQ(trace.generations, max_steps);
    auto last = model.requests().back();
    EXPECT_TRUE(contains(last.messages.back().content, "[FinalAnswer]"));
  }
}

TEST(Agent, UnavailableToolIsReportedToModel) {
  Harness h;
  ScriptedChat model(tvt::replies({
      step_reply("Call directly.", "get_indications", {{"drug_name", "Bizengri"}}),
      "Cannot. [FinalAnswer] unknown [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]",
  }));
  auto trace = run_inference("q", tvt::corpus(), {model, h.gw});
  ASSERT_GE(trace.steps.size(), 1u);
  EXPECT_EQ(trace.steps[0].results[0].payload["error"]["code"], "unavailable_tool");
}

TEST(Agent, UnparseableReplyGetsOneReprompt) {
  Harness h;
  ScriptedChat model(tvt::replies({"hmm", "Ok. [FinalAnswer] B [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]"}));
  auto trace = run_inference("q", tvt::corpus(), {model, h.gw});
  EXPECT_EQ(trace.final_answer, "B");
  EXPECT_EQ(model.requests()[1].messages.back().role, Role::kUser);
  EXPECT_TRUE(contains(model.requests()[1].messages.back().content, "could not be parsed"));

  ScriptedChat broken(tvt::replies({"hmm", "still prose"}));
  auto aborted = run_inference("q", tvt::corpus(), {broken, h.gw});
  EXPECT_EQ(aborted.terminal, Terminal::kAborted);
}

TEST(Agent, OverflowCompressesResultsOnce) {
  Harness h;
  ScriptedChat model(std::vector<Json>{
      step_reply("Find.", "ToolRAG", {{"description", "dosage"}}),
      step_reply("Get.", "get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}),
      Json{{"error", "overflow"}},
      "Short. [FinalAnswer] 700 mg [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]",
  });
  ScriptedChat summarizer(tvt::replies({"Kisunla: 700 mg Q4W x3 then 1400 mg Q4W."}));
  AgentConfig cfg;
  cfg.summarize_threshold_chars = 1 << 20;
  auto trace = run_inference("Kisunla dose?", tvt::corpus(), {model, h.gw, &summarizer}, cfg);
  ASSERT_EQ(trace.terminal, Terminal::kFinished) << trace.abort_reason;
  EXPECT_TRUE(trace.steps[1].results[0].summarized);
  EXPECT_EQ(summarizer.call_count(), 1u);
}

TEST(Agent, LongResultsAreSummarized) {
  Harness h;
  ScriptedChat model(tvt::replies({
      step_reply("Find.", "ToolRAG", {{"description", "dosage"}}),
      step_reply("Get.", "get_dosage_by_drug_name", {{"drug_name", "Kisunla"}}),
      "Ok. [FinalAnswer] 700 mg [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]",
  }));
  ScriptedChat summarizer(tvt::replies({"summary"}));
  AgentConfig cfg;
  cfg.summarize_threshold_chars = 64;
  auto trace = run_inference("q", tvt::corpus(), {model, h.gw, &summarizer}, cfg);
  EXPECT_EQ(trace.steps[1].results[0].payload, "summary");
  EXPECT_FALSE(trace.steps[0].results[0].summarized);  // local results stay verbatim
}

TEST(Agent, TraceJsonRoundTrip) {
  Harness h;
  ScriptedChat model(tvt::replies({
      step_reply("Find.", "ToolRAG", {{"description", "dosage"}}),
      "Ok. [FinalAnswer] B [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]",
  }));
  auto trace = run_inference("q", tvt::corpus(), {model, h.gw});
  EXPECT_EQ(trace_from_json(trace_to_json(trace)), trace);
}

TEST(Agent, DeterministicForSeed) {
  auto run = [] {
    Harness h;
    ScriptedChat model(tvt::replies({
        step_reply("Find.", "ToolRAG", {{"description", "dosage"}}),
        "Ok. [FinalAnswer] B [TOOL_CALLS][{\"name\":\"Finish\",\"arguments\":{}}]",
    }));
    return trace_to_json(run_inference("q", tvt::corpus(), {model, h.gw})).dump();
  };
  EXPECT_EQ(run(), run());
}

TEST(Choice, ExtractLetter) {
  Options o = {{"A", "Sitagliptin"}, {"B", "Altace"}, {"C", "Katerzia"}, {"D", "Aspirin"}};
  EXPECT_EQ(extract_choice_letter("B", o), "B");
  EXPECT_EQ(extract_choice_letter("(c)", o), "C");
  EXPECT_EQ(extract_choice_letter("The answer is D because...", o), "D");
  EXPECT_EQ(extract_choice_letter("Altace", o), std::nullopt);
  EXPECT_EQ(extract_choice_letter("A or B", o), std::nullopt);
  EXPECT_EQ(extract_choice_letter("E", o), std::nullopt);
}

TEST(Choice, MapperFallsBackToInvalid) {
  Options o = {{"A", "x"}, {"B", "y"}};
  ScriptedChat chat(tvt::replies({"B", "NONE"}));
  EXPECT_EQ(map_answer_to_choice("q", o, "y it is", chat), "B");
  EXPECT_EQ(map_answer_to_choice("q", o, "no idea", chat), std::nullopt);
  EXPECT_EQ(map_answer_to_choice("q", o, "  ", chat), std::nullopt);
}
