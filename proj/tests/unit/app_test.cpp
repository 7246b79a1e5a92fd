#include <gtest/gtest.h>

#include "toolverse/app.hpp"
#include "toolverse/error.hpp"
#include "test_support.hpp"

using namespace toolverse;

namespace {

ConfigMap fixture_config(const tvt::TempDir& dir, ConfigMap extra = {}) {
  ConfigMap flags = {{"mode", "fixture"},
                     {"paths.specs", tvt::spec_dir().string()},
                     {"paths.cassettes", tvt::fixture("cassettes").string()},
                     {"paths.traces", (dir / "traces").string()},
                     {"paths.index", (dir / "index").string()},
                     {"chat.script", tvt::fixture("scripts/kisunla.json").string()}};
  for (auto& [k, v] : extra) flags[k] = v;
  return resolve_config({}, {}, flags);
}

ChatRequest user(const std::string& text) {
  ChatRequest r;
  r.messages.push_back({Role::kUser, text});
  return r;
}

}  // namespace

TEST(ChatScript, RulesMatchInOrderAndRepeatLastReply) {
  tvt::TempDir dir;
  write_file(dir / "s.json", R"({"rules":[
      {"match":["alpha","beta"],"replies":["both","both again"]},
      {"match":"alpha","reply":"alpha only"},
      {"match":"boom","reply":{"error":"overflow"}},
      {"match":"down","reply":{"error":"transport"}}]})");
  auto chat = load_chat_script(dir / "s.json");
  EXPECT_EQ(chat->model_id(), "scripted");
  EXPECT_EQ(chat->chat(user("alpha beta")), "both");
  EXPECT_EQ(chat->chat(user("beta alpha")), "both again");
  EXPECT_EQ(chat->chat(user("alpha beta")), "both again");
  EXPECT_EQ(chat->chat(user("alpha")), "alpha only");
  try {
    chat->chat(user("boom"));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContextOverflow);
  }
  EXPECT_THROW(chat->chat(user("down")), TransportError);
  EXPECT_THROW(chat->chat(user("nothing")), TransportError);

  write_file(dir / "list.json", R"(["one","two"])");
  auto seq = load_chat_script(dir / "list.json");
  EXPECT_EQ(seq->chat(user("x")), "one");
  EXPECT_EQ(seq->chat(user("x")), "two");

  write_file(dir / "bad.json", R"({"rules":[{"match":"x"}]})");
  EXPECT_THROW(load_chat_script(dir / "bad.json"), Error);
  EXPECT_THROW(load_chat_script(dir / "missing.json"), Error);
}

TEST(App, ConfigShowRedactsSecrets) {
  tvt::TempDir dir;
  auto config = resolve_config({}, {{"TOOLVERSE_CHAT_KEY", "sk-secret"}}, {{"mode", "fixture"}});
  Runtime rt(config);
  auto shown = run_command(rt, "config.show", Json::object());
  EXPECT_EQ(shown["chat.api_key"], "***");
  EXPECT_EQ(shown["mode"], "fixture");
  EXPECT_FALSE(contains(shown.dump(), "sk-secret"));
}

TEST(App, UnknownCommandAndBadRequests) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  EXPECT_THROW(run_command(rt, "nope", Json::object()), Error);
  EXPECT_THROW(run_command(rt, "ask", Json::array()), Error);
  try {
    run_command(rt, "ask", Json::object());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_THROW(run_command(rt, "ask", {{"question", "q"}, {"max_steps", "3"}}), Error);
  EXPECT_EQ(command_names().size(), 14u);
}

TEST(App, ToolsValidate) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  auto out = run_command(rt, "tools.validate", Json::object());
  EXPECT_EQ(out["total"], 211);
  EXPECT_EQ(out["valid"], 211);
  EXPECT_EQ(out["ok"], true);
}

TEST(App, AskRunsTheLoopOnCassettes) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  auto out = run_command(rt, "ask", {{"question", "What is the initial dosing schedule of Kisunla?"}});
  ASSERT_EQ(out["terminal"], "finished") << out.dump();
  EXPECT_EQ(out["steps"], 3);
  EXPECT_TRUE(contains(out["answer"].get<std::string>(), "700 mg"));
  auto trace = trace_from_json(Json::parse(read_file(out["trace_path"].get<std::string>())));
  EXPECT_EQ(trace.steps[1].results[0].status, ResultStatus::kOk);
  EXPECT_EQ(trace.steps[1].results[0].source, ResultSource::kFixture);
}

TEST(App, FixtureModeWithoutScriptFails) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir, {{"chat.script", ""}}));
  try {
    run_command(rt, "ask", {{"question", "q"}});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(App, EvalWritesMetricsAndOutcomes) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  auto out_path = (dir / "metrics.json").string();
  auto out = run_command(rt, "eval", {{"benchmark", tvt::fixture("benchmarks/mc.jsonl").string()},
                                      {"out", out_path},
                                      {"trace_dir", (dir / "eval").string()}});
  ASSERT_EQ(out["sets"].size(), 1u);
  // The script answers the Kisunla item through its tools and A elsewhere.
  auto items = load_benchmark(tvt::fixture("benchmarks/mc.jsonl"));
  std::size_t expected = 0;
  for (const auto& i : items) expected += i.id == "mc-02" || i.correct == "A";
  EXPECT_EQ(out["sets"][0]["correct"], expected);
  EXPECT_EQ(out["sets"][0]["invalid"], 0);
  EXPECT_TRUE(contains(out["table"].get<std::string>(), "accuracy"));
  auto saved = Json::parse(read_file(out_path));
  EXPECT_EQ(saved["sets"][0]["total"], 6);
  EXPECT_EQ(split_lines(read_file(out_path + ".outcomes.jsonl")).size(), 6u);
}

TEST(App, EvalOverNestedSubsets) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  auto names = rt.registry().api_tool_names();
  std::vector<std::string> small(names.begin(), names.begin() + 20);
  write_file(dir / "small.json", Json(small).dump());
  write_file(dir / "all.json", Json(names).dump());
  auto out = run_command(rt, "eval", {{"benchmark", tvt::fixture("benchmarks/mc.jsonl").string()},
                                      {"subsets", {(dir / "small.json").string(), (dir / "all.json").string()}}});
  ASSERT_EQ(out["sets"].size(), 2u);
  EXPECT_EQ(out["sets"][0]["name"], "small");
  EXPECT_THROW(run_command(rt, "eval", {{"benchmark", tvt::fixture("benchmarks/mc.jsonl").string()},
                                        {"subsets", {(dir / "all.json").string(), (dir / "small.json").string()}}}),
               Error);
}

TEST(App, IndexBuildAndReload) {
  tvt::TempDir dir;
  Runtime rt(fixture_config(dir));
  auto out = run_command(rt, "index.build", Json::object());
  EXPECT_EQ(out["entries"], 207);  // API tools only
  Runtime again(fixture_config(dir));
  EXPECT_EQ(again.index().fingerprint(), out["fingerprint"].get<std::string>());
}
