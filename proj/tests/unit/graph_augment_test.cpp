#include <gtest/gtest.h>

#include <atomic>

#include "toolverse/augment.hpp"
#include "toolverse/error.hpp"
#include "toolverse/request_builder.hpp"
#include "toolverse/tool_graph.hpp"
#include "test_support.hpp"

using namespace toolverse;

namespace {

// YES only for get_disease_id_desc -> get_associated_targets.
std::string rule_judge(const ChatRequest& req) {
  const auto& p = req.messages.back().content;
  return contains(p, "Tool A:\n{\"name\":\"get_disease_id_desc\"") &&
                 contains(p, "Tool B:\n{\"name\":\"get_associated_targets\"")
             ? "YES"
             : "NO";
}

Registry small_registry() {
  return tvt::subset_registry(tvt::corpus(), {"get_disease_id_desc", "get_associated_targets", "get_indications"});
}

Json sample_value(ValueType t, Rng& rng) {
  auto s = "v" + rng.alnum_id(5) + " x";
  switch (t) {
    case ValueType::kString: return s;
    case ValueType::kInteger: return static_cast<int>(rng.index(50)) + 1;
    case ValueType::kNumber: return 0.5;
    case ValueType::kBoolean: return true;
    case ValueType::kStringList: return Json::array({s, "w"});
  }
  return s;
}

RephrasePool random_pool(const Registry& r, Rng& rng) {
  RephrasePool pool;
  for (const auto& name : r.api_tool_names()) {
    ToolVariants v;
    v.names = {name + "_v1", "fetch_" + rng.alnum_id(6)};
    v.descriptions = {"Rephrased: " + r.at(name).description};
    for (const auto& a : r.at(name).arguments) {
      v.arguments[a.name] = {{a.name + "_alt", "p" + rng.alnum_id(4)}, {"Alt: " + a.description}};
    }
    pool[name] = v;
  }
  return pool;
}

}  // namespace

TEST(ToolGraph, JudgeVerdictParsing) {
  EXPECT_EQ(parse_judge_verdict("YES"), true);
  EXPECT_EQ(parse_judge_verdict(" no. "), false);
  EXPECT_EQ(parse_judge_verdict("Yes, because"), std::nullopt);
  EXPECT_EQ(parse_judge_verdict(""), std::nullopt);
}

TEST(ToolGraph, EdgesAreExactlyYesVerdicts) {
  auto reg = small_registry();
  CallbackChat judge(rule_judge);
  GraphBuildReport report;
  auto g = build_tool_graph(reg, judge, {}, &report);
  EXPECT_EQ(g.nodes().size(), 3u);
  ASSERT_EQ(g.edges().size(), 1u);
  EXPECT_TRUE(g.has_edge("get_disease_id_desc", "get_associated_targets"));
  EXPECT_EQ(report.judged, 6u);
  EXPECT_TRUE(graph_matches_registry(g, reg));
  EXPECT_EQ(ToolGraph::from_json(g.to_json()), g);
}

TEST(ToolGraph, CacheAvoidsRejudging) {
  tvt::TempDir dir;
  auto reg = small_registry();
  std::atomic<int> calls{0};
  CallbackChat judge([&](const ChatRequest& r) { ++calls; return rule_judge(r); });
  {
    EdgeCache cache(dir / "edges.jsonl");
    GraphBuildOptions o;
    o.cache = &cache;
    build_tool_graph(reg, judge, o);
  }
  EXPECT_EQ(calls.load(), 6);
  EdgeCache cache(dir / "edges.jsonl");
  EXPECT_EQ(cache.size(), 6u);
  GraphBuildOptions o;
  o.cache = &cache;
  GraphBuildReport report;
  auto g = build_tool_graph(reg, judge, o, &report);
  EXPECT_EQ(calls.load(), 6);
  EXPECT_EQ(report.cached, 6u);
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST(ToolGraph, UnparseableVerdictSkippedAndFailureThrows) {
  auto reg = small_registry();
  CallbackChat chatty([](const ChatRequest&) { return std::string("maybe"); });
  GraphBuildReport report;
  auto g = build_tool_graph(reg, chatty, {}, &report);
  EXPECT_TRUE(g.edges().empty());
  EXPECT_EQ(report.skipped.size(), 6u);

  CallbackChat down([](const ChatRequest&) -> std::string { throw TransportError("down"); });
  EXPECT_THROW(build_tool_graph(reg, down), TransportError);
}

TEST(ToolGraph, PatchRejudgesOnlyTouchedPairs) {
  auto reg = small_registry();
  CallbackChat judge(rule_judge);
  auto g = build_tool_graph(reg, judge);
  auto bigger = tvt::subset_registry(
      tvt::corpus(), {"get_disease_id_desc", "get_associated_targets", "get_indications", "get_adverse_reactions"});
  std::atomic<int> calls{0};
  CallbackChat counting([&](const ChatRequest& r) { ++calls; return rule_judge(r); });
  auto patched = patch_tool_graph(g, bigger, counting, {});
  EXPECT_EQ(calls.load(), 6);  // the new tool against three others, both directions
  EXPECT_EQ(patched.nodes().size(), 4u);
  EXPECT_TRUE(patched.has_edge("get_disease_id_desc", "get_associated_targets"));
}

TEST(ToolGraph, ChainWalkFollowsEdges) {
  ToolGraph g;
  for (auto n : {"a", "b", "c", "d"}) g.add_node(n);
  g.add_edge({"a", "b", ""});
  g.add_edge({"b", "c", ""});
  g.add_edge({"c", "a", ""});
  EXPECT_THROW(g.add_edge({"a", "a", ""}), Error);
  auto chain = sample_tool_chain(g, "a", 5, 7);
  EXPECT_EQ(chain.tools, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(chain.truncated);
  EXPECT_EQ(sample_tool_chain(g, "a", 2, 7).tools.size(), 2u);
}

// Renaming through any pool never changes the request a call compiles to.
TEST(Augment, RenamedCallsCompileToSameRequest) {
  Rng rng(99);
  const auto& reg = tvt::corpus();
  auto pool = random_pool(reg, rng);
  std::size_t checked = 0;
  for (const auto& name : reg.api_tool_names()) {
    const auto& spec = reg.at(name);
    auto [aug, remap] = augment_tool_spec(spec, pool, 5);
    EXPECT_TRUE(validate_spec(aug).ok()) << name;
    for (int trial = 0; trial < 3; ++trial) {
      Json args = Json::object();
      for (const auto& a : spec.arguments) {
        if (a.required || rng.index(2)) args[a.name] = sample_value(a.value_type, rng);
      }
      FunctionCall c{"id", name, args};
      auto renamed = remap.apply(c);
      EXPECT_EQ(renamed.tool_name, aug.name);
      EXPECT_EQ(compile_call(aug, renamed.arguments).serialize(), compile_call(spec, args).serialize()) << name;
      EXPECT_EQ(remap.invert(renamed), c);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 207u * 3);
}

TEST(Augment, CollisionsAndBadNamesAreFlagged) {
  const auto& spec = tvt::corpus().at("get_indications");
  RephrasePool pool;
  pool["get_indications"].names = {"get_dosage_by_drug_name"};
  pool["get_indications"].arguments["drug_name"].names = {"not an identifier"};
  auto [aug, remap] = augment_tool_spec(spec, pool, 1, {"get_dosage_by_drug_name"});
  EXPECT_EQ(aug.name, "get_indications");
  EXPECT_EQ(aug.arguments[0].name, "drug_name");
  EXPECT_GE(remap.flags.size(), 2u);
  EXPECT_TRUE(remap.identity());
}

TEST(Augment, SeededChoiceIsStable) {
  Rng rng(4);
  auto pool = random_pool(tvt::corpus(), rng);
  const auto& spec = tvt::corpus().at("get_genes_by_disease");
  EXPECT_EQ(augment_tool_spec(spec, pool, 11).first, augment_tool_spec(spec, pool, 11).first);
  EXPECT_EQ(rephrase_pool_from_json(rephrase_pool_to_json(pool)).size(), pool.size());
}
