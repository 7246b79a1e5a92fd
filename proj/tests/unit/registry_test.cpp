#include <gtest/gtest.h>

#include "toolverse/error.hpp"
#include "toolverse/registry.hpp"
#include "test_support.hpp"

using namespace toolverse;
using tvt::TempDir;

TEST(Registry, ShippedCorpusHas211Tools) {
  const auto& r = tvt::corpus();
  EXPECT_EQ(r.size(), 211u);
  EXPECT_EQ(r.api_tool_names().size(), 207u);
  for (const auto& s : special_tools()) EXPECT_TRUE(r.contains(s.name));
  EXPECT_TRUE(r.contains("get_indications"));
}

TEST(Registry, EmptyFileListHoldsOnlySpecials) {
  auto r = load_registry({});
  EXPECT_EQ(r.size(), 4u);
  EXPECT_EQ(r.default_tools(), (std::vector<std::string>{"ToolRAG", "Finish", "GiveAnswer", "End"}));
}

TEST(Registry, DuplicateNamesRejected) {
  TempDir dir;
  auto doc = tool_spec_to_json(tvt::corpus().at("get_indications"));
  write_file(dir / "a.json", doc.dump());
  write_file(dir / "b.json", doc.dump());
  try {
    load_registry({dir / "a.json", dir / "b.json"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateName);
  }
  Registry r;
  EXPECT_THROW(r.add(special_tools()[1]), Error);
}

TEST(Registry, SaveLoadRoundTrip) {
  TempDir dir;
  save_registry(tvt::corpus(), dir.path());
  EXPECT_EQ(load_registry_dir(dir.path()), tvt::corpus());
  EXPECT_EQ(registry_from_json(registry_to_json(tvt::corpus())), tvt::corpus());
}

// Any subset saved and reloaded gives back the same subset.
TEST(Registry, SubsetRoundTripProperty) {
  const auto names = tvt::corpus().api_tool_names();
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> pick;
    for (const auto& n : names) {
      if (rng.index(3) == 0) pick.push_back(n);
    }
    auto sub = subset_registry(tvt::corpus(), pick);
    EXPECT_EQ(sub.size(), pick.size() + 4);
    TempDir dir;
    save_registry(sub, dir.path());
    EXPECT_EQ(load_registry_dir(dir.path()), sub);
  }
}

TEST(Registry, InvalidDocumentStopsLoadButValidationReportsAll) {
  TempDir dir;
  save_registry(subset_registry(tvt::corpus(), {"get_indications", "get_disease_id_desc"}), dir.path());
  write_file(dir / "index.json", R"(["get_indications.json", "get_disease_id_desc.json", "broken.json", "bad.json"])");
  write_file(dir / "broken.json", "{not json");
  auto bad = tool_spec_to_json(tvt::corpus().at("get_adverse_reactions"));
  bad["category"] = "astrology";
  write_file(dir / "bad.json", bad.dump());
  EXPECT_THROW(load_registry_dir(dir.path()), Error);
  auto report = validate_registry_dir(dir.path());
  EXPECT_EQ(report.total, 8u);
  EXPECT_EQ(report.valid, 6u);
  ASSERT_EQ(report.invalid.size(), 2u);
  EXPECT_EQ(report.invalid[0].violations[0].code, "malformed_json");
  EXPECT_EQ(report.invalid[1].violations[0].code, "unknown_category");
}

TEST(Registry, CleanCorpusValidates) {
  auto report = validate_registry_dir(tvt::spec_dir());
  EXPECT_EQ(report.valid, 211u);
  EXPECT_TRUE(report.invalid.empty());
}

TEST(Registry, NestedManifests) {
  EXPECT_TRUE(manifests_are_nested({{"a"}, {"a", "b"}, {"b", "a", "c"}}));
  EXPECT_FALSE(manifests_are_nested({{"a", "b"}, {"a"}}));
}
