#include <gtest/gtest.h>

#include <filesystem>

#include "toolverse/error.hpp"
#include "toolverse/request_builder.hpp"
#include "test_support.hpp"

using namespace toolverse;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> golden_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(tvt::fixture("goldens"))) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

ToolSpec golden_spec(const Json& g) {
  if (g.contains("spec")) return tool_spec_from_json(g["spec"]);
  return tvt::corpus().at(g["tool"].get<std::string>());
}

}  // namespace

TEST(RequestBuilder, GoldensMatchByteForByte) {
  auto files = golden_files();
  ASSERT_EQ(files.size(), 12u);
  for (const auto& f : files) {
    auto g = Json::parse(read_file(f));
    auto req = compile_call(golden_spec(g), g["arguments"], g.value("fda_limit", kDefaultFdaLimit));
    EXPECT_EQ(req.serialize(), g["expected"].get<std::string>()) << f.filename();
  }
}

TEST(RequestBuilder, SerializedFormRoundTrips) {
  for (const auto& f : golden_files()) {
    auto g = Json::parse(read_file(f));
    auto req = compile_call(golden_spec(g), g["arguments"], g.value("fda_limit", kDefaultFdaLimit));
    EXPECT_EQ(CompiledRequest::from_json(Json::parse(req.serialize())), req);
    EXPECT_EQ(req.hash(), hash_hex(req.serialize()));
  }
}

TEST(RequestBuilder, FdaClausesAndLimit) {
  FdaSearch m;
  m.search_fields = {{"b", "openfda.generic_name"}, {"a", "openfda.brand_name"}};
  m.return_fields = {"openfda.brand_name"};
  auto req = build_fda_request(m, {{"a", "X Y"}, {"b", Json::array({"p", "q"})}}, 3);
  EXPECT_EQ(req.path, "/drug/label.json");
  EXPECT_EQ(req.query,
            "search=openfda.brand_name:\"X%20Y\"+AND+(openfda.generic_name:\"p\"+OR+openfda.generic_name:\"q\")"
            "&limit=3");
  EXPECT_EQ(req.projection, m.return_fields);
}

TEST(RequestBuilder, MissingPlaceholderValueThrows) {
  RestCall m;
  m.endpoint_template = "/v3/api/entity/{id}";
  try {
    build_rest_request(m, Json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnboundPlaceholder);
  }
}

TEST(RequestBuilder, PlaceholderIsPercentEncoded) {
  RestCall m;
  m.endpoint_template = "/v3/api/entity/{id}";
  EXPECT_EQ(build_rest_request(m, {{"id", "a/b c"}}).path, "/v3/api/entity/a%2Fb%20c");
}

TEST(RequestBuilder, SpecialToolsHaveNoRequest) {
  try {
    compile_call(tvt::corpus().at("Finish"), Json::object());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

// Building twice from equal arguments in different key order gives the same bytes.
TEST(RequestBuilder, ArgumentOrderDoesNotMatter) {
  const auto& spec = tvt::corpus().at("get_evidence_by_target_disease");
  Json a = {{"efoId", "EFO_1"}, {"ensemblId", "ENSG1"}};
  Json b = {{"ensemblId", "ENSG1"}, {"efoId", "EFO_1"}};
  EXPECT_EQ(compile_call(spec, a).serialize(), compile_call(spec, b).serialize());
}
