#include <gtest/gtest.h>

#include <functional>

#include "toolverse/error.hpp"
#include "toolverse/tool_spec.hpp"
#include "test_support.hpp"

using namespace toolverse;

namespace {

Json indications_doc() {
  return Json::parse(R"({
    "name": "get_indications",
    "description": "Retrieve the approved indications and usage from the FDA drug label for a given drug name.",
    "category": "drug use, mechanism, composition",
    "parameter": {"type": "object",
                  "properties": {"drug_name": {"type": "string", "description": "The brand or generic name of the drug."}},
                  "required": ["drug_name"]},
    "mapping": {"kind": "fda_search", "search_fields": {"drug_name": "openfda.brand_name"},
                "return_fields": ["openfda.brand_name", "indications_and_usage"]}
  })");
}

std::vector<std::string> codes(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& v : r.violations) out.push_back(v.code);
  return out;
}

}  // namespace

TEST(ToolSpec, WellFormedSpecHasEmptyReport) {
  auto spec = tool_spec_from_json(indications_doc());
  EXPECT_TRUE(validate_spec(spec).ok());
  ASSERT_EQ(spec.arguments.size(), 1u);
  EXPECT_TRUE(spec.arguments[0].required);
  EXPECT_EQ(mapping_kind_name(spec.mapping), "fda_search");
}

TEST(ToolSpec, JsonRoundTripIsLossless) {
  for (const auto& name : tvt::corpus().api_tool_names()) {
    const auto& spec = tvt::corpus().at(name);
    EXPECT_EQ(tool_spec_from_json(tool_spec_to_json(spec)), spec) << name;
  }
}

TEST(ToolSpec, RequiredArgumentMissingFromPropertiesIsOneViolation) {
  auto doc = indications_doc();
  doc["parameter"]["required"].push_back("route");
  auto r = validate_spec(tool_spec_from_json(doc));
  EXPECT_EQ(codes(r), std::vector<std::string>{"undeclared_required"});
}

TEST(ToolSpec, FdaBindingOfUndeclaredArgumentIsOneViolation) {
  auto doc = indications_doc();
  doc["mapping"]["search_fields"]["dose"] = "dosage_and_administration";
  auto r = validate_spec(tool_spec_from_json(doc));
  EXPECT_EQ(codes(r), std::vector<std::string>{"unbound_mapping_argument"});
}

TEST(ToolSpec, SchemaErrorsThrow) {
  auto bad_type = indications_doc();
  bad_type["parameter"]["properties"]["drug_name"]["type"] = "date";
  EXPECT_THROW(tool_spec_from_json(bad_type), Error);
  auto no_mapping = indications_doc();
  no_mapping.erase("mapping");
  EXPECT_THROW(tool_spec_from_json(no_mapping), Error);
  auto bad_kind = indications_doc();
  bad_kind["mapping"]["kind"] = "soap";
  try {
    tool_spec_from_json(bad_kind);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaViolation);
  }
}

TEST(ToolSpec, GraphQlVariablesParsed) {
  auto vars = graphql_variables("query q($efoId: String!, $ids: [String!]!, $size: Int) { x }");
  ASSERT_EQ(vars.size(), 3u);
  EXPECT_EQ(vars[0].name, "efoId");
  EXPECT_TRUE(vars[0].non_null);
  EXPECT_EQ(vars[1].type, "[String!]");
  EXPECT_FALSE(vars[2].non_null);
}

TEST(ToolSpec, TemplatePlaceholdersInOrder) {
  EXPECT_EQ(template_placeholders("/a/{x}/b/{y}"), (std::vector<std::string>{"x", "y"}));
  EXPECT_TRUE(template_placeholders("/v3/api/search").empty());
}

TEST(ToolSpec, RenderedTextListsArguments) {
  auto spec = tool_spec_from_json(indications_doc());
  EXPECT_EQ(render_tool_text(spec),
            "get_indications: Retrieve the approved indications and usage from the FDA drug label for a given drug "
            "name. Arguments: drug_name (string, required): The brand or generic name of the drug.;");
}

// Each mutation of a valid corpus document must be caught with its code.
TEST(ToolSpec, MutationCorpusIsCaught) {
  struct Mutation {
    std::string expect;
    std::function<bool(Json&)> apply;  // false when not applicable
  };
  const std::vector<Mutation> mutations = {
      {"invalid_name", [](Json& d) { d["name"] = "get indications"; return true; }},
      {"empty_description", [](Json& d) { d["description"] = "  "; return true; }},
      {"unknown_category", [](Json& d) { d["category"] = "astrology"; return true; }},
      {"undeclared_required", [](Json& d) { d["parameter"]["required"].push_back("ghost"); return true; }},
      {"unbound_mapping_argument",
       [](Json& d) {
         auto& m = d["mapping"];
         if (m["kind"] == "fda_search") m["search_fields"]["ghost"] = "x";
         else if (m["kind"] == "graphql") m["variable_bindings"]["ghost"] = "ghost";
         else m["query_bindings"]["ghost"] = "ghost";
         return true;
       }},
      {"unbound_graphql_variable",
       [](Json& d) {
         if (d["mapping"]["kind"] != "graphql") return false;
         d["mapping"]["variable_bindings"] = Json::object();
         return true;
       }},
      {"unresolvable_placeholder",
       [](Json& d) {
         if (d["mapping"]["kind"] != "rest") return false;
         d["mapping"]["endpoint_template"] = d["mapping"]["endpoint_template"].get<std::string>() + "/{nothing}";
         return true;
       }},
      {"empty_return_fields",
       [](Json& d) {
         if (d["mapping"]["kind"] != "fda_search") return false;
         d["mapping"]["return_fields"] = Json::array();
         return true;
       }},
  };
  std::size_t applied = 0;
  for (const auto& name : tvt::corpus().api_tool_names()) {
    const auto original = tool_spec_to_json(tvt::corpus().at(name));
    for (const auto& m : mutations) {
      Json doc = original;
      if (!m.apply(doc)) continue;
      ++applied;
      auto c = codes(validate_spec(tool_spec_from_json(doc)));
      EXPECT_NE(std::find(c.begin(), c.end(), m.expect), c.end()) << name << " / " << m.expect;
    }
  }
  EXPECT_GT(applied, 207u * 5);
}
