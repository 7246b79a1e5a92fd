#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "toolverse/tool_spec.hpp"
#include "toolverse/util.hpp"

namespace toolverse {

enum class Service { kOpenFda, kOpenTargets, kMonarch };
std::string_view service_name(Service s) noexcept;

// A request with the host left symbolic. The base URL and any credential are
// attached only when the request is sent, so the serialized form is safe to
// store in cassettes and goldens.
struct CompiledRequest {
  std::string method = "GET";
  Service service = Service::kOpenFda;
  std::string path;
  std::string query;  // already encoded, without the leading '?'
  std::string body;
  std::string accept = "application/json";
  // Document fields kept from each openFDA record; applied client-side.
  std::vector<std::string> projection;

  bool operator==(const CompiledRequest&) const = default;

  [[nodiscard]] Json to_json() const;
  // Compact JSON of to_json(); the golden-file format.
  [[nodiscard]] std::string serialize() const;
  // hash_hex(serialize()); names the cassette file.
  [[nodiscard]] std::string hash() const;
  static CompiledRequest from_json(const Json& doc);
};

inline constexpr int kDefaultFdaLimit = 5;

// search=<clauses joined by +AND+>&limit=N. Each clause is field:"value" with
// the value percent-encoded; a list value becomes (f:"a"+OR+f:"b").
// Clauses follow the order of search_fields keys.
CompiledRequest build_fda_request(const FdaSearch& mapping, const Json& arguments,
                                  int limit = kDefaultFdaLimit);

// POST /api/v4/graphql with {"query", "variables"}. Values are coerced to the
// variable types declared in the query header.
CompiledRequest build_graphql_request(const GraphQlQuery& mapping, const Json& arguments);

// GET with {placeholders} path-encoded, static and bound query parameters
// merged and sorted by name.
CompiledRequest build_rest_request(const RestCall& mapping, const Json& arguments);

// Dispatches on the mapping kind. Throws Error(kPrecondition) for special and
// simulated tools, which have no HTTP form.
CompiledRequest compile_call(const ToolSpec& spec, const Json& arguments, int fda_limit = kDefaultFdaLimit);

}  // namespace toolverse
