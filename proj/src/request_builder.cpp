#include "toolverse/request_builder.hpp"

#include <cmath>
#include <set>

#include "toolverse/error.hpp"

namespace toolverse {

std::string_view service_name(Service s) noexcept {
  switch (s) {
    case Service::kOpenFda: return "openfda";
    case Service::kOpenTargets: return "opentargets";
    case Service::kMonarch: return "monarch";
  }
  return "openfda";
}

namespace {

Service parse_service(std::string_view s) {
  if (s == "openfda") return Service::kOpenFda;
  if (s == "opentargets") return Service::kOpenTargets;
  if (s == "monarch") return Service::kMonarch;
  throw Error(ErrorCode::kParse, "unknown service '" + std::string(s) + "'");
}

std::string scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

bool present(const Json& args, const std::string& name) {
  return args.is_object() && args.contains(name) && !args[name].is_null();
}

void reject_unbound(const Json& args, const std::set<std::string>& bound) {
  if (!args.is_object()) {
    if (args.is_null()) return;
    throw Error(ErrorCode::kInvalidArgument, "arguments must be a JSON object");
  }
  for (const auto& [name, _] : args.items()) {
    if (!bound.count(name)) {
      throw Error(ErrorCode::kInvalidArgument, "argument '" + name + "' is not bound by the tool's mapping");
    }
  }
}

Json coerce_graphql(const Json& v, const std::string& type, const std::string& var) {
  auto fail = [&]() -> Json {
    throw Error(ErrorCode::kTypeMismatch, "cannot coerce value " + v.dump() + " to " + type + " for $" + var);
  };
  if (!type.empty() && type.front() == '[') {
    auto inner = type.substr(1, type.find(']') == std::string::npos ? std::string::npos : type.find(']') - 1);
    if (!inner.empty() && inner.back() == '!') inner.pop_back();
    Json out = Json::array();
    if (v.is_array()) {
      for (const auto& item : v) out.push_back(coerce_graphql(item, inner, var));
    } else {
      out.push_back(coerce_graphql(v, inner, var));
    }
    return out;
  }
  if (type == "Int") {
    if (v.is_number_integer()) return v;
    if (v.is_number_float()) {
      double d = v.get<double>();
      if (std::floor(d) == d && std::isfinite(d)) return static_cast<std::int64_t>(d);
      return fail();
    }
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      try {
        std::size_t used = 0;
        auto n = std::stoll(s, &used);
        if (used == s.size()) return n;
      } catch (const std::exception&) {
      }
    }
    return fail();
  }
  if (type == "Float") {
    if (v.is_number()) return v;
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      try {
        std::size_t used = 0;
        auto d = std::stod(s, &used);
        if (used == s.size() && std::isfinite(d)) return d;
      } catch (const std::exception&) {
      }
    }
    return fail();
  }
  if (type == "Boolean") {
    if (v.is_boolean()) return v;
    if (v == "true") return true;
    if (v == "false") return false;
    return fail();
  }
  if (type == "String" || type == "ID") {
    if (v.is_string()) return v;
    if (v.is_number() || v.is_boolean()) return scalar_text(v);
    return fail();
  }
  // Enums and input objects pass through untouched.
  return v;
}

}  // namespace

Json CompiledRequest::to_json() const {
  Json out = Json::object();
  out["method"] = method;
  out["service"] = std::string(service_name(service));
  out["path"] = path;
  out["query"] = query;
  out["body"] = body;
  out["accept"] = accept;
  out["projection"] = projection;
  return out;
}

std::string CompiledRequest::serialize() const { return to_json().dump(); }

std::string CompiledRequest::hash() const { return hash_hex(serialize()); }

CompiledRequest CompiledRequest::from_json(const Json& doc) {
  CompiledRequest r;
  try {
    r.method = doc.at("method").get<std::string>();
    r.service = parse_service(doc.at("service").get<std::string>());
    r.path = doc.at("path").get<std::string>();
    r.query = doc.value("query", "");
    r.body = doc.value("body", "");
    r.accept = doc.value("accept", "application/json");
    if (doc.contains("projection")) r.projection = doc["projection"].get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed compiled request: ") + e.what());
  }
  return r;
}

CompiledRequest build_fda_request(const FdaSearch& mapping, const Json& arguments, int limit) {
  std::set<std::string> bound;
  std::vector<std::string> clauses;
  for (const auto& [arg, field] : mapping.search_fields) {
    bound.insert(arg);
    if (!present(arguments, arg)) {
      throw Error(ErrorCode::kUnboundPlaceholder, "search field " + field + " needs argument '" + arg + "'");
    }
    const auto& v = arguments[arg];
    auto term = [&](const Json& item) {
      if (item.is_object() || item.is_array()) {
        throw Error(ErrorCode::kTypeMismatch, "argument '" + arg + "' must be scalar or a list of scalars");
      }
      return field + ":\"" + percent_encode(scalar_text(item)) + "\"";
    };
    if (v.is_array()) {
      if (v.empty()) throw Error(ErrorCode::kInvalidArgument, "argument '" + arg + "' is an empty list");
      std::string clause = "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) clause += "+OR+";
        clause += term(v[i]);
      }
      clauses.push_back(clause + ")");
    } else {
      clauses.push_back(term(v));
    }
  }
  reject_unbound(arguments, bound);
  if (clauses.empty()) throw Error(ErrorCode::kUnboundPlaceholder, "openFDA search needs at least one field");

  CompiledRequest req;
  req.service = Service::kOpenFda;
  req.path = mapping.endpoint;
  req.query = "search=";
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i) req.query += "+AND+";
    req.query += clauses[i];
  }
  req.query += "&limit=" + std::to_string(limit);
  req.projection = mapping.return_fields;
  return req;
}

CompiledRequest build_graphql_request(const GraphQlQuery& mapping, const Json& arguments) {
  std::map<std::string, std::string> arg_for_var;
  std::set<std::string> bound;
  for (const auto& [arg, var] : mapping.variable_bindings) {
    arg_for_var[var] = arg;
    bound.insert(arg);
  }
  reject_unbound(arguments, bound);

  Json variables = Json::object();
  for (const auto& v : graphql_variables(mapping.query_text)) {
    auto it = arg_for_var.find(v.name);
    if (it == arg_for_var.end()) {
      throw Error(ErrorCode::kUnboundPlaceholder, "query variable $" + v.name + " has no binding");
    }
    if (!present(arguments, it->second)) {
      if (v.non_null) {
        throw Error(ErrorCode::kUnboundPlaceholder,
                    "query variable $" + v.name + " needs argument '" + it->second + "'");
      }
      continue;
    }
    variables[v.name] = coerce_graphql(arguments[it->second], v.type, v.name);
  }

  CompiledRequest req;
  req.method = "POST";
  req.service = Service::kOpenTargets;
  req.path = "/api/v4/graphql";
  Json body = Json::object();
  body["query"] = mapping.query_text;
  body["variables"] = std::move(variables);
  req.body = body.dump();
  return req;
}

CompiledRequest build_rest_request(const RestCall& mapping, const Json& arguments) {
  std::set<std::string> bound;
  std::string path;
  const auto& tpl = mapping.endpoint_template;
  for (std::size_t i = 0; i < tpl.size();) {
    if (tpl[i] != '{') {
      path += tpl[i++];
      continue;
    }
    auto close = tpl.find('}', i);
    if (close == std::string::npos) throw Error(ErrorCode::kUnboundPlaceholder, "unterminated placeholder in " + tpl);
    auto name = tpl.substr(i + 1, close - i - 1);
    bound.insert(name);
    if (!present(arguments, name)) {
      throw Error(ErrorCode::kUnboundPlaceholder, "path placeholder {" + name + "} has no argument");
    }
    const auto& v = arguments[name];
    if (v.is_object() || v.is_array()) {
      throw Error(ErrorCode::kTypeMismatch, "path argument '" + name + "' must be scalar");
    }
    path += percent_encode(scalar_text(v));
    i = close + 1;
  }

  std::map<std::string, std::vector<std::string>> params;
  for (const auto& [k, v] : mapping.static_query) params[k].push_back(v);
  for (const auto& [arg, param] : mapping.query_bindings) {
    bound.insert(arg);
    if (!present(arguments, arg)) continue;
    const auto& v = arguments[arg];
    auto& slot = params[param];
    slot.clear();
    if (v.is_array()) {
      for (const auto& item : v) slot.push_back(scalar_text(item));
    } else if (v.is_object()) {
      throw Error(ErrorCode::kTypeMismatch, "query argument '" + arg + "' must be scalar or a list");
    } else {
      slot.push_back(scalar_text(v));
    }
  }
  reject_unbound(arguments, bound);

  CompiledRequest req;
  req.service = Service::kMonarch;
  req.path = std::move(path);
  for (const auto& [k, values] : params) {
    for (const auto& v : values) {
      if (!req.query.empty()) req.query += "&";
      req.query += percent_encode(k) + "=" + percent_encode(v);
    }
  }
  return req;
}

CompiledRequest compile_call(const ToolSpec& spec, const Json& arguments, int fda_limit) {
  if (const auto* f = std::get_if<FdaSearch>(&spec.mapping)) return build_fda_request(*f, arguments, fda_limit);
  if (const auto* g = std::get_if<GraphQlQuery>(&spec.mapping)) return build_graphql_request(*g, arguments);
  if (const auto* r = std::get_if<RestCall>(&spec.mapping)) return build_rest_request(*r, arguments);
  throw Error(ErrorCode::kPrecondition, "tool '" + spec.name + "' has no HTTP request form");
}

}  // namespace toolverse
