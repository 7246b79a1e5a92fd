#include "toolverse/gateway.hpp"

#include <cmath>
#include <cstdlib>

#include "toolverse/error.hpp"

namespace toolverse {

std::string_view exec_mode_name(ExecMode m) noexcept {
  switch (m) {
    case ExecMode::kLive: return "live";
    case ExecMode::kFixture: return "fixture";
    case ExecMode::kSimulated: return "simulated";
  }
  return "fixture";
}

ExecMode parse_exec_mode(std::string_view s) {
  if (s == "live") return ExecMode::kLive;
  if (s == "fixture") return ExecMode::kFixture;
  if (s == "simulated") return ExecMode::kSimulated;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(s) + "' (live|fixture|simulated)");
}

GatewayConfig gateway_config_from_env(GatewayConfig base) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("TOOLVERSE_FDA_BASE")) base.fda_base = *v;
  if (auto v = env("TOOLVERSE_OT_BASE")) base.ot_base = *v;
  if (auto v = env("TOOLVERSE_MONARCH_BASE")) base.monarch_base = *v;
  if (auto v = env("TOOLVERSE_FDA_KEY")) base.fda_api_key = *v;
  if (auto v = env("TOOLVERSE_HTTP_TIMEOUT_MS")) {
    try {
      base.timeout_ms = std::stoi(*v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "TOOLVERSE_HTTP_TIMEOUT_MS must be an integer");
    }
  }
  return base;
}

namespace {

std::string strip_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

const std::string& base_for(Service s, const GatewayConfig& c) {
  switch (s) {
    case Service::kOpenFda: return c.fda_base;
    case Service::kOpenTargets: return c.ot_base;
    case Service::kMonarch: return c.monarch_base;
  }
  return c.fda_base;
}

}  // namespace

std::string request_url(const CompiledRequest& request, const GatewayConfig& config) {
  auto url = strip_slash(base_for(request.service, config)) + request.path;
  if (!request.query.empty()) url += "?" + request.query;
  return url;
}

HttpRequest to_http_request(const CompiledRequest& request, const GatewayConfig& config) {
  HttpRequest out;
  out.method = request.method;
  out.url = request_url(request, config);
  if (request.service == Service::kOpenFda && !config.fda_api_key.empty()) {
    out.url += (request.query.empty() ? "?" : "&") + std::string("api_key=") + percent_encode(config.fda_api_key);
  }
  out.headers["Accept"] = request.accept;
  out.body = request.body;
  if (request.method == "POST") out.content_type = "application/json";
  out.timeout_ms = config.timeout_ms;
  return out;
}

std::filesystem::path CassetteStore::path_for(const CompiledRequest& request) const {
  return dir_ / (request.hash() + ".json");
}

std::optional<RecordedResponse> CassetteStore::find(const CompiledRequest& request) const {
  auto path = path_for(request);
  std::lock_guard lock(mu_);
  if (!std::filesystem::exists(path)) return std::nullopt;
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  if (!doc.contains("request") || CompiledRequest::from_json(doc["request"]) != request) return std::nullopt;
  RecordedResponse r;
  r.status = doc.value("status", 0);
  const auto& body = doc.at("body");
  r.body = body.is_string() ? body.get<std::string>() : body.dump();
  return r;
}

void CassetteStore::record(const CompiledRequest& request, const RecordedResponse& response) {
  Json doc = Json::object();
  doc["request"] = request.to_json();
  doc["status"] = response.status;
  doc["body"] = response.body;
  std::lock_guard lock(mu_);
  write_file(path_for(request), doc.dump(2) + "\n");
}

namespace {

const Json* lookup_path(const Json& record, const std::string& dotted) {
  const Json* cur = &record;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted.find('.', start);
    auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

bool has_rows(const Json& node, bool& saw_array) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) {
      if ((k == "rows" || k == "hits") && v.is_array()) {
        saw_array = true;
        if (!v.empty()) return true;
      } else if (has_rows(v, saw_array)) {
        return true;
      }
    }
  } else if (node.is_array()) {
    for (const auto& v : node) {
      if (has_rows(v, saw_array)) return true;
    }
  }
  return false;
}

Unwrapped error_unwrapped(std::string_view code, const std::string& message) {
  Unwrapped u;
  u.status = ResultStatus::kError;
  u.payload = Json{{"error", Json{{"code", std::string(code)}, {"message", message}}}};
  return u;
}

Unwrapped unwrap_fda(const CompiledRequest& request, const Json& doc) {
  Unwrapped u;
  u.payload = Json::array();
  if (!doc.contains("results") || !doc["results"].is_array()) {
    u.status = ResultStatus::kEmpty;
    return u;
  }
  for (const auto& rec : doc["results"]) {
    Json kept = Json::object();
    for (const auto& field : request.projection) {
      if (const auto* v = lookup_path(rec, field)) kept[field] = *v;
    }
    if (request.projection.empty()) kept = rec;
    if (!kept.empty()) u.payload.push_back(std::move(kept));
  }
  u.status = u.payload.empty() ? ResultStatus::kEmpty : ResultStatus::kOk;
  return u;
}

Unwrapped unwrap_open_targets(const Json& doc) {
  const bool has_errors = doc.contains("errors") && doc["errors"].is_array() && !doc["errors"].empty();
  const bool no_data = !doc.contains("data") || doc["data"].is_null();
  if (has_errors && no_data) return error_unwrapped("upstream_error", doc["errors"].dump());
  Unwrapped u;
  if (no_data) {
    u.status = ResultStatus::kEmpty;
    u.payload = Json();
    return u;
  }
  u.payload = doc["data"];
  bool any_value = false;
  if (u.payload.is_object()) {
    for (const auto& [_, v] : u.payload.items()) any_value = any_value || !v.is_null();
  } else {
    any_value = true;
  }
  bool saw_array = false;
  bool rows = has_rows(u.payload, saw_array);
  if (!any_value || (saw_array && !rows)) u.status = ResultStatus::kEmpty;
  return u;
}

Unwrapped unwrap_monarch(const Json& doc) {
  Unwrapped u;
  u.payload = doc;
  if (doc.is_object() && doc.contains("items") && doc["items"].is_array()) {
    u.status = doc["items"].empty() ? ResultStatus::kEmpty : ResultStatus::kOk;
  } else if (doc.is_array()) {
    u.status = doc.empty() ? ResultStatus::kEmpty : ResultStatus::kOk;
  } else if (doc.is_null() || (doc.is_object() && doc.empty())) {
    u.status = ResultStatus::kEmpty;
  }
  return u;
}

}  // namespace

Unwrapped unwrap_response(const CompiledRequest& request, const RecordedResponse& response) {
  if (response.status == 404 && request.service != Service::kOpenTargets) {
    Unwrapped u;
    u.status = ResultStatus::kEmpty;
    u.payload = Json::array();
    return u;
  }
  if (response.status < 200 || response.status >= 300) {
    return error_unwrapped("http_error", "upstream returned HTTP " + std::to_string(response.status));
  }
  Json doc;
  try {
    doc = Json::parse(response.body);
  } catch (const Json::parse_error& e) {
    return error_unwrapped("parse", std::string("upstream body is not JSON: ") + e.what());
  }
  switch (request.service) {
    case Service::kOpenFda: return unwrap_fda(request, doc);
    case Service::kOpenTargets: return unwrap_open_targets(doc);
    case Service::kMonarch: return unwrap_monarch(doc);
  }
  return error_unwrapped("internal", "unknown service");
}

std::string llm_tool_prompt(const ToolSpec& spec, const FunctionCall& call) {
  const auto args = call.arguments.is_null() ? Json::object() : call.arguments;
  return "You are a function that answers the questions based on your given description and given input. "
         "Do not answer questions that you don't have knowledge about.\n\n"
         "Here is your definition: " +
         tool_description_json(spec).dump() + ".\n\nHere is the input to the function:" + args.dump() +
         ".\n\nThe tool response:";
}

ToolResult llm_simulate_tool(const ToolSpec& spec, const FunctionCall& call, ChatService& chat) {
  ChatRequest req;
  req.messages.push_back({Role::kUser, llm_tool_prompt(spec, call)});
  ToolResult r;
  r.call_id = call.call_id;
  r.source = ResultSource::kSimulated;
  try {
    auto text = chat.chat(req);
    r.payload = text;
    r.status = trim(text).empty() ? ResultStatus::kEmpty : ResultStatus::kOk;
  } catch (const Error& e) {
    return error_result(call.call_id, error_code_name(e.code()), e.what(), {}, ResultSource::kSimulated);
  }
  return r;
}

namespace {

std::optional<Json> coerce_argument(const Json& v, ValueType type) {
  if (value_matches_type(v, type)) return v;
  switch (type) {
    case ValueType::kInteger:
      if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isfinite(d) && std::floor(d) == d) return static_cast<std::int64_t>(d);
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
      return std::nullopt;
    case ValueType::kNumber:
      if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        try {
          std::size_t used = 0;
          auto d = std::stod(s, &used);
          if (used == s.size() && std::isfinite(d)) return d;
        } catch (const std::exception&) {
        }
      }
      return std::nullopt;
    case ValueType::kBoolean:
      if (v == "true") return true;
      if (v == "false") return false;
      return std::nullopt;
    case ValueType::kString:
      if (v.is_number()) return v.dump();
      return std::nullopt;
    case ValueType::kStringList:
      if (v.is_string()) return Json::array({v});
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

Json check_arguments(const ToolSpec& spec, const Json& arguments, std::string* bad_argument) {
  auto fail = [&](ErrorCode code, const std::string& arg, const std::string& message) -> Json {
    if (bad_argument) *bad_argument = arg;
    throw Error(code, message);
  };
  if (!arguments.is_null() && !arguments.is_object()) fail(ErrorCode::kTypeMismatch, "", "arguments must be an object");
  const Json args = arguments.is_null() ? Json::object() : arguments;
  for (const auto& a : spec.arguments) {
    if (a.required && (!args.contains(a.name) || args[a.name].is_null())) {
      fail(ErrorCode::kMissingArgument, a.name, "missing required argument '" + a.name + "' for " + spec.name);
    }
  }
  for (const auto& [name, _] : args.items()) {
    if (!spec.find_argument(name)) {
      fail(ErrorCode::kInvalidArgument, name, "unknown argument '" + name + "' for " + spec.name);
    }
  }
  Json out = Json::object();
  for (const auto& a : spec.arguments) {
    if (!args.contains(a.name) || args[a.name].is_null()) continue;
    auto coerced = coerce_argument(args[a.name], a.value_type);
    if (!coerced) {
      fail(ErrorCode::kTypeMismatch, a.name,
           "argument '" + a.name + "' expects " + std::string(value_type_name(a.value_type)) + ", got " +
               args[a.name].dump());
    }
    out[a.name] = *coerced;
  }
  return out;
}

Gateway::Gateway(const Registry& registry, GatewayOptions options)
    : registry_(registry), options_(std::move(options)) {}

std::size_t Gateway::network_requests() const {
  std::lock_guard lock(mu_);
  return network_requests_;
}

ToolResult Gateway::execute(const FunctionCall& call) {
  const auto* spec = registry_.find(call.tool_name);
  if (!spec) {
    return error_result(call.call_id, error_code_name(ErrorCode::kUnknownTool),
                        "unknown tool '" + call.tool_name + "'");
  }
  Json args;
  std::string bad;
  try {
    args = check_arguments(*spec, call.arguments, &bad);
  } catch (const Error& e) {
    return error_result(call.call_id, error_code_name(e.code()), e.what(), bad);
  }
  if (spec->is_special()) return run_special(*spec, call, args);

  const bool simulate = std::holds_alternative<LlmSimulated>(spec->mapping) || options_.mode == ExecMode::kSimulated;
  if (simulate) {
    if (!options_.simulator) {
      return error_result(call.call_id, error_code_name(ErrorCode::kPrecondition),
                          "no chat service configured to simulate '" + spec->name + "'", {},
                          ResultSource::kSimulated);
    }
    FunctionCall coerced = call;
    coerced.arguments = args;
    return llm_simulate_tool(*spec, coerced, *options_.simulator);
  }
  return run_http(*spec, call, args);
}

ToolResult Gateway::run_special(const ToolSpec& spec, const FunctionCall& call, const Json& args) {
  ToolResult r;
  r.call_id = call.call_id;
  r.source = ResultSource::kLocal;
  const auto kind = std::get<Special>(spec.mapping).builtin;
  if (kind == SpecialKind::kToolRag) {
    if (!options_.retriever) {
      return error_result(call.call_id, error_code_name(ErrorCode::kPrecondition), "ToolRAG has no retriever");
    }
    int k = args.contains("limit") ? args["limit"].get<int>() : options_.toolrag_k;
    if (k < 1) return error_result(call.call_id, error_code_name(ErrorCode::kInvalidArgument), "limit must be >= 1", "limit");
    try {
      auto names = options_.retriever(args.at("description").get<std::string>(), k);
      r.payload = names;
      r.status = names.empty() ? ResultStatus::kEmpty : ResultStatus::kOk;
    } catch (const Error& e) {
      return error_result(call.call_id, error_code_name(e.code()), e.what());
    }
    return r;
  }
  r.payload = Json{{"terminal", true}};
  if (args.contains("answer")) r.payload["answer"] = args["answer"];
  return r;
}

ToolResult Gateway::run_http(const ToolSpec& spec, const FunctionCall& call, const Json& args) {
  const auto source = options_.mode == ExecMode::kLive ? ResultSource::kLive : ResultSource::kFixture;
  CompiledRequest request;
  try {
    request = compile_call(spec, args, options_.config.fda_limit);
  } catch (const Error& e) {
    return error_result(call.call_id, error_code_name(e.code()), e.what(), {}, source);
  }
  const auto key = request.hash();

  std::optional<RecordedResponse> response;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      if (options_.clock() - it->second.stored <= options_.config.cache_ttl) {
        response = it->second.response;
      } else {
        cache_.erase(it);
      }
    }
  }

  if (!response) {
    if (options_.mode == ExecMode::kFixture) {
      if (!options_.cassettes) {
        return error_result(call.call_id, error_code_name(ErrorCode::kPrecondition), "no cassette directory", {},
                            source);
      }
      try {
        response = options_.cassettes->find(request);
      } catch (const Error& e) {
        return error_result(call.call_id, error_code_name(e.code()), e.what(), {}, source);
      }
      if (!response) {
        return error_result(call.call_id, error_code_name(ErrorCode::kIo),
                            "no recorded response for request " + key + " (" + request.serialize() + ")", {}, source);
      }
    } else {
      if (!options_.transport) {
        return error_result(call.call_id, error_code_name(ErrorCode::kPrecondition), "no HTTP transport", {}, source);
      }
      try {
        {
          std::lock_guard lock(mu_);
          ++network_requests_;
        }
        auto http = send_with_retry(*options_.transport, to_http_request(request, options_.config),
                                    options_.config.retry, options_.sleep);
        response = RecordedResponse{http.status, http.body};
      } catch (const TransportError& e) {
        return error_result(call.call_id, error_code_name(ErrorCode::kTransport), e.what(), {}, source);
      }
      if (options_.record && options_.cassettes) options_.cassettes->record(request, *response);
    }
    std::lock_guard lock(mu_);
    cache_[key] = CacheEntry{options_.clock(), *response};
  }

  auto unwrapped = unwrap_response(request, *response);
  ToolResult r;
  r.call_id = call.call_id;
  r.status = unwrapped.status;
  r.payload = std::move(unwrapped.payload);
  r.source = source;
  return r;
}

ToolResult execute_call(const FunctionCall& call, const Registry& registry, HttpTransport& transport, ExecMode mode,
                        CassetteStore* cassettes) {
  GatewayOptions opts;
  opts.mode = mode;
  opts.config = gateway_config_from_env();
  opts.transport = &transport;
  opts.cassettes = cassettes;
  Gateway gw(registry, std::move(opts));
  return gw.execute(call);
}

}  // namespace toolverse
