#include "toolverse/call.hpp"

#include "toolverse/error.hpp"

namespace toolverse {

std::string_view result_status_name(ResultStatus s) noexcept {
  switch (s) {
    case ResultStatus::kOk: return "ok";
    case ResultStatus::kEmpty: return "empty";
    case ResultStatus::kError: return "error";
  }
  return "error";
}

ResultStatus parse_result_status(std::string_view s) {
  if (s == "ok") return ResultStatus::kOk;
  if (s == "empty") return ResultStatus::kEmpty;
  if (s == "error") return ResultStatus::kError;
  throw Error(ErrorCode::kParse, "unknown result status '" + std::string(s) + "'");
}

std::string_view result_source_name(ResultSource s) noexcept {
  switch (s) {
    case ResultSource::kLive: return "live";
    case ResultSource::kFixture: return "fixture";
    case ResultSource::kSimulated: return "simulated";
    case ResultSource::kLocal: return "local";
  }
  return "local";
}

ResultSource parse_result_source(std::string_view s) {
  if (s == "live") return ResultSource::kLive;
  if (s == "fixture") return ResultSource::kFixture;
  if (s == "simulated") return ResultSource::kSimulated;
  if (s == "local") return ResultSource::kLocal;
  throw Error(ErrorCode::kParse, "unknown result source '" + std::string(s) + "'");
}

ToolResult error_result(std::string call_id, std::string_view code, const std::string& message,
                        const std::string& argument, ResultSource source) {
  Json err = Json::object();
  err["code"] = std::string(code);
  err["message"] = message;
  if (!argument.empty()) err["argument"] = argument;
  ToolResult r;
  r.call_id = std::move(call_id);
  r.status = ResultStatus::kError;
  r.payload = Json{{"error", err}};
  r.source = source;
  return r;
}

Json function_call_to_json(const FunctionCall& call, bool with_id) {
  Json out = Json::object();
  if (with_id) out["id"] = call.call_id;
  out["name"] = call.tool_name;
  out["arguments"] = call.arguments.is_null() ? Json::object() : call.arguments;
  return out;
}

FunctionCall function_call_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string()) {
    throw Error(ErrorCode::kParse, "function call must be an object with a string \"name\"");
  }
  FunctionCall call;
  call.tool_name = doc["name"].get<std::string>();
  if (doc.contains("id") && doc["id"].is_string()) call.call_id = doc["id"].get<std::string>();
  if (doc.contains("arguments")) {
    if (!doc["arguments"].is_object()) throw Error(ErrorCode::kParse, "\"arguments\" must be an object");
    call.arguments = doc["arguments"];
  }
  return call;
}

Json tool_result_to_json(const ToolResult& result, bool with_source) {
  Json out = Json::object();
  out["id"] = result.call_id;
  out["status"] = std::string(result_status_name(result.status));
  out["payload"] = result.payload;
  out["summarized"] = result.summarized;
  if (with_source) out["source"] = std::string(result_source_name(result.source));
  return out;
}

ToolResult tool_result_from_json(const Json& doc) {
  ToolResult r;
  try {
    r.call_id = doc.at("id").get<std::string>();
    r.status = parse_result_status(doc.at("status").get<std::string>());
    r.payload = doc.at("payload");
    r.summarized = doc.value("summarized", false);
    if (doc.contains("source")) r.source = parse_result_source(doc["source"].get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed tool result: ") + e.what());
  }
  return r;
}

std::string payload_text(const Json& payload) {
  if (payload.is_string()) return payload.get<std::string>();
  return payload.dump();
}

std::string call_signature(const FunctionCall& call) {
  return call.tool_name + "\n" + canonical_dump(call.arguments.is_null() ? Json::object() : call.arguments);
}

}  // namespace toolverse
