#pragma once

#include <string>
#include <string_view>

#include "toolverse/util.hpp"

namespace toolverse {

struct FunctionCall {
  std::string call_id;
  std::string tool_name;
  Json arguments = Json::object();

  bool operator==(const FunctionCall&) const = default;
};

enum class ResultStatus { kOk, kEmpty, kError };
// kLocal marks special tools, which never leave the process.
enum class ResultSource { kLive, kFixture, kSimulated, kLocal };

std::string_view result_status_name(ResultStatus s) noexcept;
ResultStatus parse_result_status(std::string_view s);
std::string_view result_source_name(ResultSource s) noexcept;
ResultSource parse_result_source(std::string_view s);

struct ToolResult {
  std::string call_id;
  ResultStatus status = ResultStatus::kOk;
  Json payload;
  bool summarized = false;
  ResultSource source = ResultSource::kLocal;

  bool operator==(const ToolResult&) const = default;
};

// {"error": {"code", "message"[, "argument"]}}
ToolResult error_result(std::string call_id, std::string_view code, const std::string& message,
                        const std::string& argument = {}, ResultSource source = ResultSource::kLocal);

// {"id"?, "name", "arguments"}; the id is left out when with_id is false.
Json function_call_to_json(const FunctionCall& call, bool with_id = true);
FunctionCall function_call_from_json(const Json& doc);

// {"id", "status", "payload", "summarized"[, "source"]}
Json tool_result_to_json(const ToolResult& result, bool with_source = false);
ToolResult tool_result_from_json(const Json& doc);

// Payload as text: strings verbatim, everything else as compact JSON.
std::string payload_text(const Json& payload);

// Key-sorted dump of (tool, arguments), for duplicate detection.
std::string call_signature(const FunctionCall& call);

}  // namespace toolverse
