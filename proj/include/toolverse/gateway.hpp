#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "toolverse/call.hpp"
#include "toolverse/http.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"
#include "toolverse/request_builder.hpp"

namespace toolverse {

enum class ExecMode { kLive, kFixture, kSimulated };
std::string_view exec_mode_name(ExecMode m) noexcept;
ExecMode parse_exec_mode(std::string_view s);

struct GatewayConfig {
  std::string fda_base = "https://api.fda.gov";
  std::string ot_base = "https://api.platform.opentargets.org";
  std::string monarch_base = "https://api-v3.monarchinitiative.org";
  std::string fda_api_key;  // appended only when sending
  int timeout_ms = 30000;
  int fda_limit = kDefaultFdaLimit;
  std::chrono::seconds cache_ttl{24 * 3600};
  RetryPolicy retry;
};

// Reads TOOLVERSE_FDA_BASE, TOOLVERSE_OT_BASE, TOOLVERSE_MONARCH_BASE,
// TOOLVERSE_HTTP_TIMEOUT_MS and TOOLVERSE_FDA_KEY over the defaults.
GatewayConfig gateway_config_from_env(GatewayConfig base = {});

// The full URL without credentials.
std::string request_url(const CompiledRequest& request, const GatewayConfig& config);
HttpRequest to_http_request(const CompiledRequest& request, const GatewayConfig& config);

struct RecordedResponse {
  int status = 0;
  std::string body;
};

// One JSON file per request: <dir>/<hash>.json holding
// {"request": CompiledRequest, "status": int, "body": raw text}.
class CassetteStore {
 public:
  explicit CassetteStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  [[nodiscard]] std::optional<RecordedResponse> find(const CompiledRequest& request) const;
  void record(const CompiledRequest& request, const RecordedResponse& response);
  [[nodiscard]] std::filesystem::path path_for(const CompiledRequest& request) const;
  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

// Per-API envelope rules deciding ok / empty / error and the payload kept.
struct Unwrapped {
  ResultStatus status = ResultStatus::kOk;
  Json payload;
};
Unwrapped unwrap_response(const CompiledRequest& request, const RecordedResponse& response);

// Top-k tool names for a requirement; backs the ToolRAG special tool.
using Retriever = std::function<std::vector<std::string>(const std::string& requirement, int k)>;

using Clock = std::function<std::chrono::steady_clock::time_point()>;

// The prompt used when a chat model stands in for a tool.
std::string llm_tool_prompt(const ToolSpec& spec, const FunctionCall& call);
ToolResult llm_simulate_tool(const ToolSpec& spec, const FunctionCall& call, ChatService& chat);

// Checks a call against its spec: missing required, unknown argument, type
// mismatch (numeric strings are coerced). Returns the coerced arguments or
// throws Error with the matching code; the message names the argument.
Json check_arguments(const ToolSpec& spec, const Json& arguments, std::string* bad_argument = nullptr);

struct GatewayOptions {
  ExecMode mode = ExecMode::kFixture;
  GatewayConfig config;
  HttpTransport* transport = nullptr;   // live mode
  CassetteStore* cassettes = nullptr;   // fixture mode; also written in live mode when record is set
  bool record = false;
  ChatService* simulator = nullptr;     // simulated mode and llm_simulated tools
  Retriever retriever;                  // ToolRAG
  int toolrag_k = 5;
  Sleeper sleep = real_sleeper();
  Clock clock = [] { return std::chrono::steady_clock::now(); };
};

// Executes function calls. Every failure comes back as a ToolResult with
// status error and payload {"error": {"code", "message", "argument"?}}.
// Safe for concurrent use.
class Gateway {
 public:
  Gateway(const Registry& registry, GatewayOptions options);

  ToolResult execute(const FunctionCall& call);

  [[nodiscard]] const Registry& registry() const { return registry_; }
  [[nodiscard]] ExecMode mode() const { return options_.mode; }
  [[nodiscard]] std::size_t network_requests() const;

 private:
  ToolResult run_special(const ToolSpec& spec, const FunctionCall& call, const Json& args);
  ToolResult run_http(const ToolSpec& spec, const FunctionCall& call, const Json& args);

  const Registry& registry_;
  GatewayOptions options_;

  struct CacheEntry {
    std::chrono::steady_clock::time_point stored;
    RecordedResponse response;
  };
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> cache_;
  std::size_t network_requests_ = 0;
};

ToolResult execute_call(const FunctionCall& call, const Registry& registry, HttpTransport& transport, ExecMode mode,
                        CassetteStore* cassettes = nullptr);

}  // namespace toolverse
