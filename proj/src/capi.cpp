#include "toolverse/toolverse.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "toolverse/app.hpp"
#include "toolverse/error.hpp"

using toolverse::Error;
using toolverse::ErrorCode;
using toolverse::Json;

struct tv_runtime {
  std::unique_ptr<toolverse::Runtime> impl;
};

namespace {

thread_local std::string last_error;

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename F>
tv_status guarded(F&& fn) {
  last_error.clear();
  try {
    fn();
    return TV_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<tv_status>(e.code());
  } catch (const Json::exception& e) {
    last_error = e.what();
    return TV_PARSE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TV_INTERNAL;
  }
}

Json parse_arg(const char* text) {
  if (!text || !*text) return Json::object();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("request is not valid JSON: ") + e.what());
  }
}

toolverse::ConfigMap resolve(const Json& options) {
  std::optional<std::filesystem::path> file;
  if (options.contains("config_file") && !options["config_file"].is_null()) {
    file = options["config_file"].get<std::string>();
  }
  toolverse::ConfigMap flags;
  if (options.contains("flags")) {
    for (const auto& [k, v] : options["flags"].items()) flags[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  auto env = options.value("env", true) ? toolverse::environment_snapshot() : toolverse::ConfigMap{};
  return toolverse::load_config(file, env, flags);
}

tv_status run(tv_runtime* rt, const char* command, const char* request, char** out) {
  return guarded([&] {
    if (!rt || !command || !out) throw Error(ErrorCode::kInvalidArgument, "null argument");
    *out = nullptr;
    auto result = toolverse::run_command(*rt->impl, command, parse_arg(request));
    *out = dup_string(result.dump());
  });
}

}  // namespace

extern "C" {

const char* tv_version(void) { return "0.1.0"; }

const char* tv_status_name(tv_status status) {
  static thread_local std::string name;
  name = std::string(toolverse::error_code_name(static_cast<ErrorCode>(status)));
  return name.c_str();
}

const char* tv_last_error(void) { return last_error.c_str(); }

void tv_string_free(char* s) { std::free(s); }

tv_status tv_config_resolve(const char* options, char** out_json) {
  return guarded([&] {
    if (!out_json) throw Error(ErrorCode::kInvalidArgument, "null argument");
    *out_json = nullptr;
    *out_json = dup_string(toolverse::redacted_config(resolve(parse_arg(options))).dump());
  });
}

tv_status tv_runtime_create(const char* options, tv_runtime** out) {
  return guarded([&] {
    if (!out) throw Error(ErrorCode::kInvalidArgument, "null argument");
    *out = nullptr;
    auto rt = std::make_unique<tv_runtime>();
    rt->impl = std::make_unique<toolverse::Runtime>(resolve(parse_arg(options)));
    *out = rt.release();
  });
}

void tv_runtime_destroy(tv_runtime* runtime) { delete runtime; }

const char* tv_command_list(void) {
  static const std::string list = [] {
    std::string s;
    for (const auto& n : toolverse::command_names()) s += (s.empty() ? "" : " ") + n;
    return s;
  }();
  return list.c_str();
}

tv_status tv_run(tv_runtime* runtime, const char* command, const char* request, char** out_json) {
  return run(runtime, command, request, out_json);
}

tv_status tv_tools_validate(tv_runtime* r, const char* q, char** o) { return run(r, "tools.validate", q, o); }
tv_status tv_tools_graph(tv_runtime* r, const char* q, char** o) { return run(r, "tools.graph", q, o); }
tv_status tv_tools_augment(tv_runtime* r, const char* q, char** o) { return run(r, "tools.augment", q, o); }
tv_status tv_index_build(tv_runtime* r, const char* q, char** o) { return run(r, "index.build", q, o); }
tv_status tv_ask(tv_runtime* r, const char* q, char** o) { return run(r, "ask", q, o); }
tv_status tv_eval(tv_runtime* r, const char* q, char** o) { return run(r, "eval", q, o); }
tv_status tv_smoke(tv_runtime* r, const char* q, char** o) { return run(r, "smoke", q, o); }

}  // extern "C"
