#include "toolverse/config.hpp"

#include <cstdlib>

#include "toolverse/error.hpp"

namespace toolverse {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"mode", "TOOLVERSE_MODE", "live"},
      {"seed", "TOOLVERSE_SEED", "0"},
      {"jobs", "TOOLVERSE_JOBS", "0"},
      {"chat.base_url", "TOOLVERSE_CHAT_BASE", ""},
      {"chat.model", "TOOLVERSE_CHAT_MODEL", ""},
      {"chat.api_key", "TOOLVERSE_CHAT_KEY", "", true},
      {"chat.script", "TOOLVERSE_CHAT_SCRIPT", ""},
      {"chat.max_in_flight", "", "8"},
      {"chat.timeout_ms", "", "120000"},
      {"embed.base_url", "TOOLVERSE_EMBED_BASE", ""},
      {"embed.model", "TOOLVERSE_EMBED_MODEL", ""},
      {"embed.api_key", "TOOLVERSE_EMBED_KEY", "", true},
      {"embed.dimension", "", "256"},
      {"fda.base_url", "TOOLVERSE_FDA_BASE", "https://api.fda.gov"},
      {"fda.api_key", "TOOLVERSE_FDA_KEY", "", true},
      {"fda.limit", "", "5"},
      {"opentargets.base_url", "TOOLVERSE_OT_BASE", "https://api.platform.opentargets.org"},
      {"monarch.base_url", "TOOLVERSE_MONARCH_BASE", "https://api-v3.monarchinitiative.org"},
      {"http.timeout_ms", "TOOLVERSE_HTTP_TIMEOUT_MS", "30000"},
      {"http.record", "", "false"},
      {"paths.specs", "TOOLVERSE_SPECS", "data/specs"},
      {"paths.cassettes", "TOOLVERSE_CASSETTES", "data/cassettes"},
      {"paths.index", "", "data/index"},
      {"paths.traces", "", "traces"},
      {"paths.rephrase", "", ""},
      {"agent.max_steps", "", "30"},
      {"agent.summarize_threshold_chars", "", "2048"},
      {"agent.toolrag_k", "", "5"},
      {"agent.thought_mode", "", "with_thoughts"},
      {"agent.timeout_ms", "", "300000"},
      {"eval.item_timeout_ms", "", "300000"},
      {"datagen.max_steps", "", "15"},
      {"datagen.max_wrong_answers", "", "2"},
      {"datagen.extra_tools", "", "3"},
      {"datagen.context_limit_chars", "", "0"},
      {"datagen.leakage_cutoff_year", "", "2023"},
  };
  return keys;
}

const ConfigKey* find_config_key(std::string_view key) {
  for (const auto& k : config_keys()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::string section;
  int line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(line_no) + ": " + what);
    };
    std::string line = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail("unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

ConfigMap environment_snapshot() {
  ConfigMap out;
  for (const auto& k : config_keys()) {
    if (k.env.empty()) continue;
    if (const char* v = std::getenv(std::string(k.env).c_str())) out[std::string(k.env)] = v;
  }
  return out;
}

ConfigMap resolve_config(const ConfigMap& file, const ConfigMap& env_vars, const ConfigMap& flags) {
  ConfigMap out;
  for (const auto& k : config_keys()) out[std::string(k.key)] = std::string(k.default_value);
  auto apply = [&](const ConfigMap& layer, const char* origin) {
    for (const auto& [key, value] : layer) {
      const auto* k = find_config_key(key);
      if (!k) throw Error(ErrorCode::kInvalidArgument, std::string("unknown config key '") + key + "' in " + origin);
      if (k->secret) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("'") + key + "' is a secret and can only be set through " + std::string(k->env));
      }
      out[key] = value;
    }
  };
  apply(file, "config file");
  for (const auto& k : config_keys()) {
    if (k.env.empty()) continue;
    if (auto it = env_vars.find(std::string(k.env)); it != env_vars.end()) out[std::string(k.key)] = it->second;
  }
  apply(flags, "flags");
  return out;
}

ConfigMap load_config(const std::optional<std::filesystem::path>& path, const ConfigMap& env_vars,
                      const ConfigMap& flags) {
  ConfigMap file;
  if (path) {
    if (!std::filesystem::exists(*path)) throw Error(ErrorCode::kIo, "config file " + path->string() + " not found");
    file = parse_config_text(read_file(*path));
  } else if (std::filesystem::exists(kDefaultConfigPath)) {
    file = parse_config_text(read_file(kDefaultConfigPath));
  }
  return resolve_config(file, env_vars, flags);
}

Json redacted_config(const ConfigMap& config) {
  Json out = Json::object();
  for (const auto& [key, value] : config) {
    const auto* k = find_config_key(key);
    out[key] = k && k->secret && !value.empty() ? "***" : value;
  }
  return out;
}

const std::string& config_str(const ConfigMap& config, const std::string& key) {
  auto it = config.find(key);
  if (it == config.end()) throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' is not set");
  return it->second;
}

int config_int(const ConfigMap& config, const std::string& key) {
  const auto& v = config_str(config, key);
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' must be an integer, got '" + v + "'");
}

std::uint64_t config_u64(const ConfigMap& config, const std::string& key) {
  const auto& v = config_str(config, key);
  try {
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used == v.size() && (v.empty() || v[0] != '-')) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' must be a non-negative integer, got '" + v + "'");
}

bool config_bool(const ConfigMap& config, const std::string& key) {
  auto v = to_lower(config_str(config, key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
  throw Error(ErrorCode::kInvalidArgument, "config key '" + key + "' must be true or false");
}

}  // namespace toolverse
