#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolverse/util.hpp"

namespace toolverse {

// Dotted key -> raw value, e.g. "chat.model" -> "gpt-4o".
using ConfigMap = std::map<std::string, std::string>;

struct ConfigKey {
  std::string_view key;
  std::string_view env;  // empty when the key has no variable
  std::string_view default_value;
  bool secret = false;   // settable from the environment only
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_config_key(std::string_view key);

inline constexpr std::string_view kDefaultConfigPath = "toolverse.toml";

// TOML-style subset: `[section]` headers, `key = value` lines, `#` comments,
// double-quoted or bare values. Keys come back dotted with their section.
// Throws Error(kParse) naming the line.
ConfigMap parse_config_text(std::string_view text);

// The known variables present in the process environment, keyed by variable.
ConfigMap environment_snapshot();

// defaults < file < env < flags. Unknown keys and secrets outside the
// environment throw Error(kInvalidArgument).
ConfigMap resolve_config(const ConfigMap& file, const ConfigMap& env_vars, const ConfigMap& flags);

// Reads the file at `path` (missing is fine unless `required`), then resolves.
ConfigMap load_config(const std::optional<std::filesystem::path>& path, const ConfigMap& env_vars,
                      const ConfigMap& flags);

// Secrets replaced by "***" when set.
Json redacted_config(const ConfigMap& config);

int config_int(const ConfigMap& config, const std::string& key);
std::uint64_t config_u64(const ConfigMap& config, const std::string& key);
bool config_bool(const ConfigMap& config, const std::string& key);
const std::string& config_str(const ConfigMap& config, const std::string& key);

}  // namespace toolverse
