#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toolverse/call.hpp"
#include "toolverse/tool_spec.hpp"

namespace toolverse {

struct FieldVariants {
  std::vector<std::string> names;
  std::vector<std::string> descriptions;
};

struct ToolVariants {
  std::vector<std::string> names;
  std::vector<std::string> descriptions;
  std::map<std::string, FieldVariants> arguments;
};

// Precomputed rewrites, keyed by original tool name. Sidecar format:
// {tool: {"names": [...], "descriptions": [...],
//         "arguments": {arg: {"names": [...], "descriptions": [...]}}}}
using RephrasePool = std::map<std::string, ToolVariants>;

RephrasePool rephrase_pool_from_json(const Json& doc);
Json rephrase_pool_to_json(const RephrasePool& pool);
RephrasePool load_rephrase_pool(const std::filesystem::path& path);

// Old -> new names for one tool and its arguments.
struct NameRemap {
  std::string tool_from;
  std::string tool_to;
  std::map<std::string, std::string> arguments;
  // Fields left unchanged, e.g. "description: no variants".
  std::vector<std::string> flags;

  [[nodiscard]] bool identity() const;
  // Renames a call written against the original spec.
  [[nodiscard]] FunctionCall apply(const FunctionCall& call) const;
  // Renames a call written against the augmented spec back.
  [[nodiscard]] FunctionCall invert(const FunctionCall& call) const;
};

// Picks one rewrite per field with an RNG seeded from (seed, tool name).
// Mapping keys and path placeholders follow argument renames, so the compiled
// request is unchanged. A rewrite that is not an identifier, or that collides
// with another argument or with `taken_names`, is skipped and flagged.
std::pair<ToolSpec, NameRemap> augment_tool_spec(const ToolSpec& spec, const RephrasePool& pool, std::uint64_t seed,
                                                 const std::set<std::string>& taken_names = {});

// The spec with its arguments renamed per `remap`; no other field changes.
ToolSpec rename_spec(const ToolSpec& spec, const NameRemap& remap);

}  // namespace toolverse
