#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "toolverse/tool_spec.hpp"

namespace toolverse {

inline constexpr std::string_view kToolRag = "ToolRAG";
inline constexpr std::string_view kFinish = "Finish";
inline constexpr std::string_view kGiveAnswer = "GiveAnswer";
inline constexpr std::string_view kEnd = "End";

// The four built-in tools, in P_0 order.
const std::vector<ToolSpec>& special_tools();

// True for Finish, GiveAnswer and End.
bool is_terminal_tool(std::string_view name);

// Name -> spec map plus the default tool list. Populate with add(), then
// share as const; const access is safe from any thread.
class Registry {
 public:
  // A registry holding only the special tools.
  Registry();

  // Throws Error(kDuplicateName) if the name is taken and
  // Error(kSchemaViolation) if validate_spec reports anything.
  void add(ToolSpec spec);

  [[nodiscard]] const ToolSpec* find(std::string_view name) const;
  [[nodiscard]] const ToolSpec& at(std::string_view name) const;
  [[nodiscard]] bool contains(std::string_view name) const { return find(name) != nullptr; }
  [[nodiscard]] std::size_t size() const { return specs_.size(); }
  [[nodiscard]] const std::vector<std::string>& default_tools() const { return defaults_; }

  // All names, sorted.
  [[nodiscard]] std::vector<std::string> names() const;
  // Names of non-special tools, sorted.
  [[nodiscard]] std::vector<std::string> api_tool_names() const;

  bool operator==(const Registry&) const = default;

 private:
  std::map<std::string, ToolSpec, std::less<>> specs_;
  std::vector<std::string> defaults_;
};

Registry load_registry(const std::vector<std::filesystem::path>& paths);

// Index file: JSON array of paths relative to the index's directory.
Registry load_registry_index(const std::filesystem::path& index_path);

// Uses <dir>/index.json when present, otherwise every *.json file in `dir`.
Registry load_registry_dir(const std::filesystem::path& dir);

// The tool documents of a registry directory: the entries of index.json, or
// every *.json file sorted by name.
std::vector<std::filesystem::path> registry_files(const std::filesystem::path& dir);

struct FileReport {
  std::string file;
  std::string tool;  // empty when the document did not parse
  std::vector<Violation> violations;
};

// Counts include the built-in tools.
struct CorpusReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  std::vector<FileReport> invalid;
};

// Checks every document without stopping at the first bad one.
CorpusReport validate_registry_dir(const std::filesystem::path& dir);

// One document per non-special tool plus index.json.
void save_registry(const Registry& registry, const std::filesystem::path& dir);

// JSON array of every non-special tool document, sorted by name.
Json registry_to_json(const Registry& registry);
Registry registry_from_json(const Json& docs);

// Keeps the special tools plus the listed names.
Registry subset_registry(const Registry& registry, const std::vector<std::string>& names);

// True when every manifest in the list contains all names of the previous one.
bool manifests_are_nested(const std::vector<std::vector<std::string>>& manifests);

}  // namespace toolverse
