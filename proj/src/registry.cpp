#include "toolverse/registry.hpp"

#include <algorithm>
#include <set>

#include "toolverse/error.hpp"

namespace toolverse {

namespace {

ToolSpec make_special(std::string name, std::string description, std::vector<ArgSpec> args,
                      SpecialKind kind) {
  ToolSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.arguments = std::move(args);
  s.mapping = Special{kind};
  return s;
}

}  // namespace

const std::vector<ToolSpec>& special_tools() {
  static const std::vector<ToolSpec> kSpecials = {
      make_special("ToolRAG",
                   "Retrieve tools from the toolbox whose descriptions best match a stated "
                   "requirement. Use it when no available function fits the next action.",
                   {{"description", "A description of the capability the needed tool should have.",
                     ValueType::kString, true},
                    {"limit", "Maximum number of tools to retrieve.", ValueType::kInteger, false}},
                   SpecialKind::kToolRag),
      make_special("Finish",
                   "Terminate the reasoning process after the final answer has been given.", {},
                   SpecialKind::kFinish),
      make_special("GiveAnswer", "Give the final answer to the question and stop.",
                   {{"answer", "The final answer.", ValueType::kString, true}},
                   SpecialKind::kGiveAnswer),
      make_special("End",
                   "Submit a candidate final answer and end the reasoning process.",
                   {{"answer", "The candidate final answer.", ValueType::kString, true}},
                   SpecialKind::kEnd),
  };
  return kSpecials;
}

bool is_terminal_tool(std::string_view name) {
  return name == kFinish || name == kGiveAnswer || name == kEnd;
}

Registry::Registry() {
  for (const auto& s : special_tools()) {
    defaults_.push_back(s.name);
    specs_.emplace(s.name, s);
  }
}

void Registry::add(ToolSpec spec) {
  if (specs_.count(spec.name)) {
    throw Error(ErrorCode::kDuplicateName, "duplicate tool name '" + spec.name + "'");
  }
  auto report = validate_spec(spec);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw Error(ErrorCode::kSchemaViolation,
                "tool '" + spec.name + "': " + v.code + ": " + v.message);
  }
  if (spec.is_special()) {
    throw Error(ErrorCode::kSchemaViolation,
                "tool '" + spec.name + "': special tools are built in and cannot be loaded");
  }
  auto name = spec.name;
  specs_.emplace(std::move(name), std::move(spec));
}

const ToolSpec* Registry::find(std::string_view name) const {
  auto it = specs_.find(name);
  return it == specs_.end() ? nullptr : &it->second;
}

const ToolSpec& Registry::at(std::string_view name) const {
  const auto* s = find(name);
  if (!s) throw Error(ErrorCode::kUnknownTool, "unknown tool '" + std::string(name) + "'");
  return *s;
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& [name, _] : specs_) out.push_back(name);
  return out;
}

std::vector<std::string> Registry::api_tool_names() const {
  std::vector<std::string> out;
  for (const auto& [name, spec] : specs_) {
    if (!spec.is_special()) out.push_back(name);
  }
  return out;
}

Registry load_registry(const std::vector<std::filesystem::path>& paths) {
  Registry registry;
  for (const auto& path : paths) {
    Json doc;
    try {
      doc = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + ": malformed JSON: " + e.what());
    }
    try {
      registry.add(tool_spec_from_json(doc));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
  }
  return registry;
}

std::vector<std::filesystem::path> registry_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> paths;
  auto index_path = dir / "index.json";
  if (std::filesystem::exists(index_path)) {
    Json index;
    try {
      index = Json::parse(read_file(index_path));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::kSchemaViolation, index_path.string() + ": malformed JSON: " + e.what());
    }
    if (!index.is_array()) {
      throw Error(ErrorCode::kSchemaViolation, index_path.string() + ": index must be a JSON array");
    }
    for (const auto& entry : index) {
      if (!entry.is_string()) {
        throw Error(ErrorCode::kSchemaViolation, index_path.string() + ": index entries must be strings");
      }
      paths.push_back(dir / entry.get<std::string>());
    }
    return paths;
  }
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

Registry load_registry_index(const std::filesystem::path& index_path) {
  return load_registry(registry_files(index_path.parent_path()));
}

Registry load_registry_dir(const std::filesystem::path& dir) { return load_registry(registry_files(dir)); }

CorpusReport validate_registry_dir(const std::filesystem::path& dir) {
  CorpusReport report;
  std::map<std::string, std::string> seen;
  for (const auto& s : special_tools()) seen[s.name] = "(built-in)";
  report.valid = seen.size();
  report.total = seen.size();
  for (const auto& path : registry_files(dir)) {
    ++report.total;
    FileReport file;
    file.file = path.filename().string();
    try {
      auto spec = tool_spec_from_json(Json::parse(read_file(path)));
      file.tool = spec.name;
      auto v = validate_spec(spec);
      file.violations = v.violations;
      if (auto it = seen.find(spec.name); it != seen.end()) {
        file.violations.push_back({"duplicate_name", spec.name + " is already defined by " + it->second});
      } else {
        seen.emplace(spec.name, file.file);
      }
    } catch (const Json::parse_error& e) {
      file.violations.push_back({"malformed_json", e.what()});
    } catch (const Error& e) {
      file.violations.push_back({std::string(error_code_name(e.code())), e.what()});
    }
    if (file.violations.empty()) {
      ++report.valid;
    } else {
      report.invalid.push_back(std::move(file));
    }
  }
  return report;
}

void save_registry(const Registry& registry, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json index = Json::array();
  for (const auto& name : registry.api_tool_names()) {
    auto file = name + ".json";
    write_file(dir / file, tool_spec_to_json(registry.at(name)).dump(2) + "\n");
    index.push_back(file);
  }
  write_file(dir / "index.json", index.dump(2) + "\n");
}

Json registry_to_json(const Registry& registry) {
  Json docs = Json::array();
  for (const auto& name : registry.api_tool_names()) docs.push_back(tool_spec_to_json(registry.at(name)));
  return docs;
}

Registry registry_from_json(const Json& docs) {
  if (!docs.is_array()) throw Error(ErrorCode::kSchemaViolation, "registry document must be an array");
  Registry registry;
  for (const auto& d : docs) registry.add(tool_spec_from_json(d));
  return registry;
}

Registry subset_registry(const Registry& registry, const std::vector<std::string>& names) {
  Registry out;
  std::set<std::string> seen;
  for (const auto& n : names) {
    const auto& spec = registry.at(n);
    if (spec.is_special() || !seen.insert(n).second) continue;
    out.add(spec);
  }
  return out;
}

bool manifests_are_nested(const std::vector<std::vector<std::string>>& manifests) {
  for (std::size_t i = 1; i < manifests.size(); ++i) {
    std::set<std::string> larger(manifests[i].begin(), manifests[i].end());
    for (const auto& n : manifests[i - 1]) {
      if (!larger.count(n)) return false;
    }
  }
  return true;
}

}  // namespace toolverse
