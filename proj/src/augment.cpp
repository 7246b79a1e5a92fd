#include "toolverse/augment.hpp"

#include "toolverse/error.hpp"

namespace toolverse {

namespace {

std::vector<std::string> string_list(const Json& doc, const char* key) {
  if (!doc.contains(key)) return {};
  if (!doc[key].is_array()) throw Error(ErrorCode::kSchemaViolation, std::string("\"") + key + "\" must be an array");
  return doc[key].get<std::vector<std::string>>();
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

template <typename Map>
Map rename_keys(const Map& in, const std::map<std::string, std::string>& renames) {
  Map out;
  for (const auto& [k, v] : in) {
    auto it = renames.find(k);
    out[it == renames.end() ? k : it->second] = v;
  }
  return out;
}

}  // namespace

RephrasePool rephrase_pool_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kSchemaViolation, "rephrase pool must be an object");
  RephrasePool pool;
  try {
    for (const auto& [tool, entry] : doc.items()) {
      ToolVariants v;
      v.names = string_list(entry, "names");
      v.descriptions = string_list(entry, "descriptions");
      if (entry.contains("arguments")) {
        for (const auto& [arg, fe] : entry["arguments"].items()) {
          v.arguments[arg] = FieldVariants{string_list(fe, "names"), string_list(fe, "descriptions")};
        }
      }
      pool[tool] = std::move(v);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed rephrase pool: ") + e.what());
  }
  return pool;
}

Json rephrase_pool_to_json(const RephrasePool& pool) {
  Json out = Json::object();
  for (const auto& [tool, v] : pool) {
    Json args = Json::object();
    for (const auto& [arg, fv] : v.arguments) args[arg] = Json{{"names", fv.names}, {"descriptions", fv.descriptions}};
    out[tool] = Json{{"names", v.names}, {"descriptions", v.descriptions}, {"arguments", args}};
  }
  return out;
}

RephrasePool load_rephrase_pool(const std::filesystem::path& path) {
  try {
    return rephrase_pool_from_json(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

bool NameRemap::identity() const {
  if (tool_from != tool_to) return false;
  for (const auto& [a, b] : arguments) {
    if (a != b) return false;
  }
  return true;
}

FunctionCall NameRemap::apply(const FunctionCall& call) const {
  FunctionCall out = call;
  if (call.tool_name != tool_from) return out;
  out.tool_name = tool_to;
  out.arguments = Json::object();
  for (const auto& [k, v] : call.arguments.items()) {
    auto it = arguments.find(k);
    out.arguments[it == arguments.end() ? k : it->second] = v;
  }
  return out;
}

FunctionCall NameRemap::invert(const FunctionCall& call) const {
  FunctionCall out = call;
  if (call.tool_name != tool_to) return out;
  std::map<std::string, std::string> back;
  for (const auto& [a, b] : arguments) back[b] = a;
  out.tool_name = tool_from;
  out.arguments = Json::object();
  for (const auto& [k, v] : call.arguments.items()) {
    auto it = back.find(k);
    out.arguments[it == back.end() ? k : it->second] = v;
  }
  return out;
}

ToolSpec rename_spec(const ToolSpec& spec, const NameRemap& remap) {
  ToolSpec out = spec;
  const auto& renames = remap.arguments;
  auto renamed = [&](const std::string& n) {
    auto it = renames.find(n);
    return it == renames.end() ? n : it->second;
  };
  for (auto& a : out.arguments) a.name = renamed(a.name);
  for (auto& r : out.undeclared_required) r = renamed(r);
  if (auto* f = std::get_if<FdaSearch>(&out.mapping)) {
    f->search_fields = rename_keys(f->search_fields, renames);
  } else if (auto* g = std::get_if<GraphQlQuery>(&out.mapping)) {
    g->variable_bindings = rename_keys(g->variable_bindings, renames);
  } else if (auto* r = std::get_if<RestCall>(&out.mapping)) {
    r->query_bindings = rename_keys(r->query_bindings, renames);
    // Two passes through unique markers so swapped names cannot clash.
    for (const auto& [from, to] : renames) {
      r->endpoint_template = replace_all(r->endpoint_template, "{" + from + "}", "{\x01" + to + "\x01}");
    }
    r->endpoint_template = replace_all(replace_all(r->endpoint_template, "{\x01", "{"), "\x01}", "}");
  }
  return out;
}

std::pair<ToolSpec, NameRemap> augment_tool_spec(const ToolSpec& spec, const RephrasePool& pool, std::uint64_t seed,
                                                 const std::set<std::string>& taken_names) {
  NameRemap remap;
  remap.tool_from = spec.name;
  remap.tool_to = spec.name;
  for (const auto& a : spec.arguments) remap.arguments[a.name] = a.name;

  auto it = pool.find(spec.name);
  if (it == pool.end()) {
    remap.flags.push_back("tool: no variants");
    return {spec, remap};
  }
  const auto& variants = it->second;
  Rng rng(derive_seed(seed, "augment:" + spec.name));
  auto pick = [&](const std::vector<std::string>& options) { return options[rng.index(options.size())]; };

  ToolSpec out = spec;
  if (variants.names.empty()) {
    remap.flags.push_back("name: no variants");
  } else {
    auto name = pick(variants.names);
    if (!is_identifier(name) || (name != spec.name && taken_names.count(name))) {
      remap.flags.push_back("name: rejected '" + name + "'");
    } else {
      remap.tool_to = name;
    }
  }
  if (variants.descriptions.empty()) {
    remap.flags.push_back("description: no variants");
  } else {
    out.description = pick(variants.descriptions);
  }

  std::set<std::string> used;
  for (const auto& a : spec.arguments) used.insert(a.name);
  std::vector<std::string> new_descriptions;
  for (const auto& a : spec.arguments) {
    auto fit = variants.arguments.find(a.name);
    std::string description = a.description;
    if (fit == variants.arguments.end()) {
      remap.flags.push_back("argument " + a.name + ": no variants");
      new_descriptions.push_back(description);
      continue;
    }
    if (fit->second.names.empty()) {
      remap.flags.push_back("argument " + a.name + ": no name variants");
    } else {
      auto name = pick(fit->second.names);
      if (name != a.name && (!is_identifier(name) || used.count(name))) {
        remap.flags.push_back("argument " + a.name + ": rejected '" + name + "'");
      } else {
        used.erase(a.name);
        used.insert(name);
        remap.arguments[a.name] = name;
      }
    }
    if (fit->second.descriptions.empty()) {
      remap.flags.push_back("argument " + a.name + ": no description variants");
    } else {
      description = pick(fit->second.descriptions);
    }
    new_descriptions.push_back(description);
  }

  out = rename_spec(out, remap);
  out.name = remap.tool_to;
  for (std::size_t i = 0; i < out.arguments.size(); ++i) out.arguments[i].description = new_descriptions[i];
  return {out, remap};
}

}  // namespace toolverse
