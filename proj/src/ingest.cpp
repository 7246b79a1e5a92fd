#include <algorithm>

#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"

namespace toolverse {

namespace {

std::string first_string(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) return {};
  const auto& v = doc[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array() && !v.empty() && v[0].is_string()) return v[0].get<std::string>();
  return {};
}

std::optional<int> year_of(const Json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (!v.is_string()) return std::nullopt;
  auto s = v.get<std::string>();
  if (s.size() < 4 || !std::all_of(s.begin(), s.begin() + 4, [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  return std::stoi(s.substr(0, 4));
}

}  // namespace

std::vector<DrugLabel> parse_fda_labels(const Json& doc) {
  const Json* records = &doc;
  if (doc.is_object() && doc.contains("results")) records = &doc["results"];
  if (!records->is_array()) throw Error(ErrorCode::kSchemaViolation, "label dump must be an array or {\"results\"}");
  std::vector<DrugLabel> labels;
  for (const auto& r : *records) {
    if (!r.is_object()) throw Error(ErrorCode::kSchemaViolation, "label record must be an object");
    DrugLabel l;
    l.set_id = first_string(r, "set_id");
    if (l.set_id.empty()) l.set_id = first_string(r, "id");
    const Json empty = Json::object();
    const Json& of = r.contains("openfda") ? r["openfda"] : empty;
    l.generic_name = first_string(of, "generic_name");
    l.brand_name = first_string(of, "brand_name");
    if (r.contains("approval_year")) l.approval_year = year_of(r["approval_year"]);
    if (r.contains("effective_time")) l.effective_year = year_of(r["effective_time"]);
    for (const auto& [key, value] : r.items()) {
      if (key == "openfda" || !value.is_array() || value.empty()) continue;
      std::string text;
      for (const auto& part : value) {
        if (!part.is_string()) continue;
        if (!text.empty()) text += "\n";
        text += part.get<std::string>();
      }
      if (!text.empty()) l.fields[key] = text;
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

std::vector<DrugLabel> load_fda_labels(const std::filesystem::path& path) {
  try {
    return parse_fda_labels(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

LeakageSplit apply_leakage_cutoff(std::vector<DrugLabel> labels, int cutoff_year) {
  LeakageSplit split;
  for (auto& l : labels) {
    auto year = l.approval_year ? l.approval_year : l.effective_year;
    (year && *year <= cutoff_year ? split.kept : split.removed).push_back(std::move(l));
  }
  return split;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::kParse, "unterminated quoted CSV field");
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Association> load_associations(const std::filesystem::path& path) {
  auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw Error(ErrorCode::kSchemaViolation, path.string() + ": empty CSV");
  auto column = [&](const char* name) -> std::size_t {
    const auto& header = rows.front();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (to_lower(trim(header[i])) == name) return i;
    }
    throw Error(ErrorCode::kSchemaViolation, path.string() + ": missing column '" + name + "'");
  };
  auto d = column("disease"), g = column("drug"), r = column("relation");
  std::vector<Association> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() <= std::max({d, g, r})) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + ": line " + std::to_string(i + 1) + " is short");
    }
    out.push_back({trim(row[d]), trim(row[g]), trim(row[r])});
  }
  return out;
}

std::pair<std::string, std::string> select_field(const DrugLabel& label, Rng& rng) {
  if (label.fields.empty()) throw Error(ErrorCode::kPrecondition, "label " + label.set_id + " has no fields");
  auto it = label.fields.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng.index(label.fields.size())));
  return *it;
}

std::vector<std::string> tools_for_field(const Registry& registry, const std::string& field) {
  std::vector<std::string> out;
  for (const auto& name : registry.api_tool_names()) {
    const auto* f = std::get_if<FdaSearch>(&registry.at(name).mapping);
    if (f && std::find(f->return_fields.begin(), f->return_fields.end(), field) != f->return_fields.end()) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace toolverse
