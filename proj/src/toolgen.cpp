#include <algorithm>
#include <set>

#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"
#include "toolverse/request_builder.hpp"

namespace toolverse {

std::optional<bool> parse_pass_fail(std::string_view reply) {
  auto words = word_tokens(reply);
  if (words.empty()) return std::nullopt;
  if (words.front() == "pass") return true;
  if (words.front() == "fail") return false;
  return std::nullopt;
}

std::string_view api_family_name(ApiFamily f) noexcept {
  switch (f) {
    case ApiFamily::kOpenFda: return "openfda";
    case ApiFamily::kOpenTargets: return "opentargets";
    case ApiFamily::kMonarch: return "monarch";
  }
  return "openfda";
}

ApiFamily parse_api_family(std::string_view s) {
  for (auto f : {ApiFamily::kOpenFda, ApiFamily::kOpenTargets, ApiFamily::kMonarch}) {
    if (api_family_name(f) == s) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown API family '" + std::string(s) + "'");
}

std::string summarizer_prompt(const std::string& api_schema, const std::string& database_name) {
  return api_schema + "\n\nUsing the provided " + database_name +
         " API Schema, generate all possible specific functional commands in words with no code. Output them in "
         "a list.";
}

std::vector<std::string> parse_capability_list(std::string_view text) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& raw : split_lines(text)) {
    auto line = trim(raw);
    std::size_t i = 0;
    while (i < line.size() && (std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.' ||
                               line[i] == ')' || line[i] == '-' || line[i] == '*' || line[i] == ' ')) {
      ++i;
    }
    line = trim(line.substr(i));
    while (!line.empty() && line.back() == '.') line.pop_back();
    if (line.empty()) continue;
    if (seen.insert(to_lower(line)).second) out.push_back(line);
  }
  return out;
}

std::vector<std::string> summarize_api_capabilities(const std::string& api_docs, const std::string& database_name,
                                                    ChatService& chat) {
  if (trim(api_docs).empty()) throw Error(ErrorCode::kInvalidArgument, "empty API documentation");
  ChatRequest req;
  req.messages.push_back({Role::kUser, summarizer_prompt(api_docs, database_name)});
  return parse_capability_list(chat.chat(req));
}

namespace {

constexpr std::string_view kToolDocFormat =
    "\n\nReturn the functions as a JSON array. Each element has \"name\", \"description\", \"category\", "
    "\"parameter\" ({\"type\": \"object\", \"properties\": {arg: {\"type\", \"description\"}}, \"required\": [...]}) "
    "and \"mapping\".";

}  // namespace

std::string tool_generator_prompt(ApiFamily family, const std::string& api_docs, const std::string& capability) {
  if (family == ApiFamily::kOpenFda) {
    return "You are a helpful assistant for generating functions based on the field descriptions and API schema "
           "of openFDA:\n" +
           api_docs +
           "\nGuidelines:\n"
           "- Generate two functions: one function retrieves the drug name based on the field information, and "
           "the other function retrieves information for that field based on drug names.\n"
           "- Align the function with the expected fields and descriptions.\n"
           "- Each function must be unique and different from existing examples.\n"
           "- Fields should contain search_fields and return_fields:\n"
           "  - search_fields is a dict, where the keys are the function input parameters and the values are the "
           "fields to be searched.\n"
           "  - return_fields is a list of field names from which information must be returned.\n"
           "The capabilities of the functions should be related to the given capabilities: " +
           capability + std::string(kToolDocFormat) +
           " Use {\"kind\": \"fda_search\", \"search_fields\": {...}, \"return_fields\": [...]} as the mapping.";
  }
  std::string name = family == ApiFamily::kOpenTargets ? "OpenTarget" : "Monarch";
  std::string mapping = family == ApiFamily::kOpenTargets
                            ? " Use {\"kind\": \"graphql\", \"query_text\": ..., \"variable_bindings\": {...}} as the "
                              "mapping."
                            : " Use {\"kind\": \"rest\", \"endpoint_template\": ..., \"query_bindings\": {...}} as "
                              "the mapping.";
  return "You are a helpful assistant for generating functions based on the " + name + " API schema:\n" + api_docs +
         "\nGuidelines for the generated function:\n"
         "- The function should align with the schema's functional and structural requirements.\n"
         "- The function's name, description, input parameters, and schema should be unique and different from "
         "the existing example functions.\n"
         "- The function capabilities should be related to the given capabilities: " +
         capability + std::string(kToolDocFormat) + mapping;
}

namespace {

std::optional<std::vector<Json>> candidate_docs(const std::string& reply) {
  auto doc = find_json_value(reply);
  if (!doc) return std::nullopt;
  if (doc->is_object()) return std::vector<Json>{*doc};
  if (!doc->is_array()) return std::nullopt;
  return std::vector<Json>(doc->begin(), doc->end());
}

}  // namespace

ToolGenResult generate_tool_spec(const std::string& capability, const std::string& api_docs, ApiFamily family,
                                 ChatService& chat) {
  ChatRequest req;
  req.messages.push_back({Role::kUser, tool_generator_prompt(family, api_docs, capability)});
  ToolGenResult out;
  std::optional<std::vector<Json>> docs;
  for (int attempt = 0; attempt < 2 && !docs; ++attempt) docs = candidate_docs(chat.chat(req));
  if (!docs) {
    out.dropped.push_back(capability + ": unparseable generation");
    return out;
  }
  if (docs->empty()) {
    out.dropped.push_back(capability + ": no mappable fields");
    return out;
  }
  for (const auto& d : *docs) {
    ToolSpec spec;
    try {
      spec = tool_spec_from_json(d);
    } catch (const Error& e) {
      out.dropped.push_back(capability + ": " + e.what());
      continue;
    }
    auto report = validate_spec(spec);
    if (!report.ok()) {
      out.dropped.push_back(spec.name + ": " + report.violations.front().code + ": " +
                            report.violations.front().message);
      continue;
    }
    if (const auto* f = std::get_if<FdaSearch>(&spec.mapping);
        f && (f->search_fields.empty() || f->return_fields.empty())) {
      out.dropped.push_back(spec.name + ": no mappable fields");
      continue;
    }
    if (family == ApiFamily::kOpenFda && !std::holds_alternative<FdaSearch>(spec.mapping)) {
      out.dropped.push_back(spec.name + ": openFDA tool without an fda_search mapping");
      continue;
    }
    out.specs.push_back(std::move(spec));
  }
  return out;
}

std::string tool_checker_prompt(const ToolSpec& spec, const std::string& info, int number,
                                const std::string& examples) {
  return "You are a helpful assistant who generates test queries based on a given function. You are provided the "
         "following:\n- Function: " +
         tool_description_json(spec).dump() + "\n- Related keywords and information for questions and queries:" +
         info + "\nBased on the provided function, you must generate " + std::to_string(number) +
         " different questions in natural language that require using the function.\n\nGuidelines:\n"
         "- The questions should be specific and diverse; avoid general questions\n"
         "- Function calls must include \"name\" and \"arguments\" arguments\n"
         "- Question examples: " +
         examples +
         "\n\nReturn a JSON array of {\"question\": ..., \"call\": {\"name\": ..., \"arguments\": {...}}}.";
}

ToolCheckReport check_tool(const ToolSpec& spec, Gateway& gateway, ChatService& chat,
                           const std::vector<Json>& samples, int questions) {
  ToolCheckReport report;
  auto fail = [&](std::string stage, std::string detail) {
    report.pass = false;
    report.stage = std::move(stage);
    report.detail = std::move(detail);
    return report;
  };

  auto validation = validate_spec(spec);
  if (!validation.ok()) return fail("mapping", validation.violations.front().message);
  if (samples.empty()) return fail("request", "no sample data points");
  const bool compiled = !spec.is_special() && !std::holds_alternative<LlmSimulated>(spec.mapping);
  for (const auto& s : samples) {
    if (!compiled) break;
    try {
      (void)compile_call(spec, s);
    } catch (const Error& e) {
      return fail("mapping", e.what());
    }
  }

  Rng rng(derive_seed(0, "check:" + spec.name));
  std::string info;
  for (const auto& s : samples) {
    FunctionCall call{rng.alnum_id(8), spec.name, s};
    auto r = gateway.execute(call);
    if (r.status == ResultStatus::kOk) {
      info = "\nQuery: " + s.dump() + "\nResult: " + payload_text(r.payload);
      break;
    }
  }
  if (info.empty()) return fail("request", "no sample returned data");

  ChatRequest req;
  req.messages.push_back({Role::kUser, tool_checker_prompt(spec, info, questions)});
  std::string reply;
  try {
    reply = chat.chat(req);
  } catch (const Error& e) {
    return fail("generation", e.what());
  }
  auto doc = find_json_value(reply);
  if (!doc) return fail("generation", "checker reply has no JSON");
  std::vector<Json> items = doc->is_array() ? std::vector<Json>(doc->begin(), doc->end()) : std::vector<Json>{*doc};
  for (const auto& item : items) {
    const Json& c = item.is_object() && item.contains("call") ? item["call"] : item;
    try {
      auto call = function_call_from_json(c);
      call.call_id = rng.alnum_id(8);
      report.generated_calls.push_back(std::move(call));
    } catch (const Error& e) {
      return fail("generation", e.what());
    }
  }
  if (report.generated_calls.empty()) return fail("generation", "no function calls generated");

  for (const auto& call : report.generated_calls) {
    if (call.tool_name != spec.name) return fail("call", "generated call targets " + call.tool_name);
    auto r = gateway.execute(call);
    if (r.status != ResultStatus::kOk) return fail("call", call.arguments.dump() + " -> " + payload_text(r.payload));
  }
  report.pass = true;
  return report;
}

std::string_view review_status_name(ReviewStatus s) noexcept {
  switch (s) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kApproved: return "approved";
    case ReviewStatus::kRejected: return "rejected";
  }
  return "pending";
}

ReviewStatus parse_review_status(std::string_view s) {
  for (auto v : {ReviewStatus::kPending, ReviewStatus::kApproved, ReviewStatus::kRejected}) {
    if (review_status_name(v) == s) return v;
  }
  throw Error(ErrorCode::kParse, "unknown review status '" + std::string(s) + "'");
}

ReviewQueue ReviewQueue::load(const std::filesystem::path& path) {
  ReviewQueue q;
  if (!std::filesystem::exists(path)) return q;
  try {
    auto doc = Json::parse(read_file(path));
    for (const auto& it : doc.at("items")) {
      ReviewItem item;
      item.id = it.at("id").get<std::string>();
      item.kind = it.at("kind").get<std::string>();
      item.status = parse_review_status(it.at("status").get<std::string>());
      item.payload = it.value("payload", Json());
      item.note = it.value("note", "");
      q.items_.push_back(std::move(item));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return q;
}

void ReviewQueue::save(const std::filesystem::path& path) const {
  Json items = Json::array();
  for (const auto& i : items_) {
    items.push_back({{"id", i.id},
                     {"kind", i.kind},
                     {"status", std::string(review_status_name(i.status))},
                     {"payload", i.payload},
                     {"note", i.note}});
  }
  write_file(path, Json{{"items", items}}.dump(2) + "\n");
}

std::string ReviewQueue::submit(const std::string& kind, const std::string& id, Json payload) {
  for (const auto& i : items_) {
    if (i.id == id) return id;
  }
  items_.push_back({id, kind, ReviewStatus::kPending, std::move(payload), {}});
  return id;
}

void ReviewQueue::set_status(const std::string& id, ReviewStatus status, const std::string& note) {
  for (auto& i : items_) {
    if (i.id == id) {
      i.status = status;
      i.note = note;
      return;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "no review item '" + id + "'");
}

std::vector<ReviewItem> ReviewQueue::with_status(ReviewStatus status, const std::string& kind) const {
  std::vector<ReviewItem> out;
  for (const auto& i : items_) {
    if (i.status == status && (kind.empty() || i.kind == kind)) out.push_back(i);
  }
  return out;
}

std::size_t activate_approved_tools(const ReviewQueue& queue, Registry& registry) {
  std::size_t added = 0;
  for (const auto& item : queue.with_status(ReviewStatus::kApproved, "tool")) {
    auto spec = tool_spec_from_json(item.payload);
    if (registry.contains(spec.name)) continue;
    registry.add(std::move(spec));
    ++added;
  }
  return added;
}

}  // namespace toolverse
