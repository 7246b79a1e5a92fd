#include "toolverse/agent.hpp"

#include <algorithm>
#include <future>
#include <regex>
#include <set>

#include "toolverse/error.hpp"

namespace toolverse {

std::string_view terminal_name(Terminal t) noexcept {
  switch (t) {
    case Terminal::kFinished: return "finished";
    case Terminal::kStepLimitForced: return "step_limit_forced";
    case Terminal::kAborted: return "aborted";
  }
  return "aborted";
}

Terminal parse_terminal(std::string_view s) {
  if (s == "finished") return Terminal::kFinished;
  if (s == "step_limit_forced") return Terminal::kStepLimitForced;
  if (s == "aborted") return Terminal::kAborted;
  throw Error(ErrorCode::kParse, "unknown terminal state '" + std::string(s) + "'");
}

Json trace_to_json(const ReasoningTrace& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.steps) {
    Json calls = Json::array();
    for (const auto& c : s.calls) calls.push_back(function_call_to_json(c));
    Json results = Json::array();
    for (const auto& r : s.results) results.push_back(tool_result_to_json(r, true));
    steps.push_back({{"i", s.index}, {"thought", s.thought}, {"calls", calls}, {"results", results}});
  }
  Json out = Json::object();
  out["id"] = trace.id;
  out["question"] = trace.question;
  out["steps"] = std::move(steps);
  out["final_answer"] = trace.final_answer ? Json(*trace.final_answer) : Json();
  out["terminal"] = std::string(terminal_name(trace.terminal));
  out["available_tools"] = trace.available_tools;
  if (!trace.abort_reason.empty()) out["abort_reason"] = trace.abort_reason;
  out["generations"] = trace.generations;
  return out;
}

ReasoningTrace trace_from_json(const Json& doc) {
  ReasoningTrace t;
  try {
    t.id = doc.value("id", "");
    t.question = doc.at("question").get<std::string>();
    for (const auto& s : doc.at("steps")) {
      ReasoningStep step;
      step.index = s.at("i").get<int>();
      step.thought = s.value("thought", "");
      for (const auto& c : s.at("calls")) step.calls.push_back(function_call_from_json(c));
      for (const auto& r : s.at("results")) step.results.push_back(tool_result_from_json(r));
      t.steps.push_back(std::move(step));
    }
    if (doc.contains("final_answer") && doc["final_answer"].is_string()) {
      t.final_answer = doc["final_answer"].get<std::string>();
    }
    t.terminal = parse_terminal(doc.at("terminal").get<std::string>());
    if (doc.contains("available_tools")) {
      t.available_tools = doc["available_tools"].get<std::vector<std::vector<std::string>>>();
    }
    t.abort_reason = doc.value("abort_reason", "");
    t.generations = doc.value("generations", 0);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed trace: ") + e.what());
  }
  return t;
}

std::string check_trace_well_formed(const ReasoningTrace& trace) {
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    if (s.index != static_cast<int>(i) + 1) return "step indices are not contiguous from 1";
    if (s.calls.size() != s.results.size()) return "step " + std::to_string(s.index) + " has unmatched results";
    std::set<std::string> ids;
    for (const auto& c : s.calls) {
      if (c.call_id.empty() || !ids.insert(c.call_id).second) {
        return "step " + std::to_string(s.index) + " has an empty or repeated call id";
      }
    }
    for (const auto& r : s.results) {
      if (!ids.erase(r.call_id)) return "step " + std::to_string(s.index) + " has a result with no call";
    }
  }
  for (std::size_t i = 1; i < trace.available_tools.size(); ++i) {
    std::set<std::string> now(trace.available_tools[i].begin(), trace.available_tools[i].end());
    for (const auto& n : trace.available_tools[i - 1]) {
      if (!now.count(n)) return "available tools shrank at step " + std::to_string(i + 1);
    }
  }
  if (trace.terminal == Terminal::kFinished) {
    if (!trace.final_answer) return "finished trace without a final answer";
    if (trace.steps.empty()) return "finished trace without steps";
    const auto& last = trace.steps.back().calls;
    if (std::none_of(last.begin(), last.end(), [](const FunctionCall& c) { return is_terminal_tool(c.tool_name); })) {
      return "finished trace whose last step has no terminal call";
    }
  }
  return {};
}

std::string agent_system_prompt(const Registry& registry, const std::vector<std::string>& tools) {
  Json functions = Json::array();
  for (const auto& n : tools) functions.push_back(tool_description_json(registry.at(n)));
  return "You are a helpful assistant that will solve problems through detailed, step-by-step reasoning and "
         "actions based on your reasoning. Typically, your actions will use the provided functions. You have "
         "access to the following functions. " +
         functions.dump();
}

std::string render_assistant_turn(const ReasoningStep& step, bool with_ids) {
  Json calls = Json::array();
  for (const auto& c : step.calls) calls.push_back(function_call_to_json(c, with_ids));
  std::string out = step.thought;
  if (!out.empty()) out += " ";
  return out + std::string(kToolCallsMarker) + calls.dump();
}

std::string render_tool_turn(const ReasoningStep& step) {
  Json out = Json::array();
  for (const auto& r : step.results) out.push_back({{"id", r.call_id}, {"content", r.payload}});
  return out.dump();
}

namespace {

// End of the JSON value starting at `start` by bracket matching, or npos.
std::size_t json_extent(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      stack.push_back(c == '[' ? ']' : '}');
    } else if (c == ']' || c == '}') {
      if (stack.empty() || stack.back() != c) return std::string_view::npos;
      stack.pop_back();
      if (stack.empty()) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool looks_like_call_json(std::string_view text, std::size_t pos) {
  auto next = [&](std::size_t from) {
    while (from < text.size() && std::isspace(static_cast<unsigned char>(text[from]))) ++from;
    return from < text.size() ? text[from] : '\0';
  };
  if (text[pos] == '{') return next(pos + 1) == '"';
  return next(pos + 1) == '{' || next(pos + 1) == ']';
}

struct CallSpan {
  std::size_t prefix_end = 0;  // where the prose before the calls ends
  std::size_t start = 0;
  std::size_t end = 0;
};

// Locates the call JSON. nullopt when there is none; throws on malformed JSON.
std::optional<CallSpan> locate_calls(std::string_view text) {
  auto marker = text.find(kToolCallsMarker);
  if (marker != std::string_view::npos) {
    auto pos = marker + kToolCallsMarker.size();
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size() || (text[pos] != '[' && text[pos] != '{')) {
      throw Error(ErrorCode::kParse, "no JSON after " + std::string(kToolCallsMarker));
    }
    auto end = json_extent(text, pos);
    if (end == std::string_view::npos) throw Error(ErrorCode::kParse, "malformed function-call JSON");
    return CallSpan{marker, pos, end};
  }
  for (std::size_t pos = 0; pos < text.size(); ++pos) {
    if ((text[pos] != '[' && text[pos] != '{') || !looks_like_call_json(text, pos)) continue;
    auto end = json_extent(text, pos);
    if (end == std::string_view::npos) throw Error(ErrorCode::kParse, "malformed function-call JSON");
    return CallSpan{pos, pos, end};
  }
  return std::nullopt;
}

std::string fresh_id(Rng& rng, std::set<std::string>& used) {
  std::string id;
  do {
    id = rng.alnum_id(8);
  } while (!used.insert(id).second);
  return id;
}

std::vector<FunctionCall> calls_from_json(const Json& doc, Rng& rng) {
  std::vector<Json> items;
  if (doc.is_array()) {
    items.assign(doc.begin(), doc.end());
  } else {
    items.push_back(doc);
  }
  std::vector<FunctionCall> calls;
  std::set<std::string> used;
  for (const auto& item : items) {
    if (!item.is_object()) throw Error(ErrorCode::kParse, "function call must be a JSON object");
    if (!item.contains("name") || !item["name"].is_string()) {
      throw Error(ErrorCode::kParse, "function call lacks a string \"name\"");
    }
    FunctionCall c;
    c.tool_name = item["name"].get<std::string>();
    if (item.contains("arguments")) {
      Json args = item["arguments"];
      if (args.is_string()) {
        try {
          args = Json::parse(args.get<std::string>());
        } catch (const Json::parse_error&) {
          throw Error(ErrorCode::kParse, "arguments of " + c.tool_name + " are not an object");
        }
      }
      if (!args.is_object()) throw Error(ErrorCode::kParse, "arguments of " + c.tool_name + " are not an object");
      c.arguments = std::move(args);
    }
    c.call_id = fresh_id(rng, used);
    calls.push_back(std::move(c));
  }
  return calls;
}

std::vector<FunctionCall> parse_span(std::string_view text, const CallSpan& span, Rng& rng) {
  Json doc;
  try {
    doc = Json::parse(text.substr(span.start, span.end - span.start));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("malformed function-call JSON: ") + e.what());
  }
  return calls_from_json(doc, rng);
}

}  // namespace

std::vector<FunctionCall> parse_function_calls(std::string_view text, Rng& rng) {
  auto span = locate_calls(text);
  if (!span) throw Error(ErrorCode::kParse, "no function-call JSON found");
  auto calls = parse_span(text, *span, rng);
  if (calls.empty()) throw Error(ErrorCode::kParse, "empty function-call list");
  return calls;
}

StepProposal parse_step_reply(const std::string& text, Rng& rng) {
  StepProposal p;
  p.raw = text;
  auto marker = text.find(kFinalAnswerMarker);
  if (marker != std::string::npos) {
    p.thought = trim(std::string_view(text).substr(0, marker));
    auto rest = std::string_view(text).substr(marker + kFinalAnswerMarker.size());
    std::optional<CallSpan> span;
    try {
      span = locate_calls(rest);
      if (span) p.calls = parse_span(rest, *span, rng);
    } catch (const Error&) {
      span.reset();
      p.calls.clear();
    }
    p.final_answer = trim(span ? rest.substr(0, span->prefix_end) : rest);
    return p;
  }
  auto span = locate_calls(text);
  if (!span) throw Error(ErrorCode::kParse, "reply has neither function calls nor " + std::string(kFinalAnswerMarker));
  p.calls = parse_span(text, *span, rng);
  if (p.calls.empty()) throw Error(ErrorCode::kParse, "empty function-call list");
  p.thought = trim(std::string_view(text).substr(0, span->prefix_end));
  return p;
}

namespace {

constexpr std::string_view kForcedInstruction =
    "The step limit has been reached. [FinalAnswer] Based on the reasoning trace so far, give the final answer "
    "now.";

constexpr std::string_view kFormatReminder =
    "Your previous reply could not be parsed. Reply with your thought followed by [TOOL_CALLS] and a JSON array "
    "of function calls, each with \"name\" and \"arguments\". When you are ready to answer, reply with your "
    "thought, then [FinalAnswer], then the answer, then [TOOL_CALLS][{\"name\": \"Finish\", \"arguments\": {}}].";

constexpr std::string_view kNoThoughtNote =
    "\nReply either with function calls only, as a JSON array of {\"name\", \"arguments\"}, or with the final "
    "answer as plain text.";

}  // namespace

ChatRequest build_step_request(const std::string& question, const ReasoningTrace& trace, const Registry& registry,
                               const std::vector<std::string>& tools, const AgentConfig& config, bool forced) {
  ChatRequest req;
  req.system_prompt = agent_system_prompt(registry, tools);
  if (config.thought_mode == ThoughtMode::kNoThoughts) req.system_prompt += kNoThoughtNote;
  req.sampling = config.sampling;
  req.messages.push_back({Role::kUser, question});
  for (const auto& s : trace.steps) {
    req.messages.push_back({Role::kAssistant, render_assistant_turn(s)});
    if (!s.results.empty()) req.messages.push_back({Role::kTool, render_tool_turn(s)});
  }
  if (forced) req.messages.push_back({Role::kUser, std::string(kForcedInstruction)});
  return req;
}

StepProposal generate_step(const std::string& question, const ReasoningTrace& trace, const Registry& registry,
                           const std::vector<std::string>& tools, ChatService& chat, Rng& rng,
                           const AgentConfig& config) {
  auto req = build_step_request(question, trace, registry, tools, config, false);
  return parse_step_reply(chat.chat(req), rng);
}

std::string summarization_prompt(const std::string& thought, const FunctionCall& call, const ToolResult& result) {
  return "Summarize the tool output below. Keep every fact that bears on the current reasoning thought, including "
         "names, identifiers and numbers, and drop the rest.\n\nThought: " +
         thought + "\nFunction call: " + function_call_to_json(call, false).dump() +
         "\nTool output: " + payload_text(result.payload) + "\n\nSummary:";
}

ToolResult summarize_result(const std::string& thought, const FunctionCall& call, const ToolResult& result,
                            ChatService& chat, std::size_t threshold, bool* failed) {
  if (failed) *failed = false;
  if (result.summarized || payload_text(result.payload).size() <= threshold) return result;
  ChatRequest req;
  req.messages.push_back({Role::kUser, summarization_prompt(thought, call, result)});
  try {
    ToolResult out = result;
    out.payload = chat.chat(req);
    out.summarized = true;
    return out;
  } catch (const Error&) {
    if (failed) *failed = true;
    return result;
  }
}

namespace {

class Loop {
 public:
  Loop(const std::string& question, const Registry& registry, AgentServices services, const AgentConfig& config)
      : question_(question),
        registry_(registry),
        services_(services),
        config_(config),
        rng_(derive_seed(config.seed, "agent:" + question)),
        tools_(registry.default_tools()),
        started_(std::chrono::steady_clock::now()) {
    trace_.question = question;
  }

  ReasoningTrace run() {
    if (config_.max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 1");
    for (int i = 1; i <= config_.max_steps; ++i) {
      const bool forced = i == config_.max_steps;
      trace_.available_tools.push_back(tools_);
      if (config_.thought_mode == ThoughtMode::kWithThoughts ? step_with_thoughts(i, forced)
                                                              : step_without_thoughts(i, forced)) {
        break;
      }
    }
    return std::move(trace_);
  }

 private:
  // Sends one request, compressing results once on context overflow.
  std::optional<std::string> generate(ChatRequest req, bool forced) {
    if (config_.timeout.count() > 0 && std::chrono::steady_clock::now() - started_ > config_.timeout) {
      abort("timeout");
      return std::nullopt;
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
      try {
        ++trace_.generations;
        return services_.model.chat(req);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kContextOverflow && attempt == 0 && compress_trace()) {
          auto rebuilt = build_step_request(question_, trace_, registry_, tools_, config_, forced);
          rebuilt.messages.insert(rebuilt.messages.end(), req.messages.begin() + base_messages(req), req.messages.end());
          req = std::move(rebuilt);
          continue;
        }
        abort(std::string(error_code_name(e.code())) + ": " + e.what());
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // Messages of `req` beyond what build_step_request produces (reprompts).
  std::size_t base_messages(const ChatRequest& req) const {
    std::size_t n = 1;
    for (const auto& s : trace_.steps) n += s.results.empty() ? 1 : 2;
    return std::min(n, req.messages.size());
  }

  bool compress_trace() {
    bool changed = false;
    auto& chat = summarizer();
    for (auto& s : trace_.steps) {
      for (std::size_t k = 0; k < s.results.size(); ++k) {
        auto& r = s.results[k];
        if (r.summarized || r.source == ResultSource::kLocal || r.status != ResultStatus::kOk) continue;
        bool failed = false;
        auto next = summarize_result(s.thought, s.calls[k], r, chat, 256, &failed);
        if (!failed && next.summarized) {
          r = std::move(next);
          changed = true;
        }
      }
    }
    return changed;
  }

  ChatService& summarizer() { return services_.summarizer ? *services_.summarizer : services_.model; }

  void abort(std::string reason) {
    trace_.terminal = Terminal::kAborted;
    trace_.abort_reason = std::move(reason);
  }

  FunctionCall finish_call() {
    FunctionCall c;
    c.tool_name = std::string(kFinish);
    c.call_id = rng_.alnum_id(8);
    return c;
  }

  void finish(ReasoningStep step, std::string answer, bool forced, std::optional<FunctionCall> terminal = {}) {
    if (!terminal) terminal = finish_call();
    step.calls = {*terminal};
    step.results = {services_.gateway.execute(*terminal)};
    trace_.steps.push_back(std::move(step));
    trace_.final_answer = std::move(answer);
    trace_.terminal = forced ? Terminal::kStepLimitForced : Terminal::kFinished;
  }

  // Text with any call JSON removed, for forced answers.
  static std::string strip_calls(const std::string& text) {
    try {
      if (auto span = locate_calls(text)) {
        return trim(text.substr(0, span->prefix_end) + " " + text.substr(span->end));
      }
    } catch (const Error&) {
    }
    return trim(text);
  }

  bool forced_answer(int i, const std::string& reply) {
    ReasoningStep step;
    step.index = i;
    std::string answer;
    auto marker = reply.find(kFinalAnswerMarker);
    if (marker != std::string::npos) {
      step.thought = config_.thought_mode == ThoughtMode::kWithThoughts ? trim(reply.substr(0, marker)) : "";
      answer = strip_calls(reply.substr(marker + kFinalAnswerMarker.size()));
    } else {
      answer = strip_calls(reply);
    }
    finish(std::move(step), std::move(answer), true);
    return true;
  }

  bool step_with_thoughts(int i, bool forced) {
    auto req = build_step_request(question_, trace_, registry_, tools_, config_, forced);
    auto reply = generate(req, forced);
    if (!reply) return true;
    if (forced) return forced_answer(i, *reply);

    StepProposal proposal;
    try {
      proposal = parse_step_reply(*reply, rng_);
    } catch (const Error& first) {
      req.messages.push_back({Role::kAssistant, *reply});
      req.messages.push_back({Role::kUser, std::string(kFormatReminder)});
      auto retry = generate(req, forced);
      if (!retry) return true;
      try {
        proposal = parse_step_reply(*retry, rng_);
      } catch (const Error& second) {
        abort(std::string("unparseable model output: ") + second.what());
        return true;
      }
    }

    ReasoningStep step;
    step.index = i;
    step.thought = proposal.thought;
    if (proposal.final_answer) {
      std::optional<FunctionCall> terminal;
      for (const auto& c : proposal.calls) {
        if (is_terminal_tool(c.tool_name)) {
          terminal = c;
          break;
        }
      }
      finish(std::move(step), *proposal.final_answer, false, terminal);
      return true;
    }
    return run_calls(std::move(step), std::move(proposal.calls));
  }

  bool step_without_thoughts(int i, bool forced) {
    auto req = build_step_request(question_, trace_, registry_, tools_, config_, forced);
    auto reply = generate(req, forced);
    if (!reply) return true;
    if (forced) return forced_answer(i, *reply);
    ReasoningStep step;
    step.index = i;
    std::vector<FunctionCall> calls;
    try {
      calls = parse_function_calls(*reply, rng_);
    } catch (const Error&) {
      auto text = trim(*reply);
      if (text.empty()) {
        abort("empty model output");
        return true;
      }
      finish(std::move(step), text, false);
      return true;
    }
    return run_calls(std::move(step), std::move(calls));
  }

  // Executes a step's calls; returns true when a terminal call ended the run.
  bool run_calls(ReasoningStep step, std::vector<FunctionCall> calls) {
    for (const auto& c : calls) {
      if (c.tool_name == kGiveAnswer || c.tool_name == kEnd || c.tool_name == kFinish) {
        std::string answer = step.thought;
        if (c.arguments.is_object() && c.arguments.contains("answer") && c.arguments["answer"].is_string()) {
          answer = c.arguments["answer"].get<std::string>();
        }
        finish(std::move(step), std::move(answer), false, c);
        return true;
      }
    }

    std::set<std::string> available(tools_.begin(), tools_.end());
    std::vector<std::optional<ToolResult>> results(calls.size());
    std::vector<std::future<ToolResult>> pending(calls.size());
    std::map<std::string, std::size_t> first_in_step;
    for (std::size_t k = 0; k < calls.size(); ++k) {
      const auto& c = calls[k];
      if (!available.count(c.tool_name)) {
        results[k] = error_result(c.call_id, "unavailable_tool",
                                  "tool '" + c.tool_name + "' is not among the available functions");
        continue;
      }
      auto sig = call_signature(c);
      if (auto it = cache_.find(sig); it != cache_.end()) {
        results[k] = it->second;
        results[k]->call_id = c.call_id;
        continue;
      }
      if (first_in_step.count(sig)) continue;
      first_in_step[sig] = k;
      pending[k] = std::async(std::launch::async, [this, c] { return services_.gateway.execute(c); });
    }
    for (std::size_t k = 0; k < calls.size(); ++k) {
      if (pending[k].valid()) {
        results[k] = pending[k].get();
        cache_[call_signature(calls[k])] = *results[k];
      }
    }
    for (std::size_t k = 0; k < calls.size(); ++k) {
      if (!results[k]) {
        results[k] = cache_.at(call_signature(calls[k]));
        results[k]->call_id = calls[k].call_id;
      }
    }

    auto& chat = summarizer();
    for (std::size_t k = 0; k < calls.size(); ++k) {
      auto& r = *results[k];
      if (calls[k].tool_name == kToolRag && r.status == ResultStatus::kOk && r.payload.is_array()) {
        for (const auto& n : r.payload) {
          if (!n.is_string()) continue;
          auto name = n.get<std::string>();
          if (registry_.contains(name) && !available.count(name)) {
            available.insert(name);
            tools_.push_back(name);
          }
        }
      }
      if (r.source != ResultSource::kLocal && r.status == ResultStatus::kOk) {
        r = summarize_result(step.thought, calls[k], r, chat, config_.summarize_threshold_chars);
      }
      step.results.push_back(std::move(r));
    }
    step.calls = std::move(calls);
    trace_.steps.push_back(std::move(step));
    return false;
  }

  const std::string& question_;
  const Registry& registry_;
  AgentServices services_;
  const AgentConfig& config_;
  Rng rng_;
  std::vector<std::string> tools_;
  std::map<std::string, ToolResult> cache_;
  std::chrono::steady_clock::time_point started_;
  ReasoningTrace trace_;
};

}  // namespace

ReasoningTrace run_inference(const std::string& question, const Registry& registry, AgentServices services,
                             const AgentConfig& config) {
  AgentConfig c = config;
  c.thought_mode = ThoughtMode::kWithThoughts;
  return Loop(question, registry, services, c).run();
}

ReasoningTrace run_inference_no_thought(const std::string& question, const Registry& registry,
                                        AgentServices services, const AgentConfig& config) {
  AgentConfig c = config;
  c.thought_mode = ThoughtMode::kNoThoughts;
  return Loop(question, registry, services, c).run();
}

std::string render_options(const Options& options) {
  std::string out;
  for (const auto& [letter, text] : options) out += letter + ". " + text + "\n";
  return out;
}

std::optional<std::string> extract_choice_letter(std::string_view text, const Options& options) {
  auto t = trim(text);
  auto in_options = [&](const std::string& l) -> std::optional<std::string> {
    if (options.count(l)) return l;
    return std::nullopt;
  };
  static const std::regex bare(R"(^\(?\s*([A-Za-z])\s*[\).:]?$)");
  std::smatch m;
  if (std::regex_match(t, m, bare)) {
    auto l = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0]))));
    return in_options(l);
  }
  static const std::regex phrase(R"((?:answer|option|choice)\s*(?:is|:)?\s*:?\s*\(?\s*([A-Z])\b)",
                                 std::regex::icase);
  if (std::regex_search(t, m, phrase)) {
    auto l = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0]))));
    if (auto hit = in_options(l)) return hit;
  }
  static const std::regex standalone(R"((?:^|[^A-Za-z0-9])([A-Z])(?=[^A-Za-z0-9]|$))");
  std::set<std::string> seen;
  for (auto it = std::sregex_iterator(t.begin(), t.end(), standalone); it != std::sregex_iterator(); ++it) {
    auto l = (*it)[1].str();
    if (l != "I" && options.count(l)) seen.insert(l);
  }
  if (seen.size() == 1) return *seen.begin();
  return std::nullopt;
}

std::string choice_mapping_prompt(const std::string& question, const Options& options, const std::string& open_answer) {
  return "Question: " + question + "\n\nOptions:\n" + render_options(options) +
         "\nHere is an answer to the question:\n" + open_answer +
         "\n\nBased on this answer, which option is correct? Reply with the option letter only. If the answer "
         "does not support any option, reply NONE.";
}

std::optional<std::string> map_answer_to_choice(const std::string& question, const Options& options,
                                                const std::string& open_answer, ChatService& chat) {
  if (trim(open_answer).empty() || options.empty()) return std::nullopt;
  ChatRequest req;
  req.messages.push_back({Role::kUser, choice_mapping_prompt(question, options, open_answer)});
  req.sampling.max_tokens = 16;
  std::string reply;
  try {
    reply = trim(chat.chat(req));
  } catch (const Error&) {
    return std::nullopt;
  }
  if (options.size() == 1) {
    if (reply.empty() || to_lower(reply) == "none") return std::nullopt;
    return options.begin()->first;
  }
  return extract_choice_letter(reply, options);
}

}  // namespace toolverse
