#include <algorithm>
#include <set>

#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"

namespace toolverse {

std::string_view hint_verdict_name(HintVerdict v) noexcept {
  switch (v) {
    case HintVerdict::kContinue: return "continue";
    case HintVerdict::kAnswerCorrect: return "answer_correct";
    case HintVerdict::kAnswerWrong: return "answer_wrong";
  }
  return "continue";
}

std::string render_trace_text(const ReasoningTrace& trace) {
  std::string out;
  for (const auto& s : trace.steps) {
    Json calls = Json::array();
    for (const auto& c : s.calls) calls.push_back(function_call_to_json(c, false));
    Json results = Json::array();
    for (const auto& r : s.results) results.push_back(r.payload);
    out += "\nStep " + std::to_string(s.index) + ":\nThought: " + s.thought + "\nFunction calls: " + calls.dump() +
           "\nResults: " + results.dump();
  }
  return out.empty() ? " none" : out;
}

std::string helper_prompt(const QuestionRecord& record, const ReasoningTrace& trace) {
  std::string question = record.question;
  if (record.options) question += "\n" + render_options(*record.options);
  return "Please act as a helper to provide solution hints for the next step in solving the question. Give some "
         "suggestions about what to do next, but never give the final answer or information that directly leads to "
         "the final answer. Only provide hints for one reasoning step.\n\n"
         "Also, make sure the user's final answer contains the correct answer. If not, let the user do "
         "self-reflection and continue reasoning until the correct answer is found.\n"
         "- Question:" +
         question + "\n- Correct final answer:" + record.ground_truth +
         "\n- Explanation of correct answer:" + record.explanation +
         "\n- Previous reasoning steps:" + render_trace_text(trace);
}

std::string answer_judge_prompt(const QuestionRecord& record, const std::string& answer) {
  return "Decide whether a predicted answer agrees with the correct answer to a question.\n\nQuestion: " +
         record.question + "\nCorrect answer: " + record.ground_truth + "\nExplanation: " + record.explanation +
         "\nPredicted answer: " + answer +
         "\n\nReply with PASS if the predicted answer states the correct answer, otherwise FAIL, as the first "
         "word.";
}

namespace {

bool answer_matches(const QuestionRecord& record, const std::string& answer, ChatService& judge) {
  if (record.options) {
    auto letter = extract_choice_letter(answer, *record.options);
    return letter && *letter == record.ground_truth;
  }
  try {
    ChatRequest req;
    req.messages.push_back({Role::kUser, answer_judge_prompt(record, answer)});
    return parse_pass_fail(judge.chat(req)).value_or(false);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

SolverHint helper_hint(const QuestionRecord& record, const ReasoningTrace& trace,
                       const std::optional<std::string>& proposed_answer, ChatService& helper, ChatService* judge) {
  SolverHint h;
  h.step = static_cast<int>(trace.steps.size());
  std::string prompt = helper_prompt(record, trace);
  if (proposed_answer) {
    if (answer_matches(record, *proposed_answer, judge ? *judge : helper)) {
      h.verdict = HintVerdict::kAnswerCorrect;
      return h;
    }
    h.verdict = HintVerdict::kAnswerWrong;
    prompt += "\n- Proposed final answer:" + *proposed_answer;
  }
  ChatRequest req;
  req.messages.push_back({Role::kUser, prompt});
  h.hint = trim(helper.chat(req));
  return h;
}

std::string solver_prompt(const QuestionRecord& record, const Registry& registry, const ReasoningTrace& trace,
                          const std::string& hint) {
  Json functions = Json::array();
  for (const auto& n : record.initial_tools) {
    if (const auto* spec = registry.find(n)) functions.push_back(tool_description_json(*spec));
  }
  Json virtual_tool = {{"name", std::string(kVirtualToolRag)},
                       {"description",
                        "Simulates retrieving a tool from the Function List through ToolRAG. Give the tool's name and "
                        "a rewritten description of the needed functionality."},
                       {"parameter",
                        {{"type", "object"},
                         {"properties",
                          {{"name", {{"type", "string"}, {"description", "Tool name from the Function List"}}},
                           {"description", {{"type", "string"}, {"description", "Rewritten tool description"}}}}},
                         {"required", {"name", "description"}}}}};
  Json toolrag = tool_description_json(registry.at(kToolRag));
  std::string question = record.question;
  if (record.options) question += "\n" + render_options(*record.options);
  return "You must fully understand and solve a question through reasoning and function calls.\n\nGuidelines:\n"
         "- For each step, you must generate a reasoning thought and correct function call. If needed, call "
         "multiple functions.\n"
         "- If you think you have answered the question, thoroughly reflect on your reasoning to verify you have in "
         "fact answered the question. If not, continue reasoning. If so, call the 'Finish' function and provide "
         "your final answer, which should be 1) comprehensive, 2) explain how you arrived at the answer, and 3) "
         "why the answer addresses the question.\n"
         "- If the result from the last function call is empty or not useful, you must continue reasoning and call "
         "ToolRAG (or simulate a virtual ToolRAG call) to retrieve more tools.\n"
         "  - If the tool you need is in the Function List below, you must retrieve them using a virtual ToolRAG "
         "call that simulates obtaining the tool through ToolRAG.\n"
         "  - If the tool you need is not in the Function List below, you need to call ToolRAG.\n"
         "  - " +
         toolrag.dump() + "\n  - " + virtual_tool.dump() +
         "\n- Do not answer the question based on general knowledge. You must answer the question based on the "
         "information returned by the tools.\n"
         "- If all previous solution attempts have failed, do not repeat the same thoughts and function calls. "
         "Instead, come up with new solution approaches.\n\n"
         "Function List: " +
         functions.dump() +
         "\n\nFor each reasoning step, respond in this JSON format: {\"thought\": \"...\", \"calls\": [{\"name\": "
         "\"...\", \"arguments\": {...}}]}\n\n"
         "For the final step, respond in this JSON format, providing the final answer and a detailed explanation:\n"
         "{\"thought\": \"...\", \"calls\": [{\"name\": \"End\", \"arguments\": {\"answer\": \"...\"}}]}\n\n"
         "Question: " +
         question + "\n\nPrevious reasoning steps:" + render_trace_text(trace) + "\n\nHint for next step: " + hint;
}

std::pair<FunctionCall, ToolResult> rewrite_virtual_call(const FunctionCall& call, const Retriever& retriever, int k) {
  std::string name;
  std::string description;
  if (call.arguments.is_object()) {
    if (call.arguments.contains("name") && call.arguments["name"].is_string()) name = call.arguments["name"];
    if (call.arguments.contains("description") && call.arguments["description"].is_string()) {
      description = call.arguments["description"];
    }
  }
  if (name.empty()) throw Error(ErrorCode::kMissingArgument, "virtual ToolRAG call without a tool name");
  if (description.empty()) description = name;
  k = std::max(k, 1);

  std::vector<std::string> names;
  if (retriever) names = retriever(description, k);
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    names.insert(names.begin(), name);
    if (static_cast<int>(names.size()) > k) names.resize(static_cast<std::size_t>(k));
  }
  FunctionCall real{call.call_id, std::string(kToolRag), Json{{"description", description}, {"limit", k}}};
  ToolResult result;
  result.call_id = call.call_id;
  result.status = ResultStatus::kOk;
  result.payload = names;
  result.source = ResultSource::kLocal;
  return {real, result};
}

namespace {

struct SolverStep {
  std::string thought;
  std::vector<FunctionCall> calls;
  std::optional<std::string> answer;
};

std::optional<SolverStep> parse_solver_reply(const std::string& reply, Rng& rng) {
  SolverStep out;
  auto doc = find_json_value(reply);
  if (doc && doc->is_object() && doc->contains("thought")) {
    out.thought = (*doc)["thought"].is_string() ? (*doc)["thought"].get<std::string>() : "";
    if (doc->contains("calls") && (*doc)["calls"].is_array()) {
      std::set<std::string> used;
      for (const auto& c : (*doc)["calls"]) {
        try {
          auto call = function_call_from_json(c);
          do {
            call.call_id = rng.alnum_id(8);
          } while (!used.insert(call.call_id).second);
          out.calls.push_back(std::move(call));
        } catch (const Error&) {
          return std::nullopt;
        }
      }
    }
  } else {
    try {
      auto p = parse_step_reply(reply, rng);
      out.thought = p.thought;
      out.calls = p.calls;
      out.answer = p.final_answer;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  for (const auto& c : out.calls) {
    if (!is_terminal_tool(c.tool_name)) continue;
    if (c.arguments.contains("answer") && c.arguments["answer"].is_string()) {
      out.answer = c.arguments["answer"].get<std::string>();
    } else if (!out.answer) {
      out.answer = out.thought;
    }
  }
  if (!out.answer && out.calls.empty()) return std::nullopt;
  return out;
}

}  // namespace

TraceGenOutcome generate_trace(const QuestionRecord& record, const Registry& registry, TraceGenServices services,
                               const TraceGenConfig& config) {
  TraceGenOutcome outcome;
  Rng rng(derive_seed(config.seed, "tracegen:" + record.id));
  ReasoningTrace trace;
  trace.id = "t-" + record.id;
  trace.question = record.question;
  if (record.options) trace.question += "\n" + render_options(*record.options);
  std::vector<std::string> tools = registry.default_tools();

  auto add_tools = [&](const ToolResult& r) {
    if (r.status != ResultStatus::kOk || !r.payload.is_array()) return;
    for (const auto& n : r.payload) {
      if (!n.is_string()) continue;
      auto name = n.get<std::string>();
      if (registry.contains(name) && std::find(tools.begin(), tools.end(), name) == tools.end()) tools.push_back(name);
    }
  };

  try {
    auto hint = helper_hint(record, trace, std::nullopt, services.helper);
    outcome.hints.push_back(hint);
    for (int i = 1; i <= config.max_steps; ++i) {
      ChatRequest req;
      req.messages.push_back({Role::kUser, solver_prompt(record, registry, trace, hint.hint)});
      auto parsed = parse_solver_reply(services.solver.chat(req), rng);
      if (!parsed) continue;

      if (parsed->answer) {
        auto check = helper_hint(record, trace, parsed->answer, services.helper, services.judge);
        outcome.hints.push_back(check);
        if (check.verdict == HintVerdict::kAnswerCorrect) {
          ReasoningStep step;
          step.index = static_cast<int>(trace.steps.size()) + 1;
          step.thought = parsed->thought;
          FunctionCall finish{rng.alnum_id(8), std::string(kFinish), Json::object()};
          step.calls = {finish};
          step.results = {services.gateway.execute(finish)};
          trace.available_tools.push_back(tools);
          trace.steps.push_back(std::move(step));
          trace.final_answer = *parsed->answer;
          trace.terminal = Terminal::kFinished;
          outcome.trace = std::move(trace);
          return outcome;
        }
        if (++outcome.wrong_answers > config.max_wrong_answers) break;
        hint = check;
        continue;
      }

      ReasoningStep step;
      step.index = static_cast<int>(trace.steps.size()) + 1;
      step.thought = parsed->thought;
      trace.available_tools.push_back(tools);
      std::set<std::string> available(tools.begin(), tools.end());
      std::vector<ToolResult> results;
      for (auto& call : parsed->calls) {
        if (call.tool_name == kVirtualToolRag) {
          try {
            auto [real, result] = rewrite_virtual_call(call, services.retriever, config.toolrag_k);
            call = real;
            results.push_back(std::move(result));
          } catch (const Error& e) {
            call.tool_name = std::string(kToolRag);
            results.push_back(error_result(call.call_id, error_code_name(e.code()), e.what()));
          }
        } else if (!available.count(call.tool_name)) {
          results.push_back(error_result(call.call_id, "unavailable_tool",
                                         "tool '" + call.tool_name + "' is not among the available functions"));
        } else {
          results.push_back(services.gateway.execute(call));
        }
      }
      for (std::size_t k = 0; k < results.size(); ++k) {
        if (parsed->calls[k].tool_name == kToolRag) add_tools(results[k]);
      }
      step.calls = std::move(parsed->calls);
      step.results = std::move(results);
      trace.steps.push_back(std::move(step));
      hint = helper_hint(record, trace, std::nullopt, services.helper);
      outcome.hints.push_back(hint);
    }
  } catch (const Error& e) {
    outcome.rejection = "service_error: " + std::string(e.what());
    return outcome;
  }
  outcome.rejection = "no_answer";
  return outcome;
}

}  // namespace toolverse
