#include <regex>
#include <set>

#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"

namespace toolverse {

double token_jaccard(std::string_view a, std::string_view b) {
  auto ta = word_tokens(a);
  auto tb = word_tokens(b);
  std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : sa) shared += sb.count(t);
  return static_cast<double>(shared) / static_cast<double>(sa.size() + sb.size() - shared);
}

std::vector<std::string> find_identifiers(std::string_view text) {
  static const std::regex id(R"((?:^|[^A-Za-z0-9_])([A-Za-z]{2,}[_:]?[0-9]{3,})(?![A-Za-z0-9]))");
  std::vector<std::string> out;
  std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), id); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1].str());
  }
  return out;
}

std::string trace_judge_prompt(const ReasoningTrace& trace, const QuestionRecord& record) {
  return "Judge the quality of a reasoning trace. Use the question and the correct answer as references. The trace "
         "passes when each step follows from the previous tool results and the reasoning leads to the correct "
         "answer.\n\nQuestion: " +
         trace.question + "\nCorrect answer: " + record.ground_truth + "\nExplanation: " + record.explanation +
         "\n\nReasoning trace:" + render_trace_text(trace) +
         "\n\nFinal answer: " + trace.final_answer.value_or("") +
         "\n\nReply with PASS or FAIL as the first word, then one sentence of justification.";
}

namespace {

void collect_strings(const Json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_array() || v.is_object()) {
    for (const auto& x : v) collect_strings(x, out);
  }
}

bool judge_passes(ChatService& judge, const std::string& prompt) {
  try {
    ChatRequest req;
    req.messages.push_back({Role::kUser, prompt});
    return parse_pass_fail(judge.chat(req)).value_or(false);
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

TraceEvaluation evaluate_trace(const ReasoningTrace& trace, const QuestionRecord& record, const Registry& registry,
                               ChatService& judge, const TraceEvalConfig& config) {
  if (trace.terminal != Terminal::kFinished || !trace.final_answer) {
    throw Error(ErrorCode::kPrecondition, "only finished traces can be evaluated");
  }
  TraceEvaluation ev;
  auto flag = [&](std::string_view code, std::string detail) {
    if (std::find(ev.reasons.begin(), ev.reasons.end(), code) == ev.reasons.end()) ev.reasons.emplace_back(code);
    ev.details.push_back(std::string(code) + ": " + detail);
  };

  // Correctness: answer, trace, calls.
  const auto& answer = *trace.final_answer;
  if (record.options) {
    auto letter = extract_choice_letter(answer, *record.options);
    if (!letter || *letter != record.ground_truth) {
      flag(kReasonAnswerWrong, "answer maps to " + letter.value_or("no option") + ", expected " + record.ground_truth);
    }
  } else if (!judge_passes(judge, answer_judge_prompt(record, answer))) {
    flag(kReasonAnswerWrong, "judge did not confirm the answer");
  }
  if (!judge_passes(judge, trace_judge_prompt(trace, record))) flag(kReasonTraceJudgeFail, "trace judge did not pass");

  for (const auto& s : trace.steps) {
    for (const auto& c : s.calls) {
      if (is_terminal_tool(c.tool_name)) continue;
      const auto* spec = registry.find(c.tool_name);
      if (!spec) {
        flag(kReasonBadCall, "step " + std::to_string(s.index) + ": unknown tool " + c.tool_name);
        continue;
      }
      try {
        (void)check_arguments(*spec, c.arguments);
      } catch (const Error& e) {
        flag(kReasonBadCall, "step " + std::to_string(s.index) + ": " + c.tool_name + ": " + e.what());
      }
    }
  }

  // Behavior: hallucinated ids, grounding, repetition.
  std::string context = to_lower(trace.question);
  for (const auto& s : trace.steps) {
    for (const auto& c : s.calls) {
      if (c.tool_name == kToolRag || is_terminal_tool(c.tool_name)) continue;
      std::vector<std::string> values;
      collect_strings(c.arguments, values);
      for (const auto& v : values) {
        for (const auto& id : find_identifiers(v)) {
          if (!contains(context, to_lower(id))) {
            flag(kReasonHallucinatedId, "step " + std::to_string(s.index) + ": " + id + " never appeared earlier");
          }
        }
      }
    }
    for (const auto& r : s.results) context += "\n" + to_lower(payload_text(r.payload));
  }

  bool grounded = false;
  for (const auto& s : trace.steps) {
    for (std::size_t k = 0; k < s.calls.size() && k < s.results.size(); ++k) {
      const auto* spec = registry.find(s.calls[k].tool_name);
      const auto& r = s.results[k];
      if (spec && !spec->is_special() && r.status == ResultStatus::kOk) grounded = true;
    }
  }
  if (!grounded) flag(kReasonUngroundedAnswer, "no tool result precedes the answer");

  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    for (std::size_t j = i + 1; j < trace.steps.size(); ++j) {
      double sim = token_jaccard(trace.steps[i].thought, trace.steps[j].thought);
      if (sim >= config.repeat_threshold) {
        flag(kReasonRepeatedThought, "steps " + std::to_string(trace.steps[i].index) + " and " +
                                         std::to_string(trace.steps[j].index) + " have similarity " +
                                         std::to_string(sim));
      }
    }
  }

  std::map<std::string, int> seen;
  for (const auto& s : trace.steps) {
    for (const auto& c : s.calls) {
      if (is_terminal_tool(c.tool_name)) continue;
      auto [it, fresh] = seen.emplace(call_signature(c), s.index);
      if (!fresh) {
        flag(kReasonRepeatedCall, c.tool_name + " repeated in steps " + std::to_string(it->second) + " and " +
                                      std::to_string(s.index));
      }
    }
  }

  ev.pass = ev.reasons.empty();
  return ev;
}

}  // namespace toolverse
