#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "toolverse/call.hpp"
#include "toolverse/gateway.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"

namespace toolverse {

inline constexpr std::string_view kFinalAnswerMarker = "[FinalAnswer]";
inline constexpr std::string_view kToolCallsMarker = "[TOOL_CALLS]";

enum class Terminal { kFinished, kStepLimitForced, kAborted };
std::string_view terminal_name(Terminal t) noexcept;
Terminal parse_terminal(std::string_view s);

struct ReasoningStep {
  int index = 0;
  std::string thought;
  std::vector<FunctionCall> calls;
  std::vector<ToolResult> results;

  bool operator==(const ReasoningStep&) const = default;
};

struct ReasoningTrace {
  std::string id;
  std::string question;
  std::vector<ReasoningStep> steps;
  std::optional<std::string> final_answer;
  Terminal terminal = Terminal::kAborted;
  std::string abort_reason;
  // P_i for each step, in the order tools were added.
  std::vector<std::vector<std::string>> available_tools;
  int generations = 0;

  bool operator==(const ReasoningTrace&) const = default;
};

// {"id", "question", "steps": [{"i", "thought", "calls": [{"id","name","arguments"}],
//  "results": [{"id","status","payload","summarized"}]}], "final_answer",
//  "terminal", "available_tools", "abort_reason"?, "generations"}
Json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const Json& doc);

// Step results and calls pair up 1:1 by id, indices run 1..n, P_i never
// shrinks, and a finished trace ends with a terminal call and has an answer.
// Returns the first problem found, or an empty string.
std::string check_trace_well_formed(const ReasoningTrace& trace);

enum class ThoughtMode { kWithThoughts, kNoThoughts };
enum class AnswerMode { kOpenEnded, kMultipleChoice };

struct AgentConfig {
  int max_steps = 30;
  std::size_t summarize_threshold_chars = 2048;
  int toolrag_k = 5;
  ThoughtMode thought_mode = ThoughtMode::kWithThoughts;
  AnswerMode answer_mode = AnswerMode::kOpenEnded;
  std::uint64_t seed = 0;
  std::chrono::milliseconds timeout{0};  // 0 = none
  Sampling sampling;
};

struct AgentServices {
  ChatService& model;
  Gateway& gateway;
  ChatService* summarizer = nullptr;  // defaults to `model`
};

// The system prompt with the descriptions of `tools` substituted.
std::string agent_system_prompt(const Registry& registry, const std::vector<std::string>& tools);

// Assistant turn for one step: "<thought> [TOOL_CALLS][{"id","name","arguments"}...]".
std::string render_assistant_turn(const ReasoningStep& step, bool with_ids = true);
// Tool turn for one step: [{"id", "content"}...].
std::string render_tool_turn(const ReasoningStep& step);

// Extracts function calls from model text: the JSON after [TOOL_CALLS] when
// present, otherwise the first JSON array or object in the text. Each call
// gets a fresh 8-character id from `rng`. Throws Error(kParse) when no JSON is
// found, the JSON is malformed, or a call lacks a name or object arguments.
std::vector<FunctionCall> parse_function_calls(std::string_view text, Rng& rng);

struct StepProposal {
  std::string thought;
  std::vector<FunctionCall> calls;
  std::optional<std::string> final_answer;
  std::string raw;
};

// Splits one model reply. With the marker present the text after it (minus
// any call JSON) is the answer. Throws Error(kParse) otherwise when no calls
// parse.
StepProposal parse_step_reply(const std::string& text, Rng& rng);

// The request for the next step given the trace so far and P_i. `forced`
// injects the final-answer instruction.
ChatRequest build_step_request(const std::string& question, const ReasoningTrace& trace, const Registry& registry,
                               const std::vector<std::string>& tools, const AgentConfig& config, bool forced);

// One generation: prompt from (Q, R_{1:i-1}, P_i), reply parsed.
StepProposal generate_step(const std::string& question, const ReasoningTrace& trace, const Registry& registry,
                           const std::vector<std::string>& tools, ChatService& chat, Rng& rng,
                           const AgentConfig& config = {});

std::string summarization_prompt(const std::string& thought, const FunctionCall& call, const ToolResult& result);

// Replaces an over-threshold payload with a summary. On summarizer failure the
// original is returned and *failed is set.
ToolResult summarize_result(const std::string& thought, const FunctionCall& call, const ToolResult& result,
                            ChatService& chat, std::size_t threshold, bool* failed = nullptr);

ReasoningTrace run_inference(const std::string& question, const Registry& registry, AgentServices services,
                             const AgentConfig& config = {});
ReasoningTrace run_inference_no_thought(const std::string& question, const Registry& registry,
                                        AgentServices services, const AgentConfig& config = {});

// Letter -> option text.
using Options = std::map<std::string, std::string>;

// "A. text" lines, one per option.
std::string render_options(const Options& options);

// Reads a committed option letter straight from text: a bare letter, or a
// phrase like "answer is B" / "Answer: (B)", or a single distinct option
// letter standing alone. nullopt if none or ambiguous.
std::optional<std::string> extract_choice_letter(std::string_view text, const Options& options);

std::string choice_mapping_prompt(const std::string& question, const Options& options, const std::string& open_answer);

// Asks `chat` which option the open answer supports. nullopt means invalid.
std::optional<std::string> map_answer_to_choice(const std::string& question, const Options& options,
                                                const std::string& open_answer, ChatService& chat);

}  // namespace toolverse
