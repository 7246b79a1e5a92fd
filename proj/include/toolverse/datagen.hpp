#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/augment.hpp"
#include "toolverse/gateway.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"
#include "toolverse/tool_graph.hpp"
#include "toolverse/toolrag.hpp"

namespace toolverse {

// ---- judges ---------------------------------------------------------------

// First word of the reply is PASS or FAIL (case-insensitive). nullopt otherwise.
std::optional<bool> parse_pass_fail(std::string_view reply);

// ---- ToolGen ----------------------------------------------------------------

enum class ApiFamily { kOpenFda, kOpenTargets, kMonarch };
std::string_view api_family_name(ApiFamily f) noexcept;
ApiFamily parse_api_family(std::string_view s);

std::string summarizer_prompt(const std::string& api_schema, const std::string& database_name);
// Bulleted or numbered lines, markers stripped, deduplicated case-insensitively.
std::vector<std::string> parse_capability_list(std::string_view text);
std::vector<std::string> summarize_api_capabilities(const std::string& api_docs, const std::string& database_name,
                                                    ChatService& chat);

std::string tool_generator_prompt(ApiFamily family, const std::string& api_docs, const std::string& capability);

struct ToolGenResult {
  std::vector<ToolSpec> specs;
  std::vector<std::string> dropped;  // one reason per rejected candidate
};

// Asks for tool documents in registry format. An unparseable reply is retried
// once. Candidates that fail validation, or FDA candidates with nothing to
// search or return, are dropped with a reason.
ToolGenResult generate_tool_spec(const std::string& capability, const std::string& api_docs, ApiFamily family,
                                 ChatService& chat);

std::string tool_checker_prompt(const ToolSpec& spec, const std::string& info, int number,
                                const std::string& examples = {});

struct ToolCheckReport {
  bool pass = false;
  std::string stage;  // mapping | request | generation | call, where it failed
  std::string detail;
  std::vector<FunctionCall> generated_calls;
};

// mapping: the spec validates and compiles for every sample; request: at least
// one sample returns data; generation: the checker produces parseable calls to
// this tool; call: every generated call returns data.
ToolCheckReport check_tool(const ToolSpec& spec, Gateway& gateway, ChatService& chat,
                           const std::vector<Json>& samples, int questions = 3);

// ---- human review queue -----------------------------------------------------

enum class ReviewStatus { kPending, kApproved, kRejected };
std::string_view review_status_name(ReviewStatus s) noexcept;
ReviewStatus parse_review_status(std::string_view s);

struct ReviewItem {
  std::string id;
  std::string kind;  // "tool" or "question"
  ReviewStatus status = ReviewStatus::kPending;
  Json payload;
  std::string note;
};

// JSON file {"items": [{"id","kind","status","payload","note"}]}.
class ReviewQueue {
 public:
  static ReviewQueue load(const std::filesystem::path& path);  // missing file = empty queue
  void save(const std::filesystem::path& path) const;

  // Adds a pending item; an existing id is left untouched. Returns the id.
  std::string submit(const std::string& kind, const std::string& id, Json payload);
  void set_status(const std::string& id, ReviewStatus status, const std::string& note = {});

  [[nodiscard]] std::vector<ReviewItem> with_status(ReviewStatus status, const std::string& kind = {}) const;
  [[nodiscard]] const std::vector<ReviewItem>& items() const { return items_; }

 private:
  std::vector<ReviewItem> items_;
};

// Approved tool items added to `registry`; returns how many were added.
std::size_t activate_approved_tools(const ReviewQueue& queue, Registry& registry);

// ---- ingestion --------------------------------------------------------------

struct DrugLabel {
  std::string set_id;
  std::string generic_name;
  std::string brand_name;
  std::optional<int> approval_year;
  std::optional<int> effective_year;
  std::map<std::string, std::string> fields;  // label section -> text
};

// openFDA label dump: {"results": [...]} or a bare array.
std::vector<DrugLabel> load_fda_labels(const std::filesystem::path& path);
std::vector<DrugLabel> parse_fda_labels(const Json& doc);

struct LeakageSplit {
  std::vector<DrugLabel> kept;
  std::vector<DrugLabel> removed;  // approved after the cutoff or year unknown
};
// Keeps labels whose approval year (else effective year) is <= cutoff_year.
LeakageSplit apply_leakage_cutoff(std::vector<DrugLabel> labels, int cutoff_year = 2023);

struct Association {
  std::string disease;
  std::string drug;
  std::string relation;  // e.g. indication, contraindication
};
// CSV with a header containing disease, drug and relation columns.
std::vector<Association> load_associations(const std::filesystem::path& path);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// One label section chosen uniformly; throws kPrecondition if there is none.
std::pair<std::string, std::string> select_field(const DrugLabel& label, Rng& rng);

// FDA tools that return `field`, sorted.
std::vector<std::string> tools_for_field(const Registry& registry, const std::string& field);

// ---- QuestGen ---------------------------------------------------------------

enum class QuestionType { kDrugCentered, kDiseaseCentered, kToolChain };
std::string_view question_type_name(QuestionType t) noexcept;
QuestionType parse_question_type(std::string_view s);

struct QuestionRecord {
  std::string id;
  std::string question;
  std::optional<Options> options;
  std::string ground_truth;
  std::string explanation;
  QuestionType type = QuestionType::kDrugCentered;
  Json reference_info = Json::object();
  std::vector<std::string> initial_tools;
};

Json question_record_to_json(const QuestionRecord& r);
QuestionRecord question_record_from_json(const Json& doc);
// Throws Error(kSchemaViolation) naming the broken invariant.
void check_question_record(const QuestionRecord& r);

struct QuestionSources {
  // drug-centered
  std::string generic_name;
  std::string brand_name;
  std::string field_name;
  std::string field_text;
  // disease-centered
  std::string disease_info;
  Json drug_info = Json::array();
  // tool-chain
  std::vector<std::string> chain_descriptions;
  Json tool_info = Json::object();
  std::string kg_info;
  // P^_0 candidates found from the reference information
  std::vector<std::string> selected_tools;
};

std::string information_extractor_prompt(const std::string& disease_info, const Json& drug_info);
std::string question_generator_prompt(QuestionType type, const QuestionSources& sources,
                                      const std::string& comparison = {});

// Disease-centered questions first ask for a drug comparison. The generator
// must reply with {"question", "options"?, "answer", "explanation"}; anything
// else throws Error(kParse).
QuestionRecord generate_question(QuestionType type, const QuestionSources& sources, ChatService& chat, Rng& rng);

struct CheckVerdict {
  std::string check;    // grounding | answerability | reasonableness
  std::string verdict;  // pass | fail | inconclusive
  std::string detail;
};

struct QuestionEvaluation {
  bool pass = false;
  std::vector<CheckVerdict> checks;
};

std::string question_check_prompt(const std::string& check, const QuestionRecord& record);
// Three judge calls; any fail or inconclusive fails the question.
QuestionEvaluation evaluate_question(const QuestionRecord& record, ChatService& chat);

// ---- TraceGen ---------------------------------------------------------------

inline constexpr std::string_view kVirtualToolRag = "VirtualToolRAG";

enum class HintVerdict { kContinue, kAnswerCorrect, kAnswerWrong };
std::string_view hint_verdict_name(HintVerdict v) noexcept;

struct SolverHint {
  int step = 0;
  std::string hint;
  HintVerdict verdict = HintVerdict::kContinue;
};

std::string render_trace_text(const ReasoningTrace& trace);
std::string helper_prompt(const QuestionRecord& record, const ReasoningTrace& trace);
std::string answer_judge_prompt(const QuestionRecord& record, const std::string& answer);

// With a proposed answer: letter equality for multiple choice, a judge call
// for open text. A correct answer needs no hint and makes no helper call.
SolverHint helper_hint(const QuestionRecord& record, const ReasoningTrace& trace,
                       const std::optional<std::string>& proposed_answer, ChatService& helper,
                       ChatService* judge = nullptr);

std::string solver_prompt(const QuestionRecord& record, const Registry& registry, const ReasoningTrace& trace,
                          const std::string& hint);

struct TraceGenConfig {
  int max_steps = 15;
  int max_wrong_answers = 2;
  int toolrag_k = 5;
  std::uint64_t seed = 0;
};

struct TraceGenServices {
  ChatService& solver;
  ChatService& helper;
  Gateway& gateway;
  Retriever retriever;  // empty in the first stage: only P^_0 is used
  ChatService* judge = nullptr;
};

struct TraceGenOutcome {
  std::optional<ReasoningTrace> trace;
  std::string rejection;  // no_answer | solver_output | service_error
  std::vector<SolverHint> hints;
  int wrong_answers = 0;
};

// Rewrites a virtual call {"name", "description"} into a ToolRAG call on the
// description. The result is the retriever's top-k with the named tool forced
// in; without a retriever it is just the named tool.
std::pair<FunctionCall, ToolResult> rewrite_virtual_call(const FunctionCall& call, const Retriever& retriever, int k);

TraceGenOutcome generate_trace(const QuestionRecord& record, const Registry& registry, TraceGenServices services,
                               const TraceGenConfig& config = {});

// ---- trace evaluation ---------------------------------------------------------

inline constexpr std::string_view kReasonAnswerWrong = "answer_wrong";
inline constexpr std::string_view kReasonTraceJudgeFail = "trace_judge_fail";
inline constexpr std::string_view kReasonBadCall = "bad_call";
inline constexpr std::string_view kReasonHallucinatedId = "hallucinated_id";
inline constexpr std::string_view kReasonUngroundedAnswer = "ungrounded_answer";
inline constexpr std::string_view kReasonRepeatedThought = "repeated_thought";
inline constexpr std::string_view kReasonRepeatedCall = "repeated_call";

struct TraceEvalConfig {
  double repeat_threshold = 0.9;
};

struct TraceEvaluation {
  bool pass = false;
  std::vector<std::string> reasons;  // distinct codes, in check order
  std::vector<std::string> details;
};

double token_jaccard(std::string_view a, std::string_view b);
// Identifier-like tokens: letters followed by a run of digits (CHEMBL1234),
// optionally joined by '_' or ':' (MONDO_0005148, HP:0001250).
std::vector<std::string> find_identifiers(std::string_view text);
std::string trace_judge_prompt(const ReasoningTrace& trace, const QuestionRecord& record);

TraceEvaluation evaluate_trace(const ReasoningTrace& trace, const QuestionRecord& record, const Registry& registry,
                               ChatService& judge, const TraceEvalConfig& config = {});

// ---- step-wise export ---------------------------------------------------------

struct AugmentConfig {
  bool extend_with_retrieved = true;
  int random_extra_tools = 3;
  bool shuffle = true;
  std::size_t context_limit_chars = 0;  // 0 = no limit
  ChatService* summarizer = nullptr;    // required when a limit is set
  const RephrasePool* rephrase = nullptr;
  std::uint64_t seed = 0;
};

struct TrainingSample {
  std::string system;
  std::string question;
  Json trace_prefix = Json::array();
  std::vector<std::string> tools;
  std::string output;
  int step = 0;
  std::string trace_id;
};

Json training_sample_to_json(const TrainingSample& s);
void write_training_samples(const std::filesystem::path& path, const std::vector<TrainingSample>& samples);

// One prefix step with call ids: {"i","thought","calls","results":[{"id","content"}]}.
Json render_prefix_step(const ReasoningStep& step);
// T_i and C_i without ids; the final form carries the marker and the answer.
std::string render_sample_output(const ReasoningStep& step, const std::optional<std::string>& answer);

// M samples for an M-step finished trace; none when M > max_steps_filter.
std::vector<TrainingSample> export_training_samples(const ReasoningTrace& trace, const Registry& registry,
                                                    const AugmentConfig& augment = {},
                                                    std::optional<int> max_steps_filter = std::nullopt);

// ---- staged ToolRAG orchestration ---------------------------------------------

struct StageReport {
  int round = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t pairs = 0;
};

struct StageHooks {
  // Produces an accepted trace or nullopt for one question; `retriever` is
  // empty in round 0.
  std::function<std::optional<ReasoningTrace>(const QuestionRecord&, const Retriever&)> generate;
  // Trains on all pairs so far and returns the next round's retriever.
  std::function<Retriever(const std::vector<RetrievalPair>&, int round)> retrain;
};

std::vector<StageReport> run_staged_datagen(const std::vector<QuestionRecord>& records, const Registry& registry,
                                            int rounds, const StageHooks& hooks,
                                            std::vector<ReasoningTrace>* traces = nullptr);

}  // namespace toolverse
