#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/registry.hpp"

namespace toolverse {

inline constexpr std::array<std::string_view, 5> kBenchmarkFamilies = {"original", "brand", "generic", "description",
                                                                       "treatment"};

struct BenchmarkItem {
  std::string id;
  std::string question;
  Options options;
  std::string correct;
  std::string task;
  std::string family;
  std::vector<std::string> acceptable_drugs;  // description family only
};

// Throws Error(kSchemaViolation) naming the line when an item breaks the
// format: 2-5 options, correct among them, known family, and acceptable_drugs
// for description items.
BenchmarkItem benchmark_item_from_json(const Json& doc, std::size_t line = 0);
Json benchmark_item_to_json(const BenchmarkItem& item);
std::vector<BenchmarkItem> load_benchmark(const std::filesystem::path& path);
std::map<std::string, std::size_t> family_counts(const std::vector<BenchmarkItem>& items);

enum class Verdict { kCorrect, kIncorrect, kInvalid };
std::string_view verdict_name(Verdict v) noexcept;

struct EvalOutcome {
  std::string item_id;
  std::string task;
  Verdict verdict = Verdict::kInvalid;
  std::optional<std::string> predicted;
  // Description family: step-1 result and the ungated step-2 verdict.
  std::optional<std::string> identified_drug;
  bool drug_correct = false;
  bool near_miss = false;
  std::optional<Verdict> ungated;
  int steps = 0;
  int tool_calls = 0;
  std::string trace_path;
  std::string error;
};

Json eval_outcome_to_json(const EvalOutcome& o);

// Runs the agent on one prompt and returns its trace.
using AgentRunner = std::function<ReasoningTrace(const std::string& prompt)>;

AgentRunner make_agent_runner(const Registry& registry, AgentServices services, AgentConfig config);

struct EvalOptions {
  int concurrency = 1;
  std::chrono::milliseconds item_timeout{300000};
  std::optional<std::filesystem::path> trace_dir;
  ChatService* mapper = nullptr;  // answer -> option letter fallback
};

std::string multiple_choice_prompt(const BenchmarkItem& item);
std::string drug_identification_prompt(const BenchmarkItem& item);

// Case-insensitive exact match against acceptable_drugs. A miss that is
// within edit distance 2 of a name, or contains or is contained by one, is
// a near miss.
bool drug_matches(const std::string& answer, const std::vector<std::string>& acceptable, bool* near_miss = nullptr);

std::vector<EvalOutcome> evaluate_multiple_choice(const std::vector<BenchmarkItem>& items, const AgentRunner& agent,
                                                  const EvalOptions& options = {});
std::vector<EvalOutcome> evaluate_open_ended(const std::vector<BenchmarkItem>& items, const AgentRunner& agent,
                                             const EvalOptions& options = {});
// Gated verdict: correct only when the drug is identified and the letter is
// right; invalid when no letter is committed.
std::vector<EvalOutcome> evaluate_description_two_step(const std::vector<BenchmarkItem>& items,
                                                       const AgentRunner& agent, const EvalOptions& options = {});

struct OutcomeSet {
  std::string name;
  std::vector<EvalOutcome> outcomes;
};

struct Tally {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t invalid = 0;

  [[nodiscard]] double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
  [[nodiscard]] double invalid_rate() const { return total ? static_cast<double>(invalid) / total : 0.0; }
};

struct SetMetrics {
  std::string name;
  Tally tally;
  std::map<std::string, Tally> per_task;
  double mean_steps = 0.0;
  double mean_tool_calls = 0.0;
  // Present when the set holds description outcomes.
  std::optional<double> drug_id_accuracy;
  std::optional<double> ungated_accuracy;
};

struct MetricsReport {
  std::vector<SetMetrics> sets;
  // Population variance of the sets' accuracies in percent.
  double accuracy_variance = 0.0;
};

double population_variance(const std::vector<double>& values);

// Throws Error(kInvalidArgument) on no sets or an empty set.
MetricsReport compute_metrics(const std::vector<OutcomeSet>& sets);
Json metrics_to_json(const MetricsReport& report);
std::string render_metrics_table(const MetricsReport& report);

// Tool-name manifest: a JSON array.
std::vector<std::string> load_subset_manifest(const std::filesystem::path& path);
// One registry per manifest; throws Error(kInvalidArgument) unless each
// manifest contains the previous one.
std::vector<Registry> nested_subsets(const Registry& registry, const std::vector<std::vector<std::string>>& manifests);

}  // namespace toolverse
