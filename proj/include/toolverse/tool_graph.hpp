#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"

namespace toolverse {

struct ToolEdge {
  std::string src;
  std::string dst;
  std::string rationale;

  bool operator==(const ToolEdge&) const = default;
};

// Directed producer -> consumer graph over tool names.
class ToolGraph {
 public:
  void add_node(const std::string& name);
  // Throws Error(kInvalidArgument) on a self-loop or an unknown endpoint.
  void add_edge(ToolEdge edge);

  [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<ToolEdge>& edges() const { return edges_; }
  [[nodiscard]] bool has_node(std::string_view name) const;
  [[nodiscard]] bool has_edge(std::string_view src, std::string_view dst) const;
  // Sorted successor names.
  [[nodiscard]] std::vector<std::string> successors(std::string_view name) const;

  // {"nodes": [...], "edges": [{"src","dst","rationale"}]}
  [[nodiscard]] Json to_json() const;
  static ToolGraph from_json(const Json& doc);

  bool operator==(const ToolGraph&) const = default;

 private:
  std::vector<std::string> nodes_;  // sorted
  std::vector<ToolEdge> edges_;     // sorted by (src, dst)
};

// True when every node and edge endpoint is a tool of `registry`.
bool graph_matches_registry(const ToolGraph& graph, const Registry& registry);

struct EdgeVerdict {
  std::string src;
  std::string dst;
  bool verdict = false;
  std::string rationale;
  std::string model;
  std::string prompt_hash;
};

// JSON-lines cache of judge verdicts keyed by (src, dst, model, prompt hash).
// Appends are serialized; a missing file is an empty cache.
class EdgeCache {
 public:
  explicit EdgeCache(std::filesystem::path path);

  [[nodiscard]] std::optional<EdgeVerdict> find(const std::string& src, const std::string& dst,
                                                const std::string& model, const std::string& prompt_hash) const;
  void append(const EdgeVerdict& verdict);
  [[nodiscard]] std::size_t size() const;

 private:
  static std::string key(const std::string& src, const std::string& dst, const std::string& model,
                         const std::string& prompt_hash);
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, EdgeVerdict> entries_;
};

std::string tool_graph_judge_prompt(const ToolSpec& producer, const ToolSpec& consumer);
// Hash of the judge prompt template; part of every cache key.
std::string tool_graph_prompt_hash();

// Exactly one token, YES or NO (case-insensitive, optional trailing period).
// Anything else is nullopt.
std::optional<bool> parse_judge_verdict(std::string_view reply);

struct GraphBuildOptions {
  int parallelism = 4;
  int attempts_per_pair = 2;  // judge transport failures
  EdgeCache* cache = nullptr;
  std::function<void(const std::string&)> log;
};

struct GraphBuildReport {
  std::size_t judged = 0;
  std::size_t cached = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // unparseable verdicts
};

// Judges every ordered pair of distinct non-special tools. Edges are exactly
// the YES verdicts. Throws TransportError once all workers are done if any
// pair could not be judged; verdicts obtained so far stay in the cache.
ToolGraph build_tool_graph(const Registry& registry, ChatService& judge, const GraphBuildOptions& options = {},
                           GraphBuildReport* report = nullptr);

// Incremental variant: drops nodes no longer in the registry, keeps verdicts
// between unchanged tools, and re-judges every pair that touches a tool in
// `changed` or a tool new to the graph.
ToolGraph patch_tool_graph(const ToolGraph& previous, const Registry& registry, ChatService& judge,
                           const std::vector<std::string>& changed, const GraphBuildOptions& options = {},
                           GraphBuildReport* report = nullptr);

struct ToolChain {
  std::vector<std::string> tools;
  bool truncated = false;  // fewer than `length` tools were reachable
};

// Seeded random walk without revisits along graph edges.
ToolChain sample_tool_chain(const ToolGraph& graph, const std::string& start, int length, std::uint64_t seed);

}  // namespace toolverse
