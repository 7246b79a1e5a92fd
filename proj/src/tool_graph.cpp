#include "toolverse/tool_graph.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <tuple>
#include <thread>

#include "toolverse/error.hpp"

namespace toolverse {

void ToolGraph::add_node(const std::string& name) {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), name);
  if (it == nodes_.end() || *it != name) nodes_.insert(it, name);
}

bool ToolGraph::has_node(std::string_view name) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), name, std::less<>());
}

void ToolGraph::add_edge(ToolEdge edge) {
  if (edge.src == edge.dst) throw Error(ErrorCode::kInvalidArgument, "self-loop on " + edge.src);
  if (!has_node(edge.src) || !has_node(edge.dst)) {
    throw Error(ErrorCode::kInvalidArgument, "edge " + edge.src + " -> " + edge.dst + " has an unknown endpoint");
  }
  auto less = [](const ToolEdge& a, const ToolEdge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); };
  auto it = std::lower_bound(edges_.begin(), edges_.end(), edge, less);
  if (it != edges_.end() && it->src == edge.src && it->dst == edge.dst) {
    *it = std::move(edge);
  } else {
    edges_.insert(it, std::move(edge));
  }
}

bool ToolGraph::has_edge(std::string_view src, std::string_view dst) const {
  return std::any_of(edges_.begin(), edges_.end(), [&](const ToolEdge& e) { return e.src == src && e.dst == dst; });
}

std::vector<std::string> ToolGraph::successors(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& e : edges_) {
    if (e.src == name) out.push_back(e.dst);
  }
  return out;
}

Json ToolGraph::to_json() const {
  Json edges = Json::array();
  for (const auto& e : edges_) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"rationale", e.rationale}});
  return Json{{"nodes", nodes_}, {"edges", edges}};
}

ToolGraph ToolGraph::from_json(const Json& doc) {
  ToolGraph g;
  try {
    for (const auto& n : doc.at("nodes")) g.add_node(n.get<std::string>());
    for (const auto& e : doc.at("edges")) {
      g.add_edge({e.at("src").get<std::string>(), e.at("dst").get<std::string>(), e.value("rationale", "")});
    }
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::kParse, std::string("malformed tool graph: ") + ex.what());
  }
  return g;
}

bool graph_matches_registry(const ToolGraph& graph, const Registry& registry) {
  for (const auto& n : graph.nodes()) {
    if (!registry.contains(n)) return false;
  }
  for (const auto& e : graph.edges()) {
    if (!registry.contains(e.src) || !registry.contains(e.dst)) return false;
  }
  return true;
}

EdgeCache::EdgeCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  for (const auto& doc : read_jsonl(path_)) {
    EdgeVerdict v;
    v.src = doc.at("src").get<std::string>();
    v.dst = doc.at("dst").get<std::string>();
    v.verdict = doc.at("verdict").get<bool>();
    v.rationale = doc.value("rationale", "");
    v.model = doc.value("model", "");
    v.prompt_hash = doc.value("prompt_hash", "");
    entries_[key(v.src, v.dst, v.model, v.prompt_hash)] = v;
  }
}

std::string EdgeCache::key(const std::string& src, const std::string& dst, const std::string& model,
                           const std::string& prompt_hash) {
  return src + '\x1f' + dst + '\x1f' + model + '\x1f' + prompt_hash;
}

std::optional<EdgeVerdict> EdgeCache::find(const std::string& src, const std::string& dst, const std::string& model,
                                           const std::string& prompt_hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key(src, dst, model, prompt_hash));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EdgeCache::append(const EdgeVerdict& v) {
  Json doc = Json::object();
  doc["src"] = v.src;
  doc["dst"] = v.dst;
  doc["verdict"] = v.verdict;
  doc["rationale"] = v.rationale;
  doc["model"] = v.model;
  doc["prompt_hash"] = v.prompt_hash;
  std::lock_guard lock(mu_);
  entries_[key(v.src, v.dst, v.model, v.prompt_hash)] = v;
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path_.string());
  out << doc.dump() << "\n";
}

std::size_t EdgeCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

namespace {

constexpr std::string_view kJudgeTemplate =
    "Decide whether the output of tool A can serve as the input of tool B.\n\n"
    "Tool A:\n{producer}\n\nTool B:\n{consumer}\n\n"
    "Answer with exactly one word: YES if some output of tool A can be passed as an argument of tool B, "
    "NO otherwise.";

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

std::string tool_graph_judge_prompt(const ToolSpec& producer, const ToolSpec& consumer) {
  auto text = replace_all(std::string(kJudgeTemplate), "{producer}", tool_description_json(producer).dump());
  return replace_all(std::move(text), "{consumer}", tool_description_json(consumer).dump());
}

std::string tool_graph_prompt_hash() { return hash_hex(kJudgeTemplate); }

std::optional<bool> parse_judge_verdict(std::string_view reply) {
  auto t = to_lower(trim(reply));
  if (!t.empty() && t.back() == '.') t.pop_back();
  if (t == "yes") return true;
  if (t == "no") return false;
  return std::nullopt;
}

namespace {

using Pair = std::pair<std::string, std::string>;

ToolGraph judge_pairs(ToolGraph graph, const Registry& registry, ChatService& judge, const std::vector<Pair>& pairs,
                      const GraphBuildOptions& options, GraphBuildReport* report) {
  const auto model = judge.model_id();
  const auto prompt_hash = tool_graph_prompt_hash();
  std::vector<std::optional<EdgeVerdict>> verdicts(pairs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> judged{0}, cached{0};
  std::mutex mu;
  std::vector<Pair> skipped;
  std::optional<std::string> failure;

  auto log = [&](const std::string& msg) {
    if (options.log) {
      std::lock_guard lock(mu);
      options.log(msg);
    }
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      const auto& [src, dst] = pairs[i];
      if (options.cache) {
        if (auto hit = options.cache->find(src, dst, model, prompt_hash)) {
          verdicts[i] = *hit;
          ++cached;
          continue;
        }
      }
      ChatRequest req;
      req.messages.push_back({Role::kUser, tool_graph_judge_prompt(registry.at(src), registry.at(dst))});
      req.sampling.max_tokens = 4;
      std::optional<std::string> reply;
      for (int attempt = 0; attempt < std::max(1, options.attempts_per_pair) && !reply; ++attempt) {
        try {
          reply = judge.chat(req);
        } catch (const TransportError& e) {
          log("judge transport failure on " + src + " -> " + dst + ": " + e.what());
        }
      }
      if (!reply) {
        std::lock_guard lock(mu);
        if (!failure) failure = "judge unreachable for " + src + " -> " + dst;
        continue;
      }
      ++judged;
      auto verdict = parse_judge_verdict(*reply);
      if (!verdict) {
        log("skipping " + src + " -> " + dst + ": unparseable verdict '" + *reply + "'");
        std::lock_guard lock(mu);
        skipped.emplace_back(src, dst);
        continue;
      }
      EdgeVerdict v{src, dst, *verdict, trim(*reply), model, prompt_hash};
      if (options.cache) options.cache->append(v);
      verdicts[i] = std::move(v);
    }
  };

  const auto n = static_cast<std::size_t>(std::max(1, options.parallelism));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < std::min(n, pairs.size()); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  if (report) {
    report->judged += judged;
    report->cached += cached;
    std::sort(skipped.begin(), skipped.end());
    report->skipped.insert(report->skipped.end(), skipped.begin(), skipped.end());
  }
  if (failure) throw TransportError(*failure);
  for (auto& v : verdicts) {
    if (v && v->verdict) graph.add_edge({v->src, v->dst, v->rationale});
  }
  return graph;
}

}  // namespace

ToolGraph build_tool_graph(const Registry& registry, ChatService& judge, const GraphBuildOptions& options,
                           GraphBuildReport* report) {
  ToolGraph graph;
  auto names = registry.api_tool_names();
  for (const auto& n : names) graph.add_node(n);
  std::vector<Pair> pairs;
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a != b) pairs.emplace_back(a, b);
    }
  }
  return judge_pairs(std::move(graph), registry, judge, pairs, options, report);
}

ToolGraph patch_tool_graph(const ToolGraph& previous, const Registry& registry, ChatService& judge,
                           const std::vector<std::string>& changed, const GraphBuildOptions& options,
                           GraphBuildReport* report) {
  auto names = registry.api_tool_names();
  std::set<std::string> dirty(changed.begin(), changed.end());
  for (const auto& n : names) {
    if (!previous.has_node(n)) dirty.insert(n);
  }
  ToolGraph graph;
  for (const auto& n : names) graph.add_node(n);
  for (const auto& e : previous.edges()) {
    if (graph.has_node(e.src) && graph.has_node(e.dst) && !dirty.count(e.src) && !dirty.count(e.dst)) {
      graph.add_edge(e);
    }
  }
  std::vector<Pair> pairs;
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a != b && (dirty.count(a) || dirty.count(b))) pairs.emplace_back(a, b);
    }
  }
  return judge_pairs(std::move(graph), registry, judge, pairs, options, report);
}

ToolChain sample_tool_chain(const ToolGraph& graph, const std::string& start, int length, std::uint64_t seed) {
  if (length < 1) throw Error(ErrorCode::kInvalidArgument, "chain length must be >= 1");
  if (!graph.has_node(start)) throw Error(ErrorCode::kInvalidArgument, "start tool '" + start + "' is not in the graph");
  Rng rng(derive_seed(seed, "tool-chain:" + start));
  ToolChain chain;
  chain.tools.push_back(start);
  std::set<std::string> visited{start};
  while (static_cast<int>(chain.tools.size()) < length) {
    std::vector<std::string> options;
    for (auto& s : graph.successors(chain.tools.back())) {
      if (!visited.count(s)) options.push_back(std::move(s));
    }
    if (options.empty()) {
      chain.truncated = true;
      break;
    }
    auto pick = options[rng.index(options.size())];
    visited.insert(pick);
    chain.tools.push_back(std::move(pick));
  }
  return chain;
}

}  // namespace toolverse
