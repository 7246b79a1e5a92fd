#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/gateway.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"

namespace toolverse {

// Tool name -> embedding, all of one dimension, tied to the embedder that
// produced them.
class EmbeddingIndex {
 public:
  EmbeddingIndex(std::size_t dimension, std::string fingerprint);

  // Throws kDimensionMismatch or kDuplicateName.
  void add(const std::string& name, EmbeddingVector vector);

  [[nodiscard]] std::size_t size() const { return names_.size(); }
  [[nodiscard]] bool empty() const { return names_.empty(); }
  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const std::string& fingerprint() const { return fingerprint_; }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] const std::vector<EmbeddingVector>& vectors() const { return vectors_; }

  // <dir>/manifest.json {"dimension","fingerprint","names"} and
  // <dir>/vectors.f32, row-major little-endian float32 in names order.
  void save(const std::filesystem::path& dir) const;
  static EmbeddingIndex load(const std::filesystem::path& dir);

  bool operator==(const EmbeddingIndex&) const = default;

 private:
  std::size_t dimension_;
  std::string fingerprint_;
  std::vector<std::string> names_;
  std::vector<EmbeddingVector> vectors_;
};

// Embeds the rendered text of every non-special tool in one batch. Nothing is
// returned unless all embeddings succeed.
EmbeddingIndex build_index(const Registry& registry, EmbeddingService& embedder);

struct Retrieval {
  std::vector<std::string> names;
  std::vector<double> scores;
  bool truncated = false;  // k exceeded the index size
};

// dot(q, e) / (|q| |e|) in double, accumulated in component order; 0 when
// either norm is 0.
double cosine_similarity(const std::vector<float>& q, const std::vector<float>& e);

// Top-k by cosine, descending, ties by name ascending.
Retrieval retrieve_by_vector(const EmbeddingIndex& index, const std::vector<float>& query, int k);
// Throws kFingerprintMismatch when `embedder` is not the index's embedder.
Retrieval retrieve(const EmbeddingIndex& index, const std::string& requirement, int k, EmbeddingService& embedder);

// Adapter for the gateway's ToolRAG tool. Both references must outlive it.
Retriever make_retriever(const EmbeddingIndex& index, EmbeddingService& embedder);

struct RetrievalPair {
  std::string requirement;
  std::string tool_name;
  std::string tool_description;
  std::string trace_id;
  int step = 0;

  bool operator==(const RetrievalPair&) const = default;
};

// One pair per tool returned by a ToolRAG call and invoked in a later step.
std::vector<RetrievalPair> extract_training_pairs(const std::vector<ReasoningTrace>& traces, const Registry& registry);

// {"requirement","positive","trace_id","step"}
Json retrieval_pair_to_json(const RetrievalPair& pair);
void write_training_pairs(const std::filesystem::path& path, const std::vector<RetrievalPair>& pairs);

}  // namespace toolverse
