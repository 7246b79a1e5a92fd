#include "toolverse/toolrag.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include "toolverse/error.hpp"

namespace toolverse {

EmbeddingIndex::EmbeddingIndex(std::size_t dimension, std::string fingerprint)
    : dimension_(dimension), fingerprint_(std::move(fingerprint)) {}

void EmbeddingIndex::add(const std::string& name, EmbeddingVector vector) {
  if (vector.dimension() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding for " + name + " has dimension " +
                                                   std::to_string(vector.dimension()) + ", index has " +
                                                   std::to_string(dimension_));
  }
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw Error(ErrorCode::kDuplicateName, "index already holds " + name);
  }
  names_.push_back(name);
  vectors_.push_back(std::move(vector));
}

void EmbeddingIndex::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  Json manifest = {{"dimension", dimension_}, {"fingerprint", fingerprint_}, {"names", names_}};
  std::string blob;
  blob.reserve(names_.size() * dimension_ * 4);
  for (const auto& v : vectors_) {
    for (float f : v.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
  }
  write_file(dir / "vectors.f32", blob);
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

EmbeddingIndex EmbeddingIndex::load(const std::filesystem::path& dir) {
  Json manifest;
  try {
    manifest = Json::parse(read_file(dir / "manifest.json"));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, (dir / "manifest.json").string() + ": " + e.what());
  }
  std::size_t dim = 0;
  std::string fingerprint;
  std::vector<std::string> names;
  try {
    dim = manifest.at("dimension").get<std::size_t>();
    fingerprint = manifest.at("fingerprint").get<std::string>();
    names = manifest.at("names").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed index manifest: ") + e.what());
  }
  auto blob = read_file(dir / "vectors.f32");
  if (blob.size() != names.size() * dim * 4) {
    throw Error(ErrorCode::kDimensionMismatch, "vectors.f32 holds " + std::to_string(blob.size()) +
                                                   " bytes, manifest implies " +
                                                   std::to_string(names.size() * dim * 4));
  }
  EmbeddingIndex index(dim, fingerprint);
  std::size_t off = 0;
  for (const auto& name : names) {
    EmbeddingVector v;
    v.values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i, off += 4) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[off + b])) << (8 * b);
      std::memcpy(&v.values[i], &bits, 4);
    }
    index.add(name, std::move(v));
  }
  return index;
}

EmbeddingIndex build_index(const Registry& registry, EmbeddingService& embedder) {
  auto names = registry.api_tool_names();
  if (names.empty()) return EmbeddingIndex(0, embedder.fingerprint());
  std::vector<std::string> texts;
  texts.reserve(names.size());
  for (const auto& n : names) texts.push_back(render_tool_text(registry.at(n)));
  auto vectors = embedder.embed(texts);
  EmbeddingIndex index(vectors.front().dimension(), embedder.fingerprint());
  for (std::size_t i = 0; i < names.size(); ++i) index.add(names[i], std::move(vectors[i]));
  return index;
}

double cosine_similarity(const std::vector<float>& q, const std::vector<float>& e) {
  double dot = 0.0, qq = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    dot += static_cast<double>(q[i]) * static_cast<double>(e[i]);
    qq += static_cast<double>(q[i]) * static_cast<double>(q[i]);
    ee += static_cast<double>(e[i]) * static_cast<double>(e[i]);
  }
  if (qq == 0.0 || ee == 0.0) return 0.0;
  return dot / (std::sqrt(qq) * std::sqrt(ee));
}

Retrieval retrieve_by_vector(const EmbeddingIndex& index, const std::vector<float>& query, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (index.empty()) throw Error(ErrorCode::kPrecondition, "retrieval from an empty index");
  if (query.size() != index.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "query has dimension " + std::to_string(query.size()) +
                                                   ", index has " + std::to_string(index.dimension()));
  }
  const auto& names = index.names();
  std::vector<double> scores(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) scores[i] = cosine_similarity(query, index.vectors()[i].values);
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  auto n = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return names[a] < names[b];
                    });
  Retrieval out;
  out.truncated = static_cast<std::size_t>(k) > names.size();
  for (std::size_t i = 0; i < n; ++i) {
    out.names.push_back(names[order[i]]);
    out.scores.push_back(scores[order[i]]);
  }
  return out;
}

Retrieval retrieve(const EmbeddingIndex& index, const std::string& requirement, int k, EmbeddingService& embedder) {
  if (embedder.fingerprint() != index.fingerprint()) {
    throw Error(ErrorCode::kFingerprintMismatch, "index was built with '" + index.fingerprint() +
                                                     "', query embedder is '" + embedder.fingerprint() + "'");
  }
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (index.empty()) throw Error(ErrorCode::kPrecondition, "retrieval from an empty index");
  auto q = embedder.embed({requirement});
  return retrieve_by_vector(index, q.front().values, k);
}

Retriever make_retriever(const EmbeddingIndex& index, EmbeddingService& embedder) {
  return [&index, &embedder](const std::string& requirement, int k) {
    return retrieve(index, requirement, k, embedder).names;
  };
}

std::vector<RetrievalPair> extract_training_pairs(const std::vector<ReasoningTrace>& traces, const Registry& registry) {
  std::vector<RetrievalPair> pairs;
  for (const auto& trace : traces) {
    for (std::size_t s = 0; s < trace.steps.size(); ++s) {
      const auto& step = trace.steps[s];
      for (std::size_t k = 0; k < step.calls.size() && k < step.results.size(); ++k) {
        const auto& call = step.calls[k];
        const auto& result = step.results[k];
        if (call.tool_name != kToolRag || result.status != ResultStatus::kOk || !result.payload.is_array()) continue;
        if (!call.arguments.contains("description") || !call.arguments["description"].is_string()) continue;
        auto requirement = call.arguments["description"].get<std::string>();
        std::set<std::string> emitted;
        for (const auto& n : result.payload) {
          if (!n.is_string()) continue;
          auto name = n.get<std::string>();
          if (emitted.count(name) || !registry.contains(name)) continue;
          bool used = false;
          for (std::size_t later = s + 1; later < trace.steps.size() && !used; ++later) {
            for (const auto& c : trace.steps[later].calls) used = used || c.tool_name == name;
          }
          if (!used) continue;
          emitted.insert(name);
          pairs.push_back({requirement, name, render_tool_text(registry.at(name)), trace.id, step.index});
        }
      }
    }
  }
  return pairs;
}

Json retrieval_pair_to_json(const RetrievalPair& pair) {
  return {{"requirement", pair.requirement},
          {"positive", pair.tool_description},
          {"trace_id", pair.trace_id},
          {"step", pair.step}};
}

void write_training_pairs(const std::filesystem::path& path, const std::vector<RetrievalPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += retrieval_pair_to_json(p).dump() + "\n";
  write_file(path, out);
}

}  // namespace toolverse
