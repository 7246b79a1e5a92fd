#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "toolverse/toolrag.hpp"
#include "toolverse/util.hpp"

namespace tvt {

using namespace toolverse;

// Brute-force top-k with Eigen: normalize rows, one matrix-vector product, then
// a full sort by (score desc, name asc).
inline std::vector<std::string> eigen_top_k(const EmbeddingIndex& index, const std::vector<float>& q, int k) {
  const auto n = static_cast<Eigen::Index>(index.size());
  const auto d = static_cast<Eigen::Index>(index.dimension());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = index.vectors()[i].values[j];
  }
  Eigen::VectorXd qv(d);
  for (Eigen::Index j = 0; j < d; ++j) qv(j) = q[j];
  Eigen::VectorXd dots = m * qv;
  Eigen::VectorXd norms = m.rowwise().norm();
  const double qn = qv.norm();
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  auto score = [&](std::size_t i) { return norms(i) == 0 || qn == 0 ? 0.0 : dots(i) / (norms(i) * qn); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double sa = score(a), sb = score(b);
    if (std::abs(sa - sb) > 1e-12) return sa > sb;
    return index.names()[a] < index.names()[b];
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < k; ++i) out.push_back(index.names()[order[i]]);
  return out;
}

// Small integer components make exact ties common.
inline EmbeddingIndex random_index(Rng& rng, std::size_t n, std::size_t d) {
  EmbeddingIndex index(d, "test");
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddingVector v;
    for (std::size_t j = 0; j < d; ++j) v.values.push_back(static_cast<float>(static_cast<int>(rng.index(5)) - 2));
    index.add("tool_" + std::to_string(rng.index(1000000)) + "_" + std::to_string(i), std::move(v));
  }
  return index;
}

}  // namespace tvt
