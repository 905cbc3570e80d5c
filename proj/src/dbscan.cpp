#include "cbott/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cbott {

BaselineRanking dbscan_rank(const FeatureMatrix& features, Scalar eps, int min_pts) {
  if (!(eps > 0)) throw DataError("dbscan eps must be > 0");
  if (min_pts < 1) throw DataError("dbscan min_pts must be >= 1");

  const Eigen::Index n = features.rows.rows();
  std::vector<int> neighbor_count(static_cast<std::size_t>(n), 0);
  std::vector<Scalar> nearest(static_cast<std::size_t>(n), std::numeric_limits<Scalar>::infinity());

  // Pairwise Euclidean distances on full feature rows (term + hour blocks).
  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dist(i, i) = 0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar d = (features.rows.row(i) - features.rows.row(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dist(i, j) <= eps) ++neighbor_count[static_cast<std::size_t>(i)];
      nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], dist(i, j));
    }
  }

  // Core: at least min_pts points within eps counting itself. Noise: not
  // core and no core point within eps.
  std::vector<char> core(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    core[static_cast<std::size_t>(i)] = neighbor_count[static_cast<std::size_t>(i)] >= min_pts - 1;
  std::vector<char> noise(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    bool has_core_neighbor = false;
    for (Eigen::Index j = 0; j < n && !has_core_neighbor; ++j)
      has_core_neighbor = i != j && core[static_cast<std::size_t>(j)] && dist(i, j) <= eps;
    noise[static_cast<std::size_t>(i)] = !core[static_cast<std::size_t>(i)] && !has_core_neighbor;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto ia = static_cast<std::size_t>(a);
    const auto ib = static_cast<std::size_t>(b);
    if (noise[ia] != noise[ib]) return noise[ia] != 0;
    if (neighbor_count[ia] != neighbor_count[ib]) return neighbor_count[ia] < neighbor_count[ib];
    if (nearest[ia] != nearest[ib]) return nearest[ia] > nearest[ib];
    return features.task_indices[ia] < features.task_indices[ib];
  });

  BaselineRanking ranking;
  ranking.ordered_tasks.reserve(static_cast<std::size_t>(n));
  ranking.scores.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index idx : order) {
    ranking.ordered_tasks.push_back(features.task_indices[static_cast<std::size_t>(idx)]);
    ranking.scores.push_back(static_cast<Scalar>(neighbor_count[static_cast<std::size_t>(idx)]));
  }
  return ranking;
}

}  // namespace cbott
