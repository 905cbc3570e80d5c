#include "cbott/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace cbott {

namespace {

Matrix rbf_kernel(const Matrix& features) {
  const Eigen::Index n = features.rows();
  const Scalar gamma = Scalar(1) / static_cast<Scalar>(features.cols());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Scalar sq = (features.row(i) - features.row(j)).squaredNorm();
      const Scalar v = std::exp(-gamma * sq);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

// Offset so that f(x) = 0 on the margin: mean gradient over free support
// vectors, else the midpoint of the bound gradients.
Scalar compute_rho(const Vector& alpha, const Vector& grad, Scalar upper) {
  Scalar free_sum = 0;
  int free_count = 0;
  Scalar lo = -std::numeric_limits<Scalar>::infinity();
  Scalar hi = std::numeric_limits<Scalar>::infinity();
  const Scalar margin = upper * 1e-9;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) > margin && alpha(i) < upper - margin) {
      free_sum += grad(i);
      ++free_count;
    } else if (alpha(i) >= upper - margin) {
      lo = std::max(lo, grad(i));
    } else {
      hi = std::min(hi, grad(i));
    }
  }
  if (free_count > 0) return free_sum / free_count;
  if (std::isfinite(lo) && std::isfinite(hi)) return (lo + hi) / 2;
  return std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0);
}

}  // namespace

OcsvmSolution ocsvm_solve(const Matrix& features, const OcsvmOptions& options) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw DataError("one-class SVM requires at least 2 points");
  if (!(options.nu > 0 && options.nu <= 1)) throw DataError("ocsvm nu must be in (0, 1]");

  const Matrix kernel = rbf_kernel(features);
  const Scalar upper = Scalar(1) / (options.nu * static_cast<Scalar>(n));

  // Standard initialization: fill the first floor(nu*n) entries at the box
  // bound, the remainder fraction on the next, so sum(alpha) = 1 exactly.
  OcsvmSolution sol;
  sol.alpha = Vector::Zero(n);
  {
    Scalar remaining = 1;
    for (Eigen::Index i = 0; i < n && remaining > 0; ++i) {
      const Scalar a = std::min(upper, remaining);
      sol.alpha(i) = a;
      remaining -= a;
    }
  }

  // Gradient of (1/2) a'Ka is Ka; KKT optimality is
  // max_{a_i > 0} g_i - min_{a_i < upper} g_i <= tolerance.
  Vector grad = kernel * sol.alpha;

  const Scalar tau = 1e-12;
  for (sol.sweeps = 0; sol.sweeps < options.max_sweeps; ++sol.sweeps) {
    Eigen::Index up = -1, low = -1;
    Scalar g_min = std::numeric_limits<Scalar>::infinity();
    Scalar g_max = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (sol.alpha(i) < upper && grad(i) < g_min) {
        g_min = grad(i);
        up = i;
      }
      if (sol.alpha(i) > 0 && grad(i) > g_max) {
        g_max = grad(i);
        low = i;
      }
    }
    if (up < 0 || low < 0 || g_max - g_min < options.tolerance) {
      sol.converged = true;
      break;
    }

    const Scalar denom = std::max(kernel(up, up) + kernel(low, low) - 2 * kernel(up, low), tau);
    Scalar delta = (g_max - g_min) / denom;
    delta = std::min(delta, upper - sol.alpha(up));
    delta = std::min(delta, sol.alpha(low));
    sol.alpha(up) += delta;
    sol.alpha(low) -= delta;
    grad += delta * (kernel.col(up) - kernel.col(low));
  }

  if (!sol.converged)
    std::cerr << "warning: one-class SVM did not converge in " << options.max_sweeps
              << " sweeps; ranking the best iterate\n";

  sol.rho = compute_rho(sol.alpha, grad, upper);
  sol.decision_values = grad - Vector::Constant(n, sol.rho);
  return sol;
}

BaselineRanking ocsvm_rank(const FeatureMatrix& features, const OcsvmOptions& options) {
  if (features.rows.rows() == 1) {
    BaselineRanking singleton;
    singleton.ordered_tasks = {features.task_indices.front()};
    singleton.scores = {0};
    return singleton;
  }
  const OcsvmSolution sol = ocsvm_solve(features.rows, options);

  const std::size_t n = static_cast<std::size_t>(features.rows.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Scalar da = sol.decision_values(static_cast<Eigen::Index>(a));
    const Scalar db = sol.decision_values(static_cast<Eigen::Index>(b));
    if (da != db) return da < db;  // most negative first
    return features.task_indices[a] < features.task_indices[b];
  });

  BaselineRanking ranking;
  ranking.ordered_tasks.reserve(n);
  ranking.scores.reserve(n);
  for (std::size_t idx : order) {
    ranking.ordered_tasks.push_back(features.task_indices[idx]);
    ranking.scores.push_back(sol.decision_values(static_cast<Eigen::Index>(idx)));
  }
  return ranking;
}

}  // namespace cbott
