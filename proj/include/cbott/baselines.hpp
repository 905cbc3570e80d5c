#pragma once

#include "cbott/dataset.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cbott {

enum class TermWeighting { Binary, Tfidf };

const char* weighting_name(TermWeighting w);

// Task-by-term matrix with a trailing 24-column one-hot hour block.
struct FeatureMatrix {
  Matrix rows;                           // n_tasks x (n_terms + 24)
  std::vector<std::string> term_columns; // column dictionary for the term block
  std::vector<int> task_indices;         // row -> task_index
  TermWeighting weighting = TermWeighting::Binary;

  Eigen::Index term_block_width() const { return static_cast<Eigen::Index>(term_columns.size()); }
};

// Binary: 1 iff the term occurs in the task. TF-IDF: raw count times
// ln((1+N)/(1+df)) + 1, with the term block then scaled to unit Euclidean
// norm per row. The hour block is appended unweighted and is excluded from
// the normalization.
FeatureMatrix build_feature_matrix(const std::vector<Task>& tasks, TermWeighting weighting);

// dot(a,b) / (|a||b|); throws DataError on a zero vector.
Scalar cosine_similarity(const Vector& a, const Vector& b);

// Binary document-term cosine between two tasks' distinct content-term
// sets: |A∩B| / sqrt(|A||B|). Returns 0 when either set is empty.
Scalar binary_task_cosine(const Task& a, const Task& b);

struct BaselineRanking {
  std::string method;               // e.g. "dbscan-binary-eps2.0"
  std::vector<int> ordered_tasks;   // task_index, most anomalous first
  std::vector<Scalar> scores;       // per position, method-specific
};

// Density ordering with DBSCAN noise semantics: noise points (fewer than
// min_pts-1 neighbors and no core point within eps) come first; within
// each group, fewer neighbors first, then larger nearest-neighbor
// distance, then task_index.
BaselineRanking dbscan_rank(const FeatureMatrix& features, Scalar eps, int min_pts);

struct OcsvmOptions {
  Scalar nu = 0.5;
  Scalar tolerance = 1e-4;  // max KKT violation at convergence
  int max_sweeps = 10000;
};

struct OcsvmSolution {
  Vector alpha;            // dual variables, sum 1, 0 <= a_i <= 1/(nu n)
  Vector decision_values;  // f(x_i) = (K alpha)_i - rho
  Scalar rho = 0;
  bool converged = false;
  int sweeps = 0;
};

// SMO-style pairwise coordinate descent on the one-class SVM dual with an
// RBF kernel, gamma = 1/n_features ("auto"). Non-convergence degrades to a
// warning; the best iterate is ranked.
OcsvmSolution ocsvm_solve(const Matrix& features, const OcsvmOptions& options);
BaselineRanking ocsvm_rank(const FeatureMatrix& features, const OcsvmOptions& options = {});

struct BaselineSweepConfig {
  Scalar eps_start = 0.5;
  Scalar eps_stop = 10.0;
  Scalar eps_step = 0.5;
  int min_pts = 5;
  Scalar nu = 0.5;

  std::vector<Scalar> eps_grid() const;
};

// DBSCAN over the eps grid on both weightings plus OC-SVM on both, keyed
// by method name (42 rankings under the default grid).
std::map<std::string, BaselineRanking> baseline_sweep(const std::vector<Task>& tasks,
                                                      const BaselineSweepConfig& config);

// Same CSV schema as the ranker report plus a leading method column. Cells
// that only apply to the dual-head model are left empty.
void emit_baseline_csv(const BaselineRanking& ranking, const std::string& host_id,
                       const std::vector<Task>& tasks, std::ostream& out, bool header);

}  // namespace cbott
