#include "cbott/baselines.hpp"

#include <cmath>
#include <cstdio>

namespace cbott {

std::vector<Scalar> BaselineSweepConfig::eps_grid() const {
  std::vector<Scalar> grid;
  // Integer stepping avoids accumulating float error across the grid.
  const int steps = static_cast<int>(std::floor((eps_stop - eps_start) / eps_step + 1e-9));
  for (int i = 0; i <= steps; ++i) grid.push_back(eps_start + static_cast<Scalar>(i) * eps_step);
  return grid;
}

std::map<std::string, BaselineRanking> baseline_sweep(const std::vector<Task>& tasks,
                                                      const BaselineSweepConfig& config) {
  std::map<std::string, BaselineRanking> out;
  for (TermWeighting weighting : {TermWeighting::Binary, TermWeighting::Tfidf}) {
    const FeatureMatrix features = build_feature_matrix(tasks, weighting);

    for (Scalar eps : config.eps_grid()) {
      char name[64];
      std::snprintf(name, sizeof(name), "dbscan-%s-eps%.1f", weighting_name(weighting),
                    static_cast<double>(eps));
      BaselineRanking ranking = dbscan_rank(features, eps, config.min_pts);
      ranking.method = name;
      out.emplace(ranking.method, std::move(ranking));
    }

    OcsvmOptions options;
    options.nu = config.nu;
    BaselineRanking ranking = ocsvm_rank(features, options);
    ranking.method = std::string("ocsvm-") + weighting_name(weighting);
    out.emplace(ranking.method, std::move(ranking));
  }
  return out;
}

}  // namespace cbott
