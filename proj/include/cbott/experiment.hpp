#pragma once

#include "cbott/config.hpp"
#include "cbott/injection.hpp"
#include "cbott/ranker.hpp"

#include <map>
#include <string>
#include <vector>

namespace cbott {

// 100 * position / n_tasks, position 1-based in most-anomalous-first
// order; in (0, 100], lower is better.
double detection_percentile(const std::vector<int>& ordered_tasks, int injected_task_index,
                            int n_tasks);

struct DetectorStats {
  double mean = 0;
  double min = 0;
  double max = 0;
  double stdev = 0;  // population standard deviation across hosts
};

struct EvaluationSummary {
  // scheme -> detector -> stats averaged over trials.
  std::map<int, std::map<std::string, DetectorStats>> tables;
  int trials = 0;
  int hosts = 0;
  std::vector<std::string> failures;  // hosts excluded from aggregates
};

struct PercentileEntry {
  int scheme = 0;
  int trial = 0;
  std::string host;
  std::string detector;
  double percentile = 0;
  int position = 0;
  int n_tasks = 0;
};

struct ExperimentOutputs {
  EvaluationSummary summary;
  std::vector<PercentileEntry> dump;
  std::vector<InjectionRecord> injections;
};

// For each scheme x trial x host: inject, rebuild the dataset (injection
// precedes vocabulary and training), train, rank, and score the detection
// percentile for the dual-head model and every baseline. Host failures are
// recorded and excluded from aggregates. Hosts run in parallel
// (config.jobs workers); results are deterministic for a given seed.
ExperimentOutputs run_experiment(const TasksByHost& organic_tasks, const ExperimentConfig& config);

// summary_scheme<k>.csv per scheme plus a combined summary.csv.
void write_summary_csv(const EvaluationSummary& summary, const std::string& out_dir);
void write_percentile_dump_csv(const std::vector<PercentileEntry>& dump, const std::string& path);
void write_injection_audit(const std::vector<InjectionRecord>& records, const std::string& path);

// Human-readable table, two decimals, for stdout.
std::string format_summary_table(const EvaluationSummary& summary);

}  // namespace cbott
