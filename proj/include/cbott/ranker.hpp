#pragma once

#include "cbott/network.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cbott {

// Probabilities of the actual middle term and actual hour, one entry per
// window (no argmax prediction is ever taken).
struct WindowScores {
  std::vector<Scalar> term_prob;
  std::vector<Scalar> hour_prob;
};

struct TaskScore {
  int task_index = 0;
  Scalar rho_w = 0;  // mean probability of actual terms over the task
  Scalar rho_t = 0;  // mean probability of the actual hour
  int rank_w = 0;    // 1-based position after ascending sort on rho_w
  int rank_t = 0;
  int combined_rank = 0;  // min(rank_w, rank_t)
  int final_position = 0; // 1-based, 1 = most anomalous

  bool operator==(const TaskScore&) const = default;
};

struct ReportRow {
  TaskScore score;
  std::string source_tag;
  Timestamp start = 0;
  Timestamp end = 0;
  std::string command_preview;  // first 200 chars of reconstructed text

  bool operator==(const ReportRow&) const = default;
};

struct RankingReport {
  std::string host_id;
  std::vector<ReportRow> rows;  // most anomalous first
  std::string config_fingerprint;
  std::uint64_t trial_seed = 0;

  bool operator==(const RankingReport&) const = default;
};

// Requires the model to carry the dataset vocabulary's hash.
WindowScores score_windows(const ModelParams& model, const HostDataset& dataset);

// rho = arithmetic mean of the retrieved probabilities over each task's
// window range.
std::vector<TaskScore> aggregate_tasks(const WindowScores& scores, const HostDataset& dataset);

// Ascending sorts on rho_w and rho_t (ties by task_index), min-rank
// combination, final order by combined rank ascending (ties by rho_w then
// task_index).
std::vector<TaskScore> rank_tasks(std::vector<TaskScore> scores);

RankingReport build_report(const std::string& host_id, std::vector<TaskScore> ranked,
                           const std::vector<Task>& tasks,
                           const std::string& config_fingerprint, std::uint64_t trial_seed);

enum class ReportFormat { Csv, Json };

void emit_report(const RankingReport& report, ReportFormat format, std::ostream& out);
void emit_report(const RankingReport& report, ReportFormat format, const std::string& path);
RankingReport load_report_json(const std::string& path);

// "host=<id> tasks=<n> top1=<task_index>"
std::string summary_line(const RankingReport& report);

}  // namespace cbott
