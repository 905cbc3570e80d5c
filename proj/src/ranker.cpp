#include "cbott/ranker.hpp"

#include "cbott/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cbott {

namespace {

std::string format_scalar(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

WindowScores score_windows(const ModelParams& model, const HostDataset& dataset) {
  if (model.vocab_hash != dataset.vocabulary.hash())
    throw DataError("vocabulary hash mismatch between model and dataset for host " +
                    dataset.host_id);

  WindowScores scores;
  scores.term_prob.reserve(dataset.windows.size());
  scores.hour_prob.reserve(dataset.windows.size());
  for (const auto& window : dataset.windows) {
    const ForwardOutput out = forward(model, window);
    scores.term_prob.push_back(out.term_probs(window.target_term));
    scores.hour_prob.push_back(out.hour_probs(window.target_hour));
  }
  return scores;
}

std::vector<TaskScore> aggregate_tasks(const WindowScores& scores, const HostDataset& dataset) {
  std::vector<TaskScore> out;
  out.reserve(dataset.task_ranges.size());
  int task_ordinal = 0;
  for (const auto& [begin, end] : dataset.task_ranges) {
    ++task_ordinal;
    if (begin >= end) throw DataError("empty window range for task " + std::to_string(task_ordinal));
    TaskScore score;
    score.task_index = dataset.windows[begin].task_index;
    const auto n = static_cast<Scalar>(end - begin);
    score.rho_w = std::accumulate(scores.term_prob.begin() + static_cast<std::ptrdiff_t>(begin),
                                  scores.term_prob.begin() + static_cast<std::ptrdiff_t>(end), Scalar(0)) / n;
    score.rho_t = std::accumulate(scores.hour_prob.begin() + static_cast<std::ptrdiff_t>(begin),
                                  scores.hour_prob.begin() + static_cast<std::ptrdiff_t>(end), Scalar(0)) / n;
    out.push_back(score);
  }
  return out;
}

std::vector<TaskScore> rank_tasks(std::vector<TaskScore> scores) {
  if (scores.empty()) throw DataError("cannot rank zero tasks");
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto assign_ranks = [&](auto key, int TaskScore::* rank_field) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (key(scores[a]) != key(scores[b])) return key(scores[a]) < key(scores[b]);
      return scores[a].task_index < scores[b].task_index;
    });
    for (std::size_t pos = 0; pos < n; ++pos) scores[order[pos]].*rank_field = static_cast<int>(pos) + 1;
  };
  assign_ranks([](const TaskScore& s) { return s.rho_w; }, &TaskScore::rank_w);
  assign_ranks([](const TaskScore& s) { return s.rho_t; }, &TaskScore::rank_t);

  for (auto& score : scores) score.combined_rank = std::min(score.rank_w, score.rank_t);

  std::sort(scores.begin(), scores.end(), [](const TaskScore& a, const TaskScore& b) {
    if (a.combined_rank != b.combined_rank) return a.combined_rank < b.combined_rank;
    if (a.rho_w != b.rho_w) return a.rho_w < b.rho_w;
    return a.task_index < b.task_index;
  });
  for (std::size_t pos = 0; pos < n; ++pos) scores[pos].final_position = static_cast<int>(pos) + 1;
  return scores;
}

RankingReport build_report(const std::string& host_id, std::vector<TaskScore> ranked,
                           const std::vector<Task>& tasks,
                           const std::string& config_fingerprint, std::uint64_t trial_seed) {
  RankingReport report;
  report.host_id = host_id;
  report.config_fingerprint = config_fingerprint;
  report.trial_seed = trial_seed;
  report.rows.reserve(ranked.size());
  for (auto& score : ranked) {
    const auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) {
      return t.task_index == score.task_index;
    });
    if (it == tasks.end())
      throw DataError("ranked task " + std::to_string(score.task_index) + " missing from task list");
    ReportRow row;
    row.score = score;
    row.source_tag = it->source_tag;
    row.start = it->start;
    row.end = it->end;
    row.command_preview = it->command_text().substr(0, 200);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void emit_report(const RankingReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::Csv) {
    out << "host,position,task_index,rho_w,rho_t,rank_w,rank_t,combined_rank,"
           "source_tag,start,end,command\n";
    for (const auto& row : report.rows) {
      const TaskScore& s = row.score;
      out << csv_escape(report.host_id) << ',' << s.final_position << ',' << s.task_index << ','
          << format_scalar(s.rho_w) << ',' << format_scalar(s.rho_t) << ',' << s.rank_w << ','
          << s.rank_t << ',' << s.combined_rank << ',' << csv_escape(row.source_tag) << ','
          << format_rfc3339(row.start) << ',' << format_rfc3339(row.end) << ','
          << csv_escape(row.command_preview) << '\n';
    }
    return;
  }

  nlohmann::json j;
  j["host"] = report.host_id;
  j["config_fingerprint"] = report.config_fingerprint;
  j["trial_seed"] = report.trial_seed;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["position"] = row.score.final_position;
    r["task_index"] = row.score.task_index;
    r["rho_w"] = row.score.rho_w;
    r["rho_t"] = row.score.rho_t;
    r["rank_w"] = row.score.rank_w;
    r["rank_t"] = row.score.rank_t;
    r["combined_rank"] = row.score.combined_rank;
    r["source_tag"] = row.source_tag;
    r["start"] = row.start;
    r["end"] = row.end;
    r["command"] = row.command_preview;
    rows.push_back(std::move(r));
  }
  j["tasks"] = std::move(rows);
  out << j.dump(2) << '\n';
}

void emit_report(const RankingReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report '" + path + "'");
  emit_report(report, format, out);
}

RankingReport load_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read report '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("report is not valid JSON: " + path);

  RankingReport report;
  report.host_id = j.at("host").get<std::string>();
  report.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  report.trial_seed = j.at("trial_seed").get<std::uint64_t>();
  for (const auto& r : j.at("tasks")) {
    ReportRow row;
    row.score.final_position = r.at("position").get<int>();
    row.score.task_index = r.at("task_index").get<int>();
    row.score.rho_w = r.at("rho_w").get<Scalar>();
    row.score.rho_t = r.at("rho_t").get<Scalar>();
    row.score.rank_w = r.at("rank_w").get<int>();
    row.score.rank_t = r.at("rank_t").get<int>();
    row.score.combined_rank = r.at("combined_rank").get<int>();
    row.source_tag = r.at("source_tag").get<std::string>();
    row.start = r.at("start").get<Timestamp>();
    row.end = r.at("end").get<Timestamp>();
    row.command_preview = r.at("command").get<std::string>();
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string summary_line(const RankingReport& report) {
  std::ostringstream out;
  out << "host=" << report.host_id << " tasks=" << report.rows.size();
  if (!report.rows.empty()) out << " top1=" << report.rows.front().score.task_index;
  return out.str();
}

}  // namespace cbott
