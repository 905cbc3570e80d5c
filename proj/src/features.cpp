#include "cbott/baselines.hpp"

#include "cbott/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace cbott {

const char* weighting_name(TermWeighting w) {
  return w == TermWeighting::Binary ? "binary" : "tfidf";
}

FeatureMatrix build_feature_matrix(const std::vector<Task>& tasks, TermWeighting weighting) {
  if (tasks.empty()) throw DataError("cannot build a feature matrix from zero tasks");

  FeatureMatrix fm;
  fm.weighting = weighting;
  fm.term_columns = Vocabulary::build(tasks).content_terms();

  std::unordered_map<std::string, Eigen::Index> column_of;
  column_of.reserve(fm.term_columns.size());
  for (Eigen::Index c = 0; c < fm.term_block_width(); ++c) column_of.emplace(fm.term_columns[static_cast<std::size_t>(c)], c);

  const Eigen::Index n = static_cast<Eigen::Index>(tasks.size());
  const Eigen::Index terms = fm.term_block_width();
  fm.rows = Matrix::Zero(n, terms + kHourClasses);
  fm.task_indices.reserve(tasks.size());

  // Raw term counts per task.
  for (Eigen::Index r = 0; r < n; ++r) {
    const Task& task = tasks[static_cast<std::size_t>(r)];
    fm.task_indices.push_back(task.task_index);
    for (const auto& cmd : task.commands)
      for (const auto& term : cmd.terms) fm.rows(r, column_of.at(term)) += 1;
    fm.rows(r, terms + task.mean_hour) = 1;
  }

  if (weighting == TermWeighting::Binary) {
    fm.rows.leftCols(terms) = (fm.rows.leftCols(terms).array() > 0).cast<Scalar>();
    return fm;
  }

  // Smoothed idf: ln((1+N)/(1+df)) + 1, then unit-norm the term block.
  Vector idf(terms);
  for (Eigen::Index c = 0; c < terms; ++c) {
    const Scalar df = (fm.rows.col(c).array() > 0).cast<Scalar>().sum();
    idf(c) = std::log((1.0 + static_cast<Scalar>(n)) / (1.0 + df)) + 1.0;
  }
  fm.rows.leftCols(terms) = fm.rows.leftCols(terms) * idf.asDiagonal();
  for (Eigen::Index r = 0; r < n; ++r) {
    const Scalar norm = fm.rows.row(r).head(terms).norm();
    if (norm > 0) fm.rows.row(r).head(terms) /= norm;
  }
  return fm;
}

Scalar cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DataError("cosine similarity requires identical column dictionaries");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == 0 || nb == 0) throw DataError("cosine similarity undefined for a zero vector");
  return a.dot(b) / (na * nb);
}

Scalar binary_task_cosine(const Task& a, const Task& b) {
  auto term_set = [](const Task& t) {
    std::set<std::string> s;
    for (const auto& cmd : t.commands)
      for (const auto& term : cmd.terms) s.insert(term);
    return s;
  };
  const std::set<std::string> sa = term_set(a);
  const std::set<std::string> sb = term_set(b);
  if (sa.empty() || sb.empty()) return 0;

  std::size_t shared = 0;
  for (const auto& term : sa) shared += sb.count(term);
  return static_cast<Scalar>(shared) /
         std::sqrt(static_cast<Scalar>(sa.size()) * static_cast<Scalar>(sb.size()));
}

void emit_baseline_csv(const BaselineRanking& ranking, const std::string& host_id,
                       const std::vector<Task>& tasks, std::ostream& out, bool header) {
  if (header)
    out << "method,host,position,task_index,rho_w,rho_t,rank_w,rank_t,combined_rank,"
           "score,source_tag,start,end,command\n";
  for (std::size_t pos = 0; pos < ranking.ordered_tasks.size(); ++pos) {
    const int task_index = ranking.ordered_tasks[pos];
    const auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) {
      return t.task_index == task_index;
    });
    if (it == tasks.end())
      throw DataError("baseline ranking references unknown task " + std::to_string(task_index));
    char score_buf[40];
    std::snprintf(score_buf, sizeof(score_buf), "%.17g", ranking.scores[pos]);
    out << csv_escape(ranking.method) << ',' << csv_escape(host_id) << ',' << (pos + 1) << ','
        << task_index << ",,,,,," << score_buf << ',' << csv_escape(it->source_tag) << ','
        << format_rfc3339(it->start) << ',' << format_rfc3339(it->end) << ','
        << csv_escape(it->command_text().substr(0, 200)) << '\n';
  }
}

}  // namespace cbott
