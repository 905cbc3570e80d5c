#include "cbott/ranker.hpp"

#include "cbott/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace cbott;

namespace {

Task simple_task(int index, std::vector<std::string> terms, int hour) {
  Task t;
  t.host_id = "h";
  t.task_index = index;
  t.mean_hour = hour;
  t.commands.push_back({terms, 1000.0 * index});
  t.tokens.push_back(kBeginTask);
  for (auto& term : terms) t.tokens.push_back(term);
  t.tokens.push_back(kEndTask);
  t.start = t.end = 1000.0 * index;
  return t;
}

std::vector<Task> fixture_tasks(int count, unsigned variety) {
  std::vector<Task> tasks;
  Rng rng(variety);
  const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta", "epsilon",
                                         "zeta",  "eta",  "theta"};
  for (int i = 1; i <= count; ++i) {
    std::vector<std::string> terms;
    const std::size_t len = 2 + rng.index(4);
    for (std::size_t k = 0; k < len; ++k) terms.push_back(pool[rng.index(pool.size())]);
    tasks.push_back(simple_task(i, terms, static_cast<int>(9 + rng.index(8))));
  }
  return tasks;
}

TaskScore make_score(int index, Scalar rho_w, Scalar rho_t) {
  TaskScore s;
  s.task_index = index;
  s.rho_w = rho_w;
  s.rho_t = rho_t;
  return s;
}

}  // namespace

TEST_CASE("score_windows under a uniform model") {
  const HostDataset ds = build_dataset({simple_task(1, {"a", "b", "c"}, 10)}, 5);
  ModelParams m = init_model(ds.vocabulary.size(), 4, 4, 5, 1);
  m.vocab_hash = ds.vocabulary.hash();
  m.embeddings.setZero();
  m.hidden_weight.setZero();
  m.term_weight.setZero();
  m.hour_weight.setZero();

  const WindowScores scores = score_windows(m, ds);
  REQUIRE(scores.term_prob.size() == ds.windows.size());
  for (Scalar p : scores.term_prob) CHECK(p == doctest::Approx(1.0 / 6).epsilon(1e-12));
  for (Scalar p : scores.hour_prob) CHECK(p == doctest::Approx(1.0 / 24).epsilon(1e-12));

  const auto agg = aggregate_tasks(scores, ds);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].rho_w == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(agg[0].rho_t == doctest::Approx(1.0 / 24).epsilon(1e-12));

  // Vocabulary hash mismatch is rejected.
  ModelParams other = m;
  other.vocab_hash = 123;
  CHECK_THROWS_AS(score_windows(other, ds), DataError);
}

TEST_CASE("score_windows probabilities are in (0,1)") {
  const auto tasks = fixture_tasks(6, 77);
  const HostDataset ds = build_dataset(tasks, 5);
  ModelParams m = init_model(ds.vocabulary.size(), 8, 8, 5, 3);
  m.vocab_hash = ds.vocabulary.hash();
  const WindowScores scores = score_windows(m, ds);
  for (Scalar p : scores.term_prob) {
    CHECK(p > 0);
    CHECK(p < 1);
  }
}

TEST_CASE("aggregate means") {
  HostDataset ds;
  ds.host_id = "h";
  TrainingWindow w;
  w.task_index = 1;
  ds.windows = {w, w, w};
  ds.windows[2].task_index = 2;
  ds.task_ranges = {{0, 2}, {2, 3}};
  WindowScores scores;
  scores.term_prob = {0.2, 0.4, 0.7};
  scores.hour_prob = {0.1, 0.3, 0.9};
  const auto agg = aggregate_tasks(scores, ds);
  CHECK(agg[0].rho_w == doctest::Approx(0.3));
  CHECK(agg[0].rho_t == doctest::Approx(0.2));
  CHECK(agg[1].rho_w == doctest::Approx(0.7));  // single window
}

TEST_CASE("rank_tasks worked example") {
  // A(0.5, 0.01), B(0.01, 0.5), C(0.4, 0.4):
  // rank_w: B=1, C=2, A=3; rank_t: A=1, C=2, B=3; combined A=1, B=1, C=2.
  auto ranked = rank_tasks({make_score(1, 0.5, 0.01), make_score(2, 0.01, 0.5),
                            make_score(3, 0.4, 0.4)});
  REQUIRE(ranked.size() == 3);
  // Output: B before A? combined ties broken by rho_w ascending: B(0.01) < A(0.5).
  CHECK(ranked[0].task_index == 2);
  CHECK(ranked[0].combined_rank == 1);
  CHECK(ranked[1].task_index == 1);
  CHECK(ranked[1].combined_rank == 1);
  CHECK(ranked[2].task_index == 3);
  CHECK(ranked[2].combined_rank == 2);

  CHECK(ranked[1].rank_w == 3);
  CHECK(ranked[1].rank_t == 1);
  CHECK(ranked[0].rank_w == 1);
  CHECK(ranked[0].rank_t == 3);
  CHECK(ranked[2].rank_w == 2);
  CHECK(ranked[2].rank_t == 2);
}

TEST_CASE("rank_tasks degenerate cases") {
  const auto single = rank_tasks({make_score(1, 0.5, 0.5)});
  CHECK(single[0].rank_w == 1);
  CHECK(single[0].rank_t == 1);
  CHECK(single[0].combined_rank == 1);
  CHECK(single[0].final_position == 1);

  // All-identical scores fall back to task order.
  auto tied = rank_tasks({make_score(3, 0.5, 0.5), make_score(1, 0.5, 0.5),
                          make_score(2, 0.5, 0.5)});
  CHECK(tied[0].task_index == 1);
  CHECK(tied[1].task_index == 2);
  CHECK(tied[2].task_index == 3);

  CHECK_THROWS_AS(rank_tasks({}), DataError);
}

TEST_CASE("rank validity and min-rank law on random scores") {
  Rng rng(5);
  std::vector<TaskScore> scores;
  for (int i = 1; i <= 40; ++i) scores.push_back(make_score(i, rng.uniform(), rng.uniform()));
  const auto ranked = rank_tasks(scores);

  std::vector<bool> seen_w(41, false), seen_t(41, false), seen_pos(41, false);
  for (const auto& s : ranked) {
    CHECK(s.combined_rank == std::min(s.rank_w, s.rank_t));
    seen_w[static_cast<std::size_t>(s.rank_w)] = true;
    seen_t[static_cast<std::size_t>(s.rank_t)] = true;
    seen_pos[static_cast<std::size_t>(s.final_position)] = true;
  }
  for (int r = 1; r <= 40; ++r) {
    CHECK(seen_w[static_cast<std::size_t>(r)]);
    CHECK(seen_t[static_cast<std::size_t>(r)]);
    CHECK(seen_pos[static_cast<std::size_t>(r)]);
  }
}

TEST_CASE("lowering rho_w never worsens the final position") {
  Rng rng(11);
  std::vector<TaskScore> scores;
  for (int i = 1; i <= 15; ++i) scores.push_back(make_score(i, 0.1 + 0.05 * i, rng.uniform()));
  const auto base = rank_tasks(scores);
  int base_pos = 0;
  for (const auto& s : base)
    if (s.task_index == 8) base_pos = s.final_position;

  auto lowered = scores;
  lowered[7].rho_w = 0.01;
  const auto after = rank_tasks(lowered);
  for (const auto& s : after)
    if (s.task_index == 8) CHECK(s.final_position <= base_pos);
}

TEST_CASE("full ranker equals the naive oracle on a trained model") {
  const auto tasks = fixture_tasks(18, 31);
  const HostDataset ds = build_dataset(tasks, 5);
  TrainConfig config;
  config.embedding_dim = 8;
  config.hidden_dim = 12;
  config.epochs = 5;
  config.seed = 13;
  ModelParams m = init_model(ds.vocabulary.size(), 8, 12, 5, 13);
  m.vocab_hash = ds.vocabulary.hash();
  train(m, ds, config);

  const auto ranked = rank_tasks(aggregate_tasks(score_windows(m, ds), ds));
  const auto expected = oracle::naive_rank(m, ds);

  REQUIRE(ranked.size() == expected.size());
  for (const auto& s : ranked) {
    const auto it = std::find_if(expected.begin(), expected.end(),
                                 [&](const oracle::RankedTask& t) { return t.task_index == s.task_index; });
    REQUIRE(it != expected.end());
    CHECK(s.rho_w == doctest::Approx(it->rho_w).epsilon(1e-9));
    CHECK(s.rho_t == doctest::Approx(it->rho_t).epsilon(1e-9));
    CHECK(s.rank_w == it->rank_w);
    CHECK(s.rank_t == it->rank_t);
    CHECK(s.combined_rank == it->combined);
    CHECK(s.final_position == it->position);
  }
}

TEST_CASE("report emission and round trip") {
  const auto tasks = fixture_tasks(3, 9);
  const HostDataset ds = build_dataset(tasks, 5);
  ModelParams m = init_model(ds.vocabulary.size(), 4, 4, 5, 2);
  m.vocab_hash = ds.vocabulary.hash();
  const RankingReport report =
      build_report("h", rank_tasks(aggregate_tasks(score_windows(m, ds), ds)), tasks, "cfg01", 42);

  std::ostringstream csv;
  emit_report(report, ReportFormat::Csv, csv);
  std::istringstream lines(csv.str());
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line ==
        "host,position,task_index,rho_w,rho_t,rank_w,rank_t,combined_rank,source_tag,start,end,"
        "command");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);

  const std::string path = "/tmp/cbott_test_report.json";
  emit_report(report, ReportFormat::Json, path);
  const RankingReport loaded = load_report_json(path);
  CHECK(loaded == report);

  CHECK(summary_line(report) ==
        "host=h tasks=3 top1=" + std::to_string(report.rows[0].score.task_index));
}

TEST_CASE("fixture host report matches the frozen golden file") {
  SynthesisConfig spec;
  spec.hosts = 2;
  spec.tasks_per_host = 25;
  PreprocessParams params;
  const Corpus corpus = generate_synthetic_corpus(spec, params.delta, 2024);
  const TasksByHost hosts = segment_corpus(corpus, params);
  const auto& [host, tasks] = *hosts.begin();
  const HostDataset ds = build_dataset(tasks, 5);
  TrainConfig tc;
  tc.embedding_dim = 16;
  tc.hidden_dim = 24;
  tc.epochs = 6;
  tc.seed = 99;
  ModelParams m = init_model(ds.vocabulary.size(), tc.embedding_dim, tc.hidden_dim, 5, tc.seed);
  m.vocab_hash = ds.vocabulary.hash();
  train(m, ds, tc);
  const RankingReport report = build_report(
      host, rank_tasks(aggregate_tasks(score_windows(m, ds), ds)), tasks, "golden", 99);

  std::ostringstream emitted;
  emit_report(report, ReportFormat::Csv, emitted);

  std::ifstream golden(std::string(CBOTT_TEST_DIR) + "/golden/report_fixture.csv",
                       std::ios::binary);
  REQUIRE(golden.good());
  std::ostringstream expected;
  expected << golden.rdbuf();
  CHECK(emitted.str() == expected.str());
}

TEST_CASE("report command preview is capped at 200 chars") {
  std::vector<std::string> terms(60, "longtermtext");
  const Task t = simple_task(1, terms, 10);
  const HostDataset ds = build_dataset({t}, 5);
  ModelParams m = init_model(ds.vocabulary.size(), 2, 2, 5, 1);
  m.vocab_hash = ds.vocabulary.hash();
  const RankingReport report =
      build_report("h", rank_tasks(aggregate_tasks(score_windows(m, ds), ds)), {t}, "cfg", 1);
  CHECK(report.rows[0].command_preview.size() == 200);
}
