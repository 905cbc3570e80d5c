#include "cbott/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace cbott {

namespace {

constexpr std::uint64_t kInjectionStream = 0x696e6a65ULL;
constexpr std::uint64_t kHourStream = 0x686f7572ULL;

struct UnitResult {
  bool failed = false;
  std::string failure;
  InjectionRecord injection;
  // detector -> (percentile, position, n_tasks)
  std::map<std::string, PercentileEntry> entries;
};

struct Unit {
  int scheme = 0;
  int trial = 0;
  std::string host;
};

UnitResult run_unit(const Unit& unit, const TasksByHost& organic_tasks,
                    const ExperimentConfig& config) {
  UnitResult result;
  try {
    std::vector<Task> tasks = organic_tasks.at(unit.host);
    const std::uint64_t host_hash = fnv1a64(unit.host);

    // Donor draws share a stream across schemes 1 and 3, and hour draws
    // share one across schemes 2 and 3, so scheme 3 combines exactly the
    // task scheme 1 picked with the hour scheme 2 picked.
    const std::uint64_t inj_seed =
        mix_seed(config.seed, kInjectionStream, static_cast<std::uint64_t>(unit.trial), host_hash);
    Rng inj_rng(inj_seed);
    Rng hour_rng(mix_seed(config.seed, kHourStream, static_cast<std::uint64_t>(unit.trial), host_hash));

    InjectionRecord record;
    switch (unit.scheme) {
      case 1: record = inject_scheme1(unit.host, tasks, organic_tasks, inj_rng); break;
      case 2: record = inject_scheme2(unit.host, tasks, hour_rng); break;
      case 3: record = inject_scheme3(unit.host, tasks, organic_tasks, inj_rng, hour_rng); break;
      default: throw DataError("unknown injection scheme " + std::to_string(unit.scheme));
    }
    record.trial = unit.trial;
    record.rng_seed = inj_seed;
    result.injection = record;

    const int injected_index = record.injected_task_index;
    const int n_tasks = static_cast<int>(tasks.size());

    auto add_entry = [&](const std::string& detector, const std::vector<int>& ordered) {
      PercentileEntry entry;
      entry.scheme = unit.scheme;
      entry.trial = unit.trial;
      entry.host = unit.host;
      entry.detector = detector;
      entry.n_tasks = n_tasks;
      entry.percentile = detection_percentile(ordered, injected_index, n_tasks);
      entry.position = static_cast<int>(
          std::find(ordered.begin(), ordered.end(), injected_index) - ordered.begin() + 1);
      result.entries.emplace(detector, std::move(entry));
    };

    // Dual-head model. Injection precedes vocabulary construction, so the
    // injected task's terms are always in-vocabulary.
    HostDataset dataset = build_dataset(tasks, config.window_size);
    TrainConfig train_config = config.model;
    train_config.seed = mix_seed(config.seed, host_hash, static_cast<std::uint64_t>(unit.trial));
    ModelParams model = init_model(dataset.vocabulary.size(), train_config.embedding_dim,
                                   train_config.hidden_dim, config.window_size, train_config.seed);
    model.vocab_hash = dataset.vocabulary.hash();
    train(model, dataset, train_config);

    const WindowScores scores = score_windows(model, dataset);
    const std::vector<TaskScore> ranked = rank_tasks(aggregate_tasks(scores, dataset));
    std::vector<int> ordered;
    ordered.reserve(ranked.size());
    for (const auto& score : ranked) ordered.push_back(score.task_index);
    add_entry("cbott", ordered);

    for (const auto& [method, ranking] : baseline_sweep(tasks, config.baselines))
      add_entry(method, ranking.ordered_tasks);
  } catch (const std::exception& e) {
    result.failed = true;
    result.failure = "scheme=" + std::to_string(unit.scheme) + " trial=" +
                     std::to_string(unit.trial) + " host=" + unit.host + ": " + e.what();
  }
  return result;
}

double population_stdev(const std::vector<double>& values, double mean) {
  double acc = 0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double detection_percentile(const std::vector<int>& ordered_tasks, int injected_task_index,
                            int n_tasks) {
  const auto it = std::find(ordered_tasks.begin(), ordered_tasks.end(), injected_task_index);
  if (it == ordered_tasks.end())
    throw DataError("injected task " + std::to_string(injected_task_index) +
                    " absent from ranking");
  const auto position = static_cast<double>(it - ordered_tasks.begin() + 1);
  return 100.0 * position / static_cast<double>(n_tasks);
}

ExperimentOutputs run_experiment(const TasksByHost& organic_tasks, const ExperimentConfig& config) {
  config.validate();
  if (organic_tasks.empty()) throw DataError("no hosts after filtering");

  std::vector<Unit> units;
  for (int scheme : config.schemes)
    for (int trial = 1; trial <= config.trials; ++trial)
      for (const auto& [host, tasks] : organic_tasks) units.push_back({scheme, trial, host});

  std::vector<UnitResult> results(units.size());
  unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(units.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < units.size(); i = next.fetch_add(1))
      results[i] = run_unit(units[i], organic_tasks, config);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentOutputs outputs;
  outputs.summary.trials = config.trials;
  outputs.summary.hosts = static_cast<int>(organic_tasks.size());

  for (std::size_t i = 0; i < units.size(); ++i) {
    if (results[i].failed) {
      outputs.summary.failures.push_back(results[i].failure);
      continue;
    }
    outputs.injections.push_back(results[i].injection);
    for (const auto& [detector, entry] : results[i].entries) outputs.dump.push_back(entry);
  }

  // Per (scheme, trial): stats across hosts; then average the stats over
  // the trials that produced data.
  for (int scheme : config.schemes) {
    std::map<std::string, DetectorStats> accumulated;
    std::map<std::string, int> trial_counts;
    for (int trial = 1; trial <= config.trials; ++trial) {
      std::map<std::string, std::vector<double>> per_detector;
      for (const auto& entry : outputs.dump)
        if (entry.scheme == scheme && entry.trial == trial)
          per_detector[entry.detector].push_back(entry.percentile);
      for (const auto& [detector, values] : per_detector) {
        double mean = 0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        const double lo = *std::min_element(values.begin(), values.end());
        const double hi = *std::max_element(values.begin(), values.end());
        DetectorStats& acc = accumulated[detector];
        acc.mean += mean;
        acc.min += lo;
        acc.max += hi;
        acc.stdev += population_stdev(values, mean);
        ++trial_counts[detector];
      }
    }
    for (auto& [detector, stats] : accumulated) {
      const auto n = static_cast<double>(trial_counts[detector]);
      stats.mean /= n;
      stats.min /= n;
      stats.max /= n;
      stats.stdev /= n;
    }
    outputs.summary.tables[scheme] = std::move(accumulated);
  }
  return outputs;
}

void write_summary_csv(const EvaluationSummary& summary, const std::string& out_dir) {
  std::ofstream combined(std::filesystem::path(out_dir) / "summary.csv");
  if (!combined) throw DataError("cannot write summary.csv under '" + out_dir + "'");
  combined << "scheme,detector,mean_percentile,min_percentile,max_percentile,std_percentile\n";

  for (const auto& [scheme, table] : summary.tables) {
    const auto path =
        std::filesystem::path(out_dir) / ("summary_scheme" + std::to_string(scheme) + ".csv");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "detector,mean_percentile,min_percentile,max_percentile,std_percentile\n";
    for (const auto& [detector, stats] : table) {
      out << detector << ',' << format_value(stats.mean) << ',' << format_value(stats.min) << ','
          << format_value(stats.max) << ',' << format_value(stats.stdev) << '\n';
      combined << scheme << ',' << detector << ',' << format_value(stats.mean) << ','
               << format_value(stats.min) << ',' << format_value(stats.max) << ','
               << format_value(stats.stdev) << '\n';
    }
  }
}

void write_percentile_dump_csv(const std::vector<PercentileEntry>& dump, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write percentile dump '" + path + "'");
  out << "scheme,trial,host,detector,percentile,position,n_tasks\n";
  for (const auto& entry : dump) {
    out << entry.scheme << ',' << entry.trial << ',' << entry.host << ',' << entry.detector << ','
        << format_value(entry.percentile) << ',' << entry.position << ',' << entry.n_tasks << '\n';
  }
}

void write_injection_audit(const std::vector<InjectionRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write injection audit '" + path + "'");
  for (const auto& record : records) append_injection_jsonl(record, out);
}

std::string format_summary_table(const EvaluationSummary& summary) {
  std::ostringstream out;
  for (const auto& [scheme, table] : summary.tables) {
    out << "Injection scheme " << scheme << " (" << summary.hosts << " hosts, "
        << summary.trials << " trials)\n";
    char line[160];
    std::snprintf(line, sizeof(line), "  %-24s %10s %10s %10s %10s\n", "detector", "mean", "min",
                  "max", "stdev");
    out << line;
    for (const auto& [detector, stats] : table) {
      std::snprintf(line, sizeof(line), "  %-24s %10.2f %10.2f %10.2f %10.2f\n", detector.c_str(),
                    stats.mean, stats.min, stats.max, stats.stdev);
      out << line;
    }
  }
  if (!summary.failures.empty()) {
    out << "Excluded host runs:\n";
    for (const auto& failure : summary.failures) out << "  " << failure << '\n';
  }
  return out.str();
}

}  // namespace cbott
