#include "cbott/config.hpp"
#include "cbott/experiment.hpp"
#include "cbott/ingest.hpp"
#include "cbott/ranker.hpp"
#include "cbott/synth.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

namespace fs = std::filesystem;
using namespace cbott;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::string sanitize_host(const std::string& host) {
  std::string out = host;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

// Write to a temp file in the target directory, then rename into place.
template <typename WriteFn>
void write_atomically(const fs::path& path, WriteFn&& write) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    write(out);
  }
  fs::rename(tmp, path);
}

struct CommonArgs {
  std::string config_path;
  ConfigOverrides overrides;
  std::vector<int> schemes_flag;
};

ExperimentConfig resolve_config(const CommonArgs& args) {
  nlohmann::json file_json = nlohmann::json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw DataError("cannot read config file '" + args.config_path + "'");
    file_json = nlohmann::json::parse(in, nullptr, false);
    if (file_json.is_discarded())
      throw DataError("config file is not valid JSON: " + args.config_path);
  }
  ExperimentConfig config = config_from_json(file_json);
  const bool had_seed =
      file_json.contains("experiment") && file_json["experiment"].contains("seed");

  ConfigOverrides overrides = args.overrides;
  if (!args.schemes_flag.empty()) overrides.schemes = args.schemes_flag;
  apply_overrides(config, overrides, had_seed);
  return config;
}

TasksByHost load_filtered_tasks(const ExperimentConfig& config, const std::string& corpus_path) {
  IngestOptions options;
  options.format = parse_input_format(config.corpus_format);
  const Corpus corpus = load_corpus(corpus_path, options);
  if (corpus.records_rejected > 0)
    std::cerr << "warning: skipped " << corpus.records_rejected << " malformed lines in "
              << corpus_path << "\n";
  const TasksByHost segmented = segment_corpus(corpus, config.preprocess);
  TasksByHost filtered = filter_hosts(segmented, config.min_tasks, config.host_allowlist);
  if (filtered.empty()) throw DataError("no hosts after filtering");
  return filtered;
}

int cmd_synth(const CommonArgs& args, const std::string& out_path) {
  const ExperimentConfig config = resolve_config(args);
  const Corpus corpus =
      generate_synthetic_corpus(config.synth, config.preprocess.delta, config.seed);
  save_corpus_jsonl(corpus, out_path);
  write_resolved_config(config, out_path + ".config.json");
  std::cout << "wrote " << corpus.record_count() << " records for " << corpus.hosts.size()
            << " hosts to " << out_path << "\n";
  return kExitOk;
}

int cmd_hunt(const CommonArgs& args, const std::string& corpus_path, const std::string& out_dir,
             bool save_models, const std::string& dump_tasks_path, bool dump_datasets) {
  const ExperimentConfig config = resolve_config(args);
  fs::create_directories(out_dir);
  write_resolved_config(config, (fs::path(out_dir) / "resolved_config.json").string());

  const TasksByHost hosts = load_filtered_tasks(config, corpus_path);
  if (!dump_tasks_path.empty()) dump_tasks_jsonl(hosts, dump_tasks_path);
  if (save_models) fs::create_directories(fs::path(out_dir) / "models");

  std::vector<std::pair<std::string, const std::vector<Task>*>> work;
  for (const auto& [host, tasks] : hosts) work.emplace_back(host, &tasks);

  struct HostOutcome {
    std::string host;
    std::string error;
    std::string summary;
  };
  std::vector<HostOutcome> outcomes(work.size());

  auto run_host = [&](std::size_t i) {
    const auto& [host, tasks] = work[i];
    outcomes[i].host = host;
    try {
      HostDataset dataset = build_dataset(*tasks, config.window_size);
      if (dump_datasets)
        dump_dataset_csv(dataset,
                         (fs::path(out_dir) / (sanitize_host(host) + ".dataset.csv")).string());

      TrainConfig train_config = config.model;
      train_config.seed = mix_seed(config.seed, fnv1a64(host), 1);
      ModelParams model =
          init_model(dataset.vocabulary.size(), train_config.embedding_dim,
                     train_config.hidden_dim, config.window_size, train_config.seed);
      model.vocab_hash = dataset.vocabulary.hash();
      train(model, dataset, train_config);
      if (save_models)
        save_model(model,
                   (fs::path(out_dir) / "models" / (sanitize_host(host) + ".model.json")).string());

      const WindowScores scores = score_windows(model, dataset);
      RankingReport report = build_report(host, rank_tasks(aggregate_tasks(scores, dataset)),
                                          *tasks, config.fingerprint(), train_config.seed);

      const fs::path base = fs::path(out_dir) / sanitize_host(host);
      write_atomically(base.string() + ".report.csv",
                       [&](std::ostream& out) { emit_report(report, ReportFormat::Csv, out); });
      write_atomically(base.string() + ".report.json",
                       [&](std::ostream& out) { emit_report(report, ReportFormat::Json, out); });
      outcomes[i].summary = summary_line(report);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  };

  unsigned jobs = config.jobs > 0 ? static_cast<unsigned>(config.jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(work.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1)) run_host(i);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& outcome : outcomes) {
    if (!outcome.error.empty())
      manifest.push_back({{"host", outcome.host}, {"error", outcome.error}});
    else
      std::cout << outcome.summary << "\n";
  }
  if (!manifest.empty()) {
    std::ofstream out(fs::path(out_dir) / "errors.json");
    out << manifest.dump(2) << '\n';
    std::cerr << manifest.size() << " host(s) failed; see errors.json\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_evaluate(const CommonArgs& args, const std::string& corpus_path,
                 const std::string& out_dir) {
  const ExperimentConfig config = resolve_config(args);
  fs::create_directories(out_dir);
  write_resolved_config(config, (fs::path(out_dir) / "resolved_config.json").string());

  const TasksByHost hosts = load_filtered_tasks(config, corpus_path);
  const ExperimentOutputs outputs = run_experiment(hosts, config);

  write_summary_csv(outputs.summary, out_dir);
  write_percentile_dump_csv(outputs.dump, (fs::path(out_dir) / "percentiles.csv").string());
  write_injection_audit(outputs.injections, (fs::path(out_dir) / "injections.jsonl").string());
  std::cout << format_summary_table(outputs.summary);
  return kExitOk;
}

int cmd_baselines(const CommonArgs& args, const std::string& corpus_path,
                  const std::string& out_dir) {
  const ExperimentConfig config = resolve_config(args);
  fs::create_directories(out_dir);
  write_resolved_config(config, (fs::path(out_dir) / "resolved_config.json").string());

  const TasksByHost hosts = load_filtered_tasks(config, corpus_path);
  for (const auto& [host, tasks] : hosts) {
    const auto rankings = baseline_sweep(tasks, config.baselines);
    const fs::path path = fs::path(out_dir) / (sanitize_host(host) + ".baselines.csv");
    write_atomically(path, [&](std::ostream& out) {
      bool header = true;
      for (const auto& [method, ranking] : rankings) {
        emit_baseline_csv(ranking, host, tasks, out, header);
        header = false;
      }
    });
    std::cout << "host=" << host << " methods=" << rankings.size() << "\n";
  }
  return kExitOk;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
  const RankingReport report = load_report_json(in_path);
  const ReportFormat fmt = format == "json" ? ReportFormat::Json : ReportFormat::Csv;
  if (out_path.empty()) {
    emit_report(report, fmt, std::cout);
  } else {
    emit_report(report, fmt, out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CBoTT: unsupervised threat hunting over process-audit logs"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string corpus_path, out_path, out_dir;
  bool save_models = false, dump_datasets = false;
  std::string dump_tasks_path;
  std::string report_in, report_format = "csv", report_out;

  auto add_common = [&](CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--config", common.config_path, "JSON config file");
    if (with_seed) cmd->add_option("--seed", common.overrides.seed, "global RNG seed");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth);
  synth->add_option("--out", out_path, "output corpus path (JSONL)")->required();
  synth->add_option("--hosts", common.overrides.hosts, "host count");
  synth->add_option("--tasks-per-host", common.overrides.tasks_per_host, "tasks per host");

  auto* hunt = app.add_subcommand("hunt", "train per-host models and rank tasks");
  add_common(hunt);
  hunt->add_option("--corpus", corpus_path, "corpus file")->required();
  hunt->add_option("--out", out_dir, "output directory")->required();
  hunt->add_option("--jobs", common.overrides.jobs, "parallel host workers");
  hunt->add_option("--min-tasks", common.overrides.min_tasks, "per-host task threshold");
  hunt->add_flag("--save-models", save_models, "write model checkpoints");
  hunt->add_option("--dump-tasks", dump_tasks_path, "write preprocessed tasks as JSONL");
  hunt->add_flag("--dump-datasets", dump_datasets, "write per-host training sets as CSV");

  auto* evaluate = app.add_subcommand("evaluate", "run injection experiments and baselines");
  add_common(evaluate);
  evaluate->add_option("--corpus", corpus_path, "corpus file")->required();
  evaluate->add_option("--out", out_dir, "output directory")->required();
  evaluate->add_option("--schemes", common.schemes_flag, "injection schemes (1, 2, 3)")
      ->delimiter(',');
  evaluate->add_option("--trials", common.overrides.trials, "trial count");
  evaluate->add_option("--jobs", common.overrides.jobs, "parallel host workers");
  evaluate->add_option("--min-tasks", common.overrides.min_tasks, "per-host task threshold");

  auto* baselines = app.add_subcommand("baselines", "run the baseline sweep only");
  add_common(baselines);
  baselines->add_option("--corpus", corpus_path, "corpus file")->required();
  baselines->add_option("--out", out_dir, "output directory")->required();
  baselines->add_option("--min-tasks", common.overrides.min_tasks, "per-host task threshold");

  auto* report = app.add_subcommand("report", "re-emit a stored JSON ranking report");
  report->add_option("--in", report_in, "report JSON file")->required();
  report->add_option("--format", report_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", report_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(common, out_path);
    if (hunt->parsed())
      return cmd_hunt(common, corpus_path, out_dir, save_models, dump_tasks_path, dump_datasets);
    if (evaluate->parsed()) return cmd_evaluate(common, corpus_path, out_dir);
    if (baselines->parsed()) return cmd_baselines(common, corpus_path, out_dir);
    if (report->parsed()) return cmd_report(report_in, report_format, report_out);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
