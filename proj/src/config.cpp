#include "cbott/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cbott {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw DataError("unknown config key '" + where + key + "'");
  }
}

std::string separators_to_string(const std::set<char>& seps) {
  return std::string(seps.begin(), seps.end());
}

std::set<char> separators_from_string(const std::string& s) {
  return std::set<char>(s.begin(), s.end());
}

}  // namespace

void ExperimentConfig::validate() const {
  preprocess.validate();
  model.validate();
  if (min_tasks < 0) throw DataError("min_tasks must be >= 0");
  if (window_size < 3 || window_size % 2 == 0)
    throw DataError("window size must be odd and >= 3");
  if (trials < 1) throw DataError("experiment.trials must be >= 1");
  if (schemes.empty()) throw DataError("experiment.schemes must be nonempty");
  for (int s : schemes)
    if (s < 1 || s > 3) throw DataError("injection scheme must be 1, 2, or 3");
  if (!(baselines.eps_start > 0) || !(baselines.eps_step > 0) ||
      baselines.eps_stop < baselines.eps_start)
    throw DataError("invalid baseline eps grid");
  if (baselines.min_pts < 1) throw DataError("baselines.min_pts must be >= 1");
  if (!(baselines.nu > 0 && baselines.nu <= 1)) throw DataError("baselines.nu must be in (0,1]");
  if (synth.hosts < 1 || synth.tasks_per_host < 1 || synth.days < 1)
    throw DataError("invalid synthesis settings");
  if (synth.business_hour_start < 0 || synth.business_hour_end > 24 ||
      synth.business_hour_start >= synth.business_hour_end)
    throw DataError("invalid business-hour window");
  if (corpus_format != "jsonl" && corpus_format != "csv")
    throw DataError("corpus_format must be jsonl or csv");
  if (jobs < 0) throw DataError("jobs must be >= 0");
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["preprocess"] = {
      {"delta_seconds", config.preprocess.delta},
      {"gamma", config.preprocess.gamma},
      {"separators", separators_to_string(config.preprocess.separators)},
      {"min_tasks", config.min_tasks},
      {"host_allowlist", config.host_allowlist},
  };
  j["window"] = {{"w", config.window_size}};
  j["model"] = {
      {"embedding_dim", config.model.embedding_dim},
      {"hidden_dim", config.model.hidden_dim},
      {"learning_rate", config.model.learning_rate},
      {"batch_size", config.model.batch_size},
      {"epochs", config.model.epochs},
      {"patience", config.model.patience},
      {"min_delta", config.model.min_delta},
  };
  j["baselines"] = {
      {"eps_start", config.baselines.eps_start},
      {"eps_stop", config.baselines.eps_stop},
      {"eps_step", config.baselines.eps_step},
      {"min_pts", config.baselines.min_pts},
      {"nu", config.baselines.nu},
  };
  j["experiment"] = {
      {"trials", config.trials},
      {"schemes", config.schemes},
      {"seed", config.seed},
  };
  j["synth"] = {
      {"hosts", config.synth.hosts},
      {"tasks_per_host", config.synth.tasks_per_host},
      {"business_hour_start", config.synth.business_hour_start},
      {"business_hour_end", config.synth.business_hour_end},
      {"days", config.synth.days},
      {"start_date", config.synth.start_date},
  };
  j["io"] = {
      {"corpus_format", config.corpus_format},
      {"jobs", config.jobs},
  };
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  reject_unknown_keys(j, {"preprocess", "window", "model", "baselines", "experiment", "synth", "io"}, "");

  if (j.contains("preprocess")) {
    const json& p = j["preprocess"];
    reject_unknown_keys(p, {"delta_seconds", "gamma", "separators", "min_tasks", "host_allowlist"},
                        "preprocess.");
    config.preprocess.delta = p.value("delta_seconds", config.preprocess.delta);
    config.preprocess.gamma = p.value("gamma", config.preprocess.gamma);
    if (p.contains("separators"))
      config.preprocess.separators = separators_from_string(p["separators"].get<std::string>());
    config.min_tasks = p.value("min_tasks", config.min_tasks);
    if (p.contains("host_allowlist"))
      config.host_allowlist = p["host_allowlist"].get<std::vector<std::string>>();
  }
  if (j.contains("window")) {
    reject_unknown_keys(j["window"], {"w"}, "window.");
    config.window_size = j["window"].value("w", config.window_size);
  }
  if (j.contains("model")) {
    const json& m = j["model"];
    reject_unknown_keys(m,
                        {"embedding_dim", "hidden_dim", "learning_rate", "batch_size", "epochs",
                         "patience", "min_delta"},
                        "model.");
    config.model.embedding_dim = m.value("embedding_dim", config.model.embedding_dim);
    config.model.hidden_dim = m.value("hidden_dim", config.model.hidden_dim);
    config.model.learning_rate = m.value("learning_rate", config.model.learning_rate);
    config.model.batch_size = m.value("batch_size", config.model.batch_size);
    config.model.epochs = m.value("epochs", config.model.epochs);
    config.model.patience = m.value("patience", config.model.patience);
    config.model.min_delta = m.value("min_delta", config.model.min_delta);
  }
  if (j.contains("baselines")) {
    const json& b = j["baselines"];
    reject_unknown_keys(b, {"eps_start", "eps_stop", "eps_step", "min_pts", "nu"}, "baselines.");
    config.baselines.eps_start = b.value("eps_start", config.baselines.eps_start);
    config.baselines.eps_stop = b.value("eps_stop", config.baselines.eps_stop);
    config.baselines.eps_step = b.value("eps_step", config.baselines.eps_step);
    config.baselines.min_pts = b.value("min_pts", config.baselines.min_pts);
    config.baselines.nu = b.value("nu", config.baselines.nu);
  }
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    reject_unknown_keys(e, {"trials", "schemes", "seed"}, "experiment.");
    config.trials = e.value("trials", config.trials);
    if (e.contains("schemes")) config.schemes = e["schemes"].get<std::vector<int>>();
    config.seed = e.value("seed", config.seed);
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    reject_unknown_keys(
        s, {"hosts", "tasks_per_host", "business_hour_start", "business_hour_end", "days", "start_date"},
        "synth.");
    config.synth.hosts = s.value("hosts", config.synth.hosts);
    config.synth.tasks_per_host = s.value("tasks_per_host", config.synth.tasks_per_host);
    config.synth.business_hour_start = s.value("business_hour_start", config.synth.business_hour_start);
    config.synth.business_hour_end = s.value("business_hour_end", config.synth.business_hour_end);
    config.synth.days = s.value("days", config.synth.days);
    config.synth.start_date = s.value("start_date", config.synth.start_date);
  }
  if (j.contains("io")) {
    const json& io = j["io"];
    reject_unknown_keys(io, {"corpus_format", "jobs"}, "io.");
    config.corpus_format = io.value("corpus_format", config.corpus_format);
    config.jobs = io.value("jobs", config.jobs);
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("config file is not valid JSON: " + path);
  return config_from_json(j);
}

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides,
                     bool config_file_had_seed) {
  if (overrides.seed) {
    config.seed = *overrides.seed;
  } else if (!config_file_had_seed) {
    if (const char* env = std::getenv("CBOTT_SEED")) {
      try {
        config.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw DataError("CBOTT_SEED is not a valid integer");
      }
    }
  }
  if (overrides.trials) config.trials = *overrides.trials;
  if (overrides.schemes) config.schemes = *overrides.schemes;
  if (overrides.min_tasks) config.min_tasks = *overrides.min_tasks;
  if (overrides.jobs) config.jobs = *overrides.jobs;
  if (overrides.hosts) config.synth.hosts = *overrides.hosts;
  if (overrides.tasks_per_host) config.synth.tasks_per_host = *overrides.tasks_per_host;
  config.validate();
}

std::string ExperimentConfig::fingerprint() const {
  const std::string dump = config_to_json(*this).dump();
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(dump)));
  return buf;
}

void write_resolved_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write resolved config '" + path + "'");
  out << config_to_json(config).dump(2) << '\n';
}

}  // namespace cbott
