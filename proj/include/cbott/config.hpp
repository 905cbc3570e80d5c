#pragma once

#include "cbott/baselines.hpp"
#include "cbott/network.hpp"
#include "cbott/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbott {

struct SynthesisConfig {
  int hosts = 20;
  int tasks_per_host = 150;
  int business_hour_start = 9;   // inclusive
  int business_hour_end = 17;    // exclusive
  int days = 14;
  std::string start_date = "2023-01-02T00:00:00Z";
};

// Resolved run configuration. Defaults follow the reference experiment:
// delta 3 minutes, gamma 20, w 5, 30 epochs with patience 5 / min-delta
// 1e-4, 3 trials, DBSCAN eps 0.5..10 by 0.5, OC-SVM gamma "auto".
struct ExperimentConfig {
  PreprocessParams preprocess;
  int min_tasks = 100;
  std::vector<std::string> host_allowlist;

  int window_size = 5;

  TrainConfig model;

  BaselineSweepConfig baselines;

  int trials = 3;
  std::vector<int> schemes = {1, 2, 3};
  std::uint64_t seed = 1;

  SynthesisConfig synth;

  std::string corpus_format = "jsonl";
  int jobs = 0;  // 0 = hardware concurrency

  void validate() const;

  // Stable digest of every field that affects results; reports carry it.
  std::string fingerprint() const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

// Defaults overlaid with the file's values; unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

// Flag-style overrides applied on top of a loaded config (flags beat file
// values, which beat defaults; CBOTT_SEED beats the built-in default only).
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::vector<int>> schemes;
  std::optional<int> min_tasks;
  std::optional<int> jobs;
  std::optional<int> hosts;
  std::optional<int> tasks_per_host;
};

void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides,
                     bool config_file_had_seed);

void write_resolved_config(const ExperimentConfig& config, const std::string& path);

}  // namespace cbott
