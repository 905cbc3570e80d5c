#pragma once

#include "cbott/baselines.hpp"
#include "cbott/preprocess.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cbott {

// Audit record for one accepted injection; written as JSONL so acceptance
// of the similarity band and hour complement can be re-checked offline.
struct InjectionRecord {
  int scheme = 0;
  std::string host_id;
  int trial = 0;
  int injected_task_index = 0;
  std::string donor_host;              // schemes 1, 3
  int donor_task_index = 0;            // schemes 1, 3
  double similarity = 0;               // schemes 1, 3: max binary cosine vs organic tasks
  int assigned_hour = -1;              // schemes 2, 3
  bool hour_fallback = false;          // scheme 2/3: host was active all 24 hours
  std::vector<int> active_hours;       // organic active-hour set at injection time
  std::uint64_t rng_seed = 0;
  int attempts = 0;
};

// Hours (0..23) with at least one organic task on the host.
std::set<int> active_hour_set(const std::vector<Task>& tasks);

inline constexpr double kSimilarityLow = 0.71;
inline constexpr double kSimilarityHigh = 1.0;  // exclusive
inline constexpr int kMaxInjectionAttempts = 10000;

// Scheme 1: draw (donor host != target, donor task) until the candidate's
// maximum binary cosine against the host's organic tasks lands in
// [0.71, 1.00); the donor keeps its original execution times. Throws
// DataError when the attempt cap is exceeded.
InjectionRecord inject_scheme1(const std::string& host_id, std::vector<Task>& host_tasks,
                               const TasksByHost& all_tasks, Rng& rng);

// Scheme 2: clone a random organic task and move its mean hour into the
// complement of the host's active-hour set. A host active all 24 hours
// falls back to its least-frequent hour and flags the record.
InjectionRecord inject_scheme2(const std::string& host_id, std::vector<Task>& host_tasks, Rng& rng);

// Scheme 3: scheme-1 task selection followed by scheme-2 hour
// reassignment. `hour_rng` is a separate stream so the assigned hours
// match the ones scheme 2 draws for the same (host, trial).
InjectionRecord inject_scheme3(const std::string& host_id, std::vector<Task>& host_tasks,
                               const TasksByHost& all_tasks, Rng& rng, Rng& hour_rng);

void append_injection_jsonl(const InjectionRecord& record, std::ostream& out);
std::vector<InjectionRecord> load_injection_jsonl(const std::string& path);

}  // namespace cbott
