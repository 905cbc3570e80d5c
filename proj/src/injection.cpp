#include "cbott/injection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

namespace cbott {

namespace {

// Max binary cosine of the candidate against the host's organic tasks.
double max_similarity(const Task& candidate, const std::vector<Task>& host_tasks) {
  double best = 0;
  for (const auto& task : host_tasks) {
    if (task.source_tag != "organic") continue;
    best = std::max(best, static_cast<double>(binary_task_cosine(candidate, task)));
  }
  return best;
}

Task make_injected(const Task& source, const std::string& host_id, int task_index, int scheme) {
  Task task = source;
  task.host_id = host_id;
  task.task_index = task_index;
  task.source_tag = "injected:scheme-" + std::to_string(scheme);
  return task;
}

// Uniform draw from the complement of the active-hour set; falls back to
// the least-frequent active hour when the complement is empty.
std::pair<int, bool> draw_inactive_hour(const std::vector<Task>& host_tasks,
                                        const std::set<int>& active, Rng& rng) {
  std::vector<int> inactive;
  for (int h = 0; h < kHourClasses; ++h)
    if (!active.count(h)) inactive.push_back(h);
  if (!inactive.empty()) return {inactive[rng.index(inactive.size())], false};

  std::map<int, int> counts;
  for (const auto& task : host_tasks)
    if (task.source_tag == "organic") ++counts[task.mean_hour];
  int best_hour = 0;
  int best_count = std::numeric_limits<int>::max();
  for (const auto& [hour, count] : counts) {
    if (count < best_count) {
      best_count = count;
      best_hour = hour;
    }
  }
  return {best_hour, true};
}

// Shared draw loop for schemes 1 and 3: uniform (donor host, donor task)
// until the similarity band accepts.
InjectionRecord select_donor(const std::string& host_id, std::vector<Task>& host_tasks,
                             const TasksByHost& all_tasks, Rng& rng, int scheme) {
  std::vector<const std::vector<Task>*> donor_hosts;
  std::vector<std::string> donor_names;
  for (const auto& [other, tasks] : all_tasks) {
    if (other == host_id || tasks.empty()) continue;
    donor_hosts.push_back(&tasks);
    donor_names.push_back(other);
  }
  if (donor_hosts.empty())
    throw DataError("injection-infeasible: no donor hosts available for " + host_id);

  InjectionRecord record;
  record.scheme = scheme;
  record.host_id = host_id;

  for (int attempt = 1; attempt <= kMaxInjectionAttempts; ++attempt) {
    const std::size_t h = rng.index(donor_hosts.size());
    const std::vector<Task>& donor_tasks = *donor_hosts[h];
    const Task& candidate = donor_tasks[rng.index(donor_tasks.size())];
    const double sim = max_similarity(candidate, host_tasks);
    if (sim >= kSimilarityLow && sim < kSimilarityHigh) {
      record.donor_host = donor_names[h];
      record.donor_task_index = candidate.task_index;
      record.similarity = sim;
      record.attempts = attempt;
      record.injected_task_index = static_cast<int>(host_tasks.size()) + 1;
      host_tasks.push_back(make_injected(candidate, host_id, record.injected_task_index, scheme));
      return record;
    }
  }
  throw DataError("injection-infeasible: no donor task within the similarity band for host " +
                  host_id + " after " + std::to_string(kMaxInjectionAttempts) + " attempts");
}

}  // namespace

std::set<int> active_hour_set(const std::vector<Task>& tasks) {
  std::set<int> hours;
  for (const auto& task : tasks)
    if (task.source_tag == "organic") hours.insert(task.mean_hour);
  return hours;
}

InjectionRecord inject_scheme1(const std::string& host_id, std::vector<Task>& host_tasks,
                               const TasksByHost& all_tasks, Rng& rng) {
  InjectionRecord record = select_donor(host_id, host_tasks, all_tasks, rng, 1);
  const auto active = active_hour_set(host_tasks);
  record.active_hours.assign(active.begin(), active.end());
  return record;
}

InjectionRecord inject_scheme2(const std::string& host_id, std::vector<Task>& host_tasks, Rng& rng) {
  std::vector<std::size_t> organic;
  for (std::size_t i = 0; i < host_tasks.size(); ++i)
    if (host_tasks[i].source_tag == "organic") organic.push_back(i);
  if (organic.empty()) throw DataError("injection-infeasible: host " + host_id + " has no organic tasks");

  const auto active = active_hour_set(host_tasks);
  const auto [hour, fallback] = draw_inactive_hour(host_tasks, active, rng);

  const Task& source = host_tasks[organic[rng.index(organic.size())]];
  InjectionRecord record;
  record.scheme = 2;
  record.host_id = host_id;
  record.donor_task_index = source.task_index;  // clone origin, same host
  record.assigned_hour = hour;
  record.hour_fallback = fallback;
  record.attempts = 1;
  record.active_hours.assign(active.begin(), active.end());
  record.injected_task_index = static_cast<int>(host_tasks.size()) + 1;

  Task injected = make_injected(source, host_id, record.injected_task_index, 2);
  injected.mean_hour = hour;
  host_tasks.push_back(std::move(injected));
  return record;
}

InjectionRecord inject_scheme3(const std::string& host_id, std::vector<Task>& host_tasks,
                               const TasksByHost& all_tasks, Rng& rng, Rng& hour_rng) {
  InjectionRecord record = select_donor(host_id, host_tasks, all_tasks, rng, 3);

  // Reassign the donor's hour exactly as scheme 2 would; the complement is
  // computed against organic tasks only, so the appended donor does not
  // change the draw.
  const auto active = active_hour_set(host_tasks);
  const auto [hour, fallback] = draw_inactive_hour(host_tasks, active, hour_rng);
  host_tasks.back().mean_hour = hour;

  record.scheme = 3;
  record.assigned_hour = hour;
  record.hour_fallback = fallback;
  record.active_hours.assign(active.begin(), active.end());
  return record;
}

void append_injection_jsonl(const InjectionRecord& record, std::ostream& out) {
  nlohmann::json j;
  j["scheme"] = record.scheme;
  j["host"] = record.host_id;
  j["trial"] = record.trial;
  j["injected_task_index"] = record.injected_task_index;
  j["donor_host"] = record.donor_host;
  j["donor_task_index"] = record.donor_task_index;
  j["similarity"] = record.similarity;
  j["assigned_hour"] = record.assigned_hour;
  j["hour_fallback"] = record.hour_fallback;
  j["active_hours"] = record.active_hours;
  j["rng_seed"] = record.rng_seed;
  j["attempts"] = record.attempts;
  out << j.dump() << '\n';
}

std::vector<InjectionRecord> load_injection_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read injection audit log '" + path + "'");
  std::vector<InjectionRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("invalid JSON in injection audit log: " + path);
    InjectionRecord r;
    r.scheme = j.at("scheme").get<int>();
    r.host_id = j.at("host").get<std::string>();
    r.trial = j.at("trial").get<int>();
    r.injected_task_index = j.at("injected_task_index").get<int>();
    r.donor_host = j.at("donor_host").get<std::string>();
    r.donor_task_index = j.at("donor_task_index").get<int>();
    r.similarity = j.at("similarity").get<double>();
    r.assigned_hour = j.at("assigned_hour").get<int>();
    r.hour_fallback = j.at("hour_fallback").get<bool>();
    r.active_hours = j.at("active_hours").get<std::vector<int>>();
    r.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    r.attempts = j.at("attempts").get<int>();
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace cbott
