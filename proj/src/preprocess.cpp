#include "cbott/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace cbott {

bool is_marker_token(const std::string& token) {
  return token == kBeginTask || token == kEndTask || token == kNextCommand;
}

std::set<char> PreprocessParams::default_separators() {
  // Space, tab, slashes, colon, quotes, backquote, dash. Period, underscore
  // and equals are intentionally not separators so terms like "cmd.exe"
  // survive tokenization.
  return {' ', '\t', '\\', '/', ':', '\'', '"', '`', '-'};
}

void PreprocessParams::validate() const {
  if (gamma < 1) throw DataError("preprocess.gamma must be >= 1");
  if (!(delta > 0)) throw DataError("preprocess.delta must be > 0");
  if (!separators.count(' '))
    throw DataError("preprocess.separators must contain the space character");
}

std::string Task::command_text() const {
  std::string out;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (i > 0) out += "; ";
    for (std::size_t j = 0; j < commands[i].terms.size(); ++j) {
      if (j > 0) out += ' ';
      out += commands[i].terms[j];
    }
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& command, const PreprocessParams& params) {
  std::vector<std::string> terms;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      terms.push_back(std::move(current));
      current.clear();
    }
  };
  for (char raw : command) {
    if (static_cast<int>(terms.size()) >= params.gamma) break;
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (params.separators.count(c)) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  if (static_cast<int>(terms.size()) < params.gamma) flush();
  return terms;
}

int mean_hour_of(const std::vector<Timestamp>& timestamps) {
  const double sum = std::accumulate(timestamps.begin(), timestamps.end(), 0.0);
  return hour_of_day(sum / static_cast<double>(timestamps.size()));
}

int mean_execution_hour(const Task& task) {
  std::vector<Timestamp> times;
  times.reserve(task.commands.size());
  for (const auto& cmd : task.commands) times.push_back(cmd.timestamp);
  return mean_hour_of(times);
}

namespace {

void finalize_task(Task& task) {
  task.tokens.clear();
  task.tokens.push_back(kBeginTask);
  for (std::size_t i = 0; i < task.commands.size(); ++i) {
    if (i > 0) task.tokens.push_back(kNextCommand);
    for (const auto& term : task.commands[i].terms) task.tokens.push_back(term);
  }
  task.tokens.push_back(kEndTask);
  task.start = task.commands.front().timestamp;
  task.end = task.commands.back().timestamp;
  task.mean_hour = mean_execution_hour(task);
}

}  // namespace

std::vector<Task> segment_tasks(const std::string& host_id,
                                const std::vector<ProcessAuditRecord>& records,
                                const PreprocessParams& params) {
  params.validate();

  std::vector<TokenizedCommand> commands;
  commands.reserve(records.size());
  for (const auto& record : records) {
    TokenizedCommand cmd{tokenize(record.command, params), record.timestamp};
    if (!cmd.terms.empty()) commands.push_back(std::move(cmd));
  }

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const bool new_task =
        tasks.empty() || commands[i].timestamp - tasks.back().commands.back().timestamp > params.delta;
    if (new_task) {
      Task task;
      task.host_id = host_id;
      task.task_index = static_cast<int>(tasks.size()) + 1;
      tasks.push_back(std::move(task));
    }
    tasks.back().commands.push_back(std::move(commands[i]));
  }
  for (auto& task : tasks) finalize_task(task);
  return tasks;
}

TasksByHost segment_corpus(const Corpus& corpus, const PreprocessParams& params) {
  TasksByHost out;
  for (const auto& [host, records] : corpus.hosts) {
    auto tasks = segment_tasks(host, records, params);
    if (!tasks.empty()) out.emplace(host, std::move(tasks));
  }
  return out;
}

TasksByHost filter_hosts(const TasksByHost& tasks, int min_tasks,
                         const std::vector<std::string>& allowlist) {
  TasksByHost out;
  for (const auto& [host, host_tasks] : tasks) {
    if (static_cast<int>(host_tasks.size()) < min_tasks) continue;
    if (!allowlist.empty() &&
        std::find(allowlist.begin(), allowlist.end(), host) == allowlist.end())
      continue;
    out.emplace(host, host_tasks);
  }
  return out;
}

void dump_tasks_jsonl(const TasksByHost& tasks, std::ostream& out) {
  for (const auto& [host, host_tasks] : tasks) {
    for (const auto& task : host_tasks) {
      nlohmann::json obj;
      obj["host"] = host;
      obj["task_index"] = task.task_index;
      obj["tokens"] = task.tokens;
      obj["mean_hour"] = task.mean_hour;
      obj["start"] = format_rfc3339(task.start);
      obj["end"] = format_rfc3339(task.end);
      obj["source_tag"] = task.source_tag;
      out << obj.dump() << '\n';
    }
  }
}

void dump_tasks_jsonl(const TasksByHost& tasks, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write task dump '" + path + "'");
  dump_tasks_jsonl(tasks, out);
}

}  // namespace cbott
