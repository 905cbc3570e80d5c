#pragma once

#include "cbott/ingest.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cbott {

// Marker tokens delimiting task structure in the flattened token stream.
inline const std::string kBeginTask = "<begintask>";
inline const std::string kEndTask = "<endtask>";
inline const std::string kNextCommand = "<nextcommand>";

bool is_marker_token(const std::string& token);

struct PreprocessParams {
  int gamma = 20;          // max terms kept per command
  double delta = 180.0;    // inactivity gap (seconds) that closes a task
  std::set<char> separators = default_separators();

  static std::set<char> default_separators();

  // Enforces gamma >= 1, delta > 0, and space always in the separator set.
  void validate() const;
};

struct TokenizedCommand {
  std::vector<std::string> terms;
  Timestamp timestamp = 0;
};

// A delta-delimited group of commands on one host.
struct Task {
  std::string host_id;
  int task_index = 0;  // 1-based ordinal within the host, time order
  std::vector<TokenizedCommand> commands;
  std::vector<std::string> tokens;  // marker-decorated flattened stream
  int mean_hour = 0;
  Timestamp start = 0;
  Timestamp end = 0;
  std::string source_tag = "organic";  // or "injected:scheme-<k>"

  // Space-joined terms per command, commands joined by "; ".
  std::string command_text() const;
};

// Lowercases, replaces separator characters with spaces, splits on runs of
// spaces, drops empty terms, keeps the first gamma terms.
std::vector<std::string> tokenize(const std::string& command, const PreprocessParams& params);

// Groups one host's time-sorted records into tasks. Commands that tokenize
// to nothing are dropped first; a gap > delta between consecutive surviving
// commands starts a new task.
std::vector<Task> segment_tasks(const std::string& host_id,
                                const std::vector<ProcessAuditRecord>& records,
                                const PreprocessParams& params);

// Floor of the UTC hour of the arithmetic mean of the task's command
// timestamps.
int mean_execution_hour(const Task& task);
int mean_hour_of(const std::vector<Timestamp>& timestamps);

using TasksByHost = std::map<std::string, std::vector<Task>>;

TasksByHost segment_corpus(const Corpus& corpus, const PreprocessParams& params);

// Keeps hosts with at least min_tasks tasks. When allowlist is nonempty,
// hosts must also appear in it.
TasksByHost filter_hosts(const TasksByHost& tasks, int min_tasks,
                         const std::vector<std::string>& allowlist = {});

// Debug dump: one task per line {host, task_index, tokens, mean_hour,
// start, end, source_tag}.
void dump_tasks_jsonl(const TasksByHost& tasks, std::ostream& out);
void dump_tasks_jsonl(const TasksByHost& tasks, const std::string& path);

}  // namespace cbott
