#include "cbott/dataset.hpp"

#include <fstream>

namespace cbott {

TokenId Vocabulary::add(const std::string& term) {
  auto [it, inserted] = ids_.emplace(term, static_cast<TokenId>(terms_.size()));
  if (inserted) terms_.push_back(term);
  return it->second;
}

Vocabulary Vocabulary::build(const std::vector<Task>& tasks) {
  Vocabulary vocab;
  vocab.terms_.push_back("0");  // padding; not entered in the id map

  // Markers first (only those observed), then terms in first-occurrence
  // order across the task streams.
  bool any_multi_command = false;
  for (const auto& task : tasks) {
    if (task.commands.size() > 1) any_multi_command = true;
  }
  vocab.add(kBeginTask);
  vocab.add(kEndTask);
  if (any_multi_command) vocab.add(kNextCommand);

  for (const auto& task : tasks) {
    for (const auto& token : task.tokens) vocab.add(token);
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<Task>& tasks) {
  return Vocabulary::build(tasks);
}

TokenId Vocabulary::id_of(const std::string& term) const {
  auto it = ids_.find(term);
  if (it == ids_.end()) throw DataError("term not in vocabulary: '" + term + "'");
  return it->second;
}

bool Vocabulary::contains(const std::string& term) const { return ids_.count(term) > 0; }

const std::string& Vocabulary::term_of(TokenId id) const {
  if (id < 0 || id >= size()) throw DataError("token id out of range: " + std::to_string(id));
  return terms_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& term : terms_) {
    for (unsigned char c : term) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // length delimiter
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> Vocabulary::content_terms() const {
  std::vector<std::string> out;
  for (TokenId id = 1; id < size(); ++id) {
    const std::string& term = terms_[static_cast<std::size_t>(id)];
    if (!is_marker_token(term)) out.push_back(term);
  }
  return out;
}

std::vector<TrainingWindow> build_windows(const Task& task, int window_size,
                                          const Vocabulary& vocabulary) {
  if (window_size < 3 || window_size % 2 == 0)
    throw DataError("window size must be odd and >= 3, got " + std::to_string(window_size));

  const int half = (window_size - 1) / 2;
  const int length = static_cast<int>(task.tokens.size());

  std::vector<TokenId> ids(task.tokens.size());
  for (int i = 0; i < length; ++i) ids[static_cast<std::size_t>(i)] = vocabulary.id_of(task.tokens[static_cast<std::size_t>(i)]);

  std::vector<TrainingWindow> windows;
  windows.reserve(task.tokens.size());
  for (int mid = 0; mid < length; ++mid) {
    TrainingWindow window;
    window.context.reserve(static_cast<std::size_t>(window_size) - 1);
    for (int pos = mid - half; pos <= mid + half; ++pos) {
      if (pos == mid) continue;
      window.context.push_back(pos >= 0 && pos < length ? ids[static_cast<std::size_t>(pos)] : kPadId);
    }
    window.target_term = ids[static_cast<std::size_t>(mid)];
    window.target_hour = task.mean_hour;
    window.task_index = task.task_index;
    windows.push_back(std::move(window));
  }
  return windows;
}

HostDataset build_dataset(const std::vector<Task>& tasks, int window_size) {
  if (tasks.empty()) throw DataError("empty-host: cannot build a dataset from zero tasks");

  HostDataset dataset;
  dataset.host_id = tasks.front().host_id;
  dataset.vocabulary = Vocabulary::build(tasks);
  dataset.task_count = static_cast<int>(tasks.size());
  for (const auto& task : tasks) {
    const std::size_t begin = dataset.windows.size();
    auto windows = build_windows(task, window_size, dataset.vocabulary);
    dataset.windows.insert(dataset.windows.end(), windows.begin(), windows.end());
    dataset.task_ranges.emplace_back(begin, dataset.windows.size());
  }
  return dataset;
}

void dump_dataset_csv(const HostDataset& dataset, std::ostream& out) {
  const std::size_t context_len =
      dataset.windows.empty() ? 0 : dataset.windows.front().context.size();
  for (std::size_t i = 0; i < context_len; ++i) out << "ctx_" << (i + 1) << ',';
  out << "target_term,target_hour,task_index\n";
  for (const auto& window : dataset.windows) {
    for (TokenId id : window.context) out << id << ',';
    out << window.target_term << ',' << window.target_hour << ',' << window.task_index << '\n';
  }
}

void dump_dataset_csv(const HostDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset dump '" + path + "'");
  dump_dataset_csv(dataset, out);
}

}  // namespace cbott
