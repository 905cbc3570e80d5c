#pragma once

#include "cbott/preprocess.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cbott {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;

// Per-host term <-> id bijection. Id 0 is the padding entry, rendered "0";
// observed markers follow, then terms in first-occurrence order. A literal
// term "0" in the data would get its own id, so display strings are unique
// up to that corner.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary build(const std::vector<Task>& tasks);

  TokenId id_of(const std::string& term) const;  // throws DataError if absent
  bool contains(const std::string& term) const;
  const std::string& term_of(TokenId id) const;
  TokenId size() const { return static_cast<TokenId>(terms_.size()); }

  // FNV-1a over the id-ordered term list; checkpoints store it so a model
  // is never scored against a different vocabulary.
  std::uint64_t hash() const;

  // Non-marker, non-padding terms in id order (the baseline term universe).
  std::vector<std::string> content_terms() const;

 private:
  TokenId add(const std::string& term);

  std::vector<std::string> terms_;
  std::unordered_map<std::string, TokenId> ids_;
};

// One CBOW row: (w-1) context ids around a middle token, plus the owning
// task's mean execution hour.
struct TrainingWindow {
  std::vector<TokenId> context;  // left half then right half, positional
  TokenId target_term = 0;
  int target_hour = 0;
  int task_index = 0;
};

struct HostDataset {
  std::string host_id;
  Vocabulary vocabulary;
  std::vector<TrainingWindow> windows;
  int task_count = 0;
  // Per-task half-open [begin, end) ranges into `windows`, in task order.
  std::vector<std::pair<std::size_t, std::size_t>> task_ranges;
};

Vocabulary build_vocabulary(const std::vector<Task>& tasks);

// One window per token: window k has middle = token k and context drawn
// from the (w-1)/2 tokens on each side, padding id 0 outside the stream.
std::vector<TrainingWindow> build_windows(const Task& task, int window_size,
                                          const Vocabulary& vocabulary);

HostDataset build_dataset(const std::vector<Task>& tasks, int window_size);

// Debug dump: ctx_1..ctx_{w-1}, target_term, target_hour, task_index (ids).
void dump_dataset_csv(const HostDataset& dataset, std::ostream& out);
void dump_dataset_csv(const HostDataset& dataset, const std::string& path);

}  // namespace cbott
