#include "cbott/dataset.hpp"

#include <doctest.h>

#include <sstream>

using namespace cbott;

namespace {

// The worked single-command task: "C:\Windows\System32\cmd.exe ipconfig /all"
// at 2023-01-15 16:15:00.
Task example_task(int index = 1) {
  PreprocessParams params;
  ProcessAuditRecord record{"h", *parse_rfc3339("2023-01-15T16:15:00Z"),
                            R"(C:\Windows\System32\cmd.exe ipconfig /all)"};
  auto tasks = segment_tasks("h", {record}, params);
  tasks[0].task_index = index;
  return tasks[0];
}

Task task_from_tokens(const std::vector<std::vector<std::string>>& commands, int index,
                      int mean_hour) {
  Task t;
  t.host_id = "h";
  t.task_index = index;
  t.mean_hour = mean_hour;
  for (const auto& terms : commands) t.commands.push_back({terms, 0});
  t.tokens.push_back(kBeginTask);
  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (i > 0) t.tokens.push_back(kNextCommand);
    for (const auto& term : commands[i]) t.tokens.push_back(term);
  }
  t.tokens.push_back(kEndTask);
  return t;
}

}  // namespace

TEST_CASE("vocabulary of the example task has nine entries") {
  const Vocabulary vocab = build_vocabulary({example_task()});
  CHECK(vocab.size() == 9);
  CHECK(vocab.term_of(0) == "0");
  CHECK(vocab.id_of(kBeginTask) == 1);
  CHECK(vocab.id_of(kEndTask) == 2);
  CHECK_FALSE(vocab.contains(kNextCommand));  // single-command task
  CHECK(vocab.id_of("c") == 3);
  CHECK(vocab.id_of("all") == 8);
  CHECK_THROWS_AS(vocab.id_of(""), DataError);

  // Identical tasks do not grow the vocabulary.
  const Vocabulary doubled = build_vocabulary({example_task(1), example_task(2)});
  CHECK(doubled.size() == 9);
  CHECK(doubled.hash() == vocab.hash());
}

TEST_CASE("vocabulary id-term bijection") {
  const Task t = task_from_tokens({{"alpha", "beta"}, {"gamma", "alpha"}}, 1, 10);
  const Vocabulary vocab = build_vocabulary({t});
  CHECK(vocab.contains(kNextCommand));
  for (TokenId id = 1; id < vocab.size(); ++id) CHECK(vocab.id_of(vocab.term_of(id)) == id);
}

TEST_CASE("a literal term 0 is distinct from padding") {
  const Task t = task_from_tokens({{"ping", "0", "x"}}, 1, 3);
  const Vocabulary vocab = build_vocabulary({t});
  CHECK(vocab.id_of("0") != kPadId);
  CHECK(vocab.term_of(kPadId) == "0");
}

TEST_CASE("windows of the example task match the worked rows") {
  const Task task = example_task();
  const Vocabulary vocab = build_vocabulary({task});
  const auto windows = build_windows(task, 5, vocab);
  REQUIRE(windows.size() == 8);

  auto decode = [&](const TrainingWindow& w) {
    std::vector<std::string> ctx;
    for (TokenId id : w.context) ctx.push_back(vocab.term_of(id));
    return ctx;
  };

  // Row 1: [0, 0, c, windows] -> <begintask>
  CHECK(decode(windows[0]) == std::vector<std::string>{"0", "0", "c", "windows"});
  CHECK(vocab.term_of(windows[0].target_term) == kBeginTask);
  CHECK(windows[0].target_hour == 16);
  // Row 5: [windows, system32, ipconfig, all] -> cmd.exe
  CHECK(decode(windows[4]) ==
        std::vector<std::string>{"windows", "system32", "ipconfig", "all"});
  CHECK(vocab.term_of(windows[4].target_term) == "cmd.exe");
  // Row 7: [cmd.exe, ipconfig, <endtask>, 0] -> all
  CHECK(decode(windows[6]) ==
        std::vector<std::string>{"cmd.exe", "ipconfig", kEndTask, "0"});
  CHECK(vocab.term_of(windows[6].target_term) == "all");
  // Row 8: [ipconfig, all, 0, 0] -> <endtask>
  CHECK(decode(windows[7]) == std::vector<std::string>{"ipconfig", "all", "0", "0"});
  CHECK(vocab.term_of(windows[7].target_term) == kEndTask);
  for (const auto& w : windows) CHECK(w.target_hour == 16);
}

TEST_CASE("degenerate and wide windows") {
  // A one-token stream gets a single all-padding window.
  Task t;
  t.host_id = "h";
  t.task_index = 1;
  t.mean_hour = 5;
  t.tokens = {"solo"};
  t.commands.push_back({{"solo"}, 0});
  const Vocabulary vocab = build_vocabulary({t});
  const auto windows = build_windows(t, 3, vocab);
  REQUIRE(windows.size() == 1);
  CHECK(windows[0].context == std::vector<TokenId>{kPadId, kPadId});

  const Task example = example_task();
  const Vocabulary v2 = build_vocabulary({example});
  const auto wide = build_windows(example, 7, v2);
  REQUIRE(wide.size() == 8);
  for (const auto& w : wide) CHECK(w.context.size() == 6);

  CHECK_THROWS_AS(build_windows(example, 4, v2), DataError);
  CHECK_THROWS_AS(build_windows(example, 1, v2), DataError);
}

TEST_CASE("build_dataset ranges and counts") {
  const Task a = example_task(1);                                      // 8 tokens
  const Task b = task_from_tokens({{"x", "y", "z"}}, 2, 16);           // 5 tokens
  const HostDataset one = build_dataset({a}, 5);
  CHECK(one.windows.size() == 8);
  REQUIRE(one.task_ranges.size() == 1);
  CHECK(one.task_ranges[0] == std::pair<std::size_t, std::size_t>{0, 8});

  const HostDataset two = build_dataset({a, b}, 5);
  CHECK(two.windows.size() == 13);
  CHECK(two.task_ranges[0] == std::pair<std::size_t, std::size_t>{0, 8});
  CHECK(two.task_ranges[1] == std::pair<std::size_t, std::size_t>{8, 13});
  CHECK(two.task_count == 2);

  CHECK_THROWS_AS(build_dataset({}, 5), DataError);
}

TEST_CASE("dataset invariants") {
  const Task a = example_task(1);
  const Task b = task_from_tokens({{"x", "y"}, {"ipconfig", "x"}}, 2, 7);
  const HostDataset ds = build_dataset({a, b}, 5);

  // Window count equals token count per task; middles reconstruct the
  // stream; padding never a target and only near stream edges.
  const std::vector<Task> tasks = {a, b};
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const auto [begin, end] = ds.task_ranges[ti];
    CHECK(end - begin == tasks[ti].tokens.size());
    const int length = static_cast<int>(end - begin);
    for (int k = 0; k < length; ++k) {
      const auto& w = ds.windows[begin + static_cast<std::size_t>(k)];
      CHECK(ds.vocabulary.term_of(w.target_term) == tasks[ti].tokens[static_cast<std::size_t>(k)]);
      CHECK(w.target_term != kPadId);
      for (std::size_t slot = 0; slot < w.context.size(); ++slot) {
        if (w.context[slot] == kPadId) {
          const int offset = static_cast<int>(slot) < 2 ? static_cast<int>(slot) - 2
                                                        : static_cast<int>(slot) - 1;
          const int pos = k + offset;
          CHECK((pos < 0 || pos >= length));
        }
      }
    }
  }

  // Determinism: identical input yields bit-identical datasets.
  const HostDataset again = build_dataset({a, b}, 5);
  CHECK(again.windows.size() == ds.windows.size());
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    CHECK(again.windows[i].context == ds.windows[i].context);
    CHECK(again.windows[i].target_term == ds.windows[i].target_term);
    CHECK(again.windows[i].target_hour == ds.windows[i].target_hour);
  }
  CHECK(again.vocabulary.hash() == ds.vocabulary.hash());
}

TEST_CASE("dataset csv dump") {
  const HostDataset ds = build_dataset({example_task()}, 5);
  std::ostringstream out;
  dump_dataset_csv(ds, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "ctx_1,ctx_2,ctx_3,ctx_4,target_term,target_hour,task_index");
  std::string first;
  std::getline(lines, first);
  CHECK(first == "0,0,3,4,1,16,1");  // pads, c, windows -> <begintask>
}
