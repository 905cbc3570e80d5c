#include "cbott/injection.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace cbott;

namespace {

Task term_task(const std::string& host, int index, std::vector<std::string> terms, int hour) {
  Task t;
  t.host_id = host;
  t.task_index = index;
  t.mean_hour = hour;
  t.commands.push_back({terms, 0});
  t.tokens.push_back(kBeginTask);
  for (auto& term : terms) t.tokens.push_back(term);
  t.tokens.push_back(kEndTask);
  return t;
}

}  // namespace

TEST_CASE("active hour set ignores injected tasks") {
  std::vector<Task> tasks = {term_task("h", 1, {"a"}, 9), term_task("h", 2, {"b"}, 10)};
  tasks.push_back(term_task("h", 3, {"c"}, 23));
  tasks.back().source_tag = "injected:scheme-2";
  CHECK(active_hour_set(tasks) == std::set<int>{9, 10});
}

TEST_CASE("scheme 1 accepts only the similarity band") {
  // Target host has one 4-term task. Donor host offers: an identical task
  // (sim 1.0, rejected), an orthogonal task (sim 0, rejected), and a
  // 3-of-4 overlap task (sim 0.866, accepted).
  TasksByHost all;
  all["target"] = {term_task("target", 1, {"a", "b", "c", "d"}, 10)};
  all["donor"] = {term_task("donor", 1, {"a", "b", "c", "d"}, 11),
                  term_task("donor", 2, {"x", "y", "z"}, 11),
                  term_task("donor", 3, {"a", "b", "c"}, 11)};

  std::vector<Task> host_tasks = all["target"];
  Rng rng(1);
  const InjectionRecord record = inject_scheme1("target", host_tasks, all, rng);
  CHECK(record.donor_host == "donor");
  CHECK(record.donor_task_index == 3);
  CHECK(record.similarity == doctest::Approx(3.0 / std::sqrt(12.0)).epsilon(1e-12));
  CHECK(record.similarity >= kSimilarityLow);
  CHECK(record.similarity < kSimilarityHigh);
  REQUIRE(host_tasks.size() == 2);
  CHECK(host_tasks.back().source_tag == "injected:scheme-1");
  CHECK(host_tasks.back().task_index == 2);
  CHECK(host_tasks.back().host_id == "target");
  // Donor's execution hour is preserved.
  CHECK(host_tasks.back().mean_hour == 11);
}

TEST_CASE("scheme 1 infeasible cases") {
  TasksByHost all;
  all["only"] = {term_task("only", 1, {"a"}, 10)};
  std::vector<Task> tasks = all["only"];
  Rng rng(1);
  CHECK_THROWS_AS(inject_scheme1("only", tasks, all, rng), DataError);

  // A donor pool with nothing in the band exhausts the attempt cap.
  TasksByHost no_band;
  no_band["target"] = {term_task("target", 1, {"a", "b", "c", "d"}, 10)};
  no_band["donor"] = {term_task("donor", 1, {"x", "y"}, 11)};
  std::vector<Task> t2 = no_band["target"];
  Rng rng2(1);
  CHECK_THROWS_AS(inject_scheme1("target", t2, no_band, rng2), DataError);
}

TEST_CASE("scheme 2 assigns an inactive hour") {
  std::vector<Task> tasks;
  for (int i = 0; i < 9; ++i) tasks.push_back(term_task("h", i + 1, {"a", "b"}, 9 + (i % 9)));
  Rng rng(7);
  const InjectionRecord record = inject_scheme2("h", tasks, rng);
  CHECK(record.scheme == 2);
  CHECK_FALSE(record.hour_fallback);
  const std::set<int> active(record.active_hours.begin(), record.active_hours.end());
  CHECK(active == std::set<int>{9, 10, 11, 12, 13, 14, 15, 16, 17});
  CHECK(active.count(record.assigned_hour) == 0);
  CHECK(tasks.back().mean_hour == record.assigned_hour);
  CHECK(tasks.back().source_tag == "injected:scheme-2");
  // The clone's tokens equal some organic task's tokens.
  bool found = false;
  for (std::size_t i = 0; i + 1 < tasks.size(); ++i)
    found = found || tasks[i].tokens == tasks.back().tokens;
  CHECK(found);
}

TEST_CASE("scheme 2 with a single inactive hour picks it") {
  std::vector<Task> tasks;
  int index = 0;
  for (int h = 0; h < 24; ++h) {
    if (h == 13) continue;  // the only inactive hour
    tasks.push_back(term_task("h", ++index, {"a"}, h));
  }
  Rng rng(3);
  const InjectionRecord record = inject_scheme2("h", tasks, rng);
  CHECK(record.assigned_hour == 13);
  CHECK_FALSE(record.hour_fallback);
}

TEST_CASE("scheme 2 fallback when all hours active") {
  // Every hour occurs; hour 5 occurs once, every other hour twice.
  std::vector<Task> tasks;
  int index = 0;
  for (int h = 0; h < 24; ++h) {
    tasks.push_back(term_task("h", ++index, {"a"}, h));
    if (h != 5) tasks.push_back(term_task("h", ++index, {"b"}, h));
  }
  Rng rng(4);
  const InjectionRecord record = inject_scheme2("h", tasks, rng);
  CHECK(record.hour_fallback);
  CHECK(record.assigned_hour == 5);
}

TEST_CASE("scheme 2 seed 42 regression") {
  std::vector<Task> tasks;
  for (int i = 0; i < 12; ++i)
    tasks.push_back(term_task("h", i + 1, {"t" + std::to_string(i % 4)}, 9 + (i % 8)));
  Rng rng(42);
  const InjectionRecord record = inject_scheme2("h", tasks, rng);
  // Frozen from the first run; guards the draw order against refactors.
  CHECK(record.assigned_hour == 6);
  CHECK(record.donor_task_index == 9);
}

TEST_CASE("scheme 3 combines donor task with off-hour") {
  TasksByHost all;
  std::vector<Task> target_tasks;
  for (int i = 0; i < 6; ++i)
    target_tasks.push_back(term_task("target", i + 1, {"a", "b", "c", "d"}, 9 + i));
  all["target"] = target_tasks;
  all["donor"] = {term_task("donor", 1, {"a", "b", "c"}, 10)};

  std::vector<Task> tasks = all["target"];
  Rng rng(2);
  Rng hour_rng(5);
  const InjectionRecord record = inject_scheme3("target", tasks, all, rng, hour_rng);
  CHECK(record.scheme == 3);
  CHECK(record.similarity == doctest::Approx(3.0 / std::sqrt(12.0)));
  // Tokens equal the donor candidate's tokens; hour outside the active set.
  CHECK(tasks.back().tokens == all["donor"][0].tokens);
  const std::set<int> active(record.active_hours.begin(), record.active_hours.end());
  CHECK(active.count(record.assigned_hour) == 0);
  CHECK(tasks.back().mean_hour == record.assigned_hour);
  CHECK(tasks.back().source_tag == "injected:scheme-3");

  // Single-host corpus is infeasible.
  TasksByHost lone;
  lone["x"] = {term_task("x", 1, {"a"}, 9)};
  std::vector<Task> lone_tasks = lone["x"];
  Rng r1(1), r2(2);
  CHECK_THROWS_AS(inject_scheme3("x", lone_tasks, lone, r1, r2), DataError);
}

TEST_CASE("scheme 3 reuses scheme 1 donors and scheme 2 hours") {
  TasksByHost all;
  std::vector<Task> target_tasks;
  for (int i = 0; i < 5; ++i)
    target_tasks.push_back(term_task("target", i + 1, {"a", "b", "c", "d"}, 10));
  all["target"] = target_tasks;
  all["donor"] = {term_task("donor", 1, {"a", "b", "c"}, 10),
                  term_task("donor", 2, {"a", "b", "d"}, 11)};

  // Same seeds, run scheme 1 and scheme 3 independently.
  std::vector<Task> t1 = all["target"];
  Rng inj1(99);
  const InjectionRecord r1 = inject_scheme1("target", t1, all, inj1);

  std::vector<Task> t3 = all["target"];
  Rng inj3(99);
  Rng hours(55);
  const InjectionRecord r3 = inject_scheme3("target", t3, all, inj3, hours);
  CHECK(r3.donor_host == r1.donor_host);
  CHECK(r3.donor_task_index == r1.donor_task_index);

  // And the hour matches what scheme 2 would assign with the same stream.
  std::vector<Task> t2 = all["target"];
  Rng hours_again(55);
  const InjectionRecord r2 = inject_scheme2("target", t2, hours_again);
  CHECK(r3.assigned_hour == r2.assigned_hour);
}

TEST_CASE("injection audit jsonl round trip") {
  InjectionRecord record;
  record.scheme = 3;
  record.host_id = "10.0.0.2";
  record.trial = 2;
  record.injected_task_index = 151;
  record.donor_host = "10.0.0.9";
  record.donor_task_index = 17;
  record.similarity = 0.8125;
  record.assigned_hour = 4;
  record.hour_fallback = false;
  record.active_hours = {9, 10, 11};
  record.rng_seed = 12345;
  record.attempts = 3;

  std::ostringstream out;
  append_injection_jsonl(record, out);
  const std::string path = "/tmp/cbott_test_injections.jsonl";
  {
    std::ofstream f(path);
    f << out.str();
  }
  const auto loaded = load_injection_jsonl(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].scheme == 3);
  CHECK(loaded[0].host_id == "10.0.0.2");
  CHECK(loaded[0].similarity == 0.8125);
  CHECK(loaded[0].active_hours == std::vector<int>{9, 10, 11});
  CHECK(loaded[0].rng_seed == 12345);
}
