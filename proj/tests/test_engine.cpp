#include "doctest.h"

#include <cmath>
#include <vector>

#include "faultline/engine.hpp"
#include "faultline/schedulers.hpp"

using namespace faultline;

namespace {

SystemConfig cfg(int m, double s, std::vector<double> sizes) {
  SystemConfig c;
  c.m = m;
  c.s = s;
  c.sizes = std::move(sizes);
  return c;
}

AdversarialPattern injections_at_zero(int machines, std::vector<double> sizes) {
  AdversarialPattern pat;
  pat.machines = machines;
  for (double sz : sizes) {
    pat.events.push_back(PatternEvent{PatternEventKind::Inject, 0.0, sz, -1});
  }
  return pat;
}

std::vector<TraceEventKind> kinds(const ExecutionTrace& tr) {
  std::vector<TraceEventKind> out;
  for (const auto& e : tr.events) out.push_back(e.kind);
  return out;
}

std::vector<double> times(const ExecutionTrace& tr) {
  std::vector<double> out;
  for (const auto& e : tr.events) out.push_back(e.t);
  return out;
}

// Deterministic per-machine pick for exercising the engine itself.
struct IndexPolicy final : Policy {
  std::string name() const override { return "test-index"; }
  void reset(int) override {}
  TaskChoice choose(const QueueSnapshot& snap, int machine) override {
    const auto q = snap.unified_by_arrival();
    const std::size_t i = static_cast<std::size_t>(machine) % q.size();
    return TaskChoice{q[i].id, ChoiceKind::Modular, -1};
  }
};

struct ConstPolicy final : Policy {
  TaskId id;
  explicit ConstPolicy(TaskId i) : id(i) {}
  std::string name() const override { return "test-const"; }
  void reset(int) override {}
  TaskChoice choose(const QueueSnapshot&, int) override {
    return TaskChoice{id, ChoiceKind::Modular, -1};
  }
};

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("alive intervals from crash/restart alternation") {
  AdversarialPattern pat;
  pat.machines = 2;
  pat.start_alive = {true, false};
  pat.events = {
      {PatternEventKind::Crash, 5.0, 0.0, 0},
      {PatternEventKind::Restart, 7.0, 0.0, 1},
  };
  const auto iv = alive_intervals(pat);
  REQUIRE_EQ(iv.size(), 2);
  REQUIRE_EQ(iv[0].size(), 1);
  CHECK_EQ(iv[0][0].first, doctest::Approx(0.0));
  CHECK_EQ(iv[0][0].second, doctest::Approx(5.0));
  REQUIRE_EQ(iv[1].size(), 1);
  CHECK_EQ(iv[1][0].first, doctest::Approx(7.0));
  CHECK(std::isinf(iv[1][0].second));
}

TEST_CASE("alive intervals report or throw on broken alternation") {
  AdversarialPattern pat;
  pat.machines = 1;
  pat.events = {
      {PatternEventKind::Crash, 1.0, 0.0, 0},
      {PatternEventKind::Crash, 2.0, 0.0, 0},
  };
  CHECK_THROWS_AS(alive_intervals(pat), PatternError);
  std::vector<std::string> v;
  alive_intervals(pat, &v);
  REQUIRE_EQ(v.size(), 1);
  CHECK(v[0].find("already crashed") != std::string::npos);
}

TEST_CASE("validate finds coverage gaps") {
  AdversarialPattern gap;
  gap.machines = 2;
  gap.start_alive = {true, false};
  gap.events = {
      {PatternEventKind::Crash, 5.0, 0.0, 0},
      {PatternEventKind::Restart, 7.0, 0.0, 1},
  };
  const auto v = validate(gap);
  REQUIRE_EQ(v.size(), 1);
  CHECK(v[0].find("no machine alive on [5, 7)") != std::string::npos);

  AdversarialPattern handoff = gap;
  handoff.events[1].t = 5.0;
  handoff.sort_stable();
  CHECK(validate(handoff).empty());

  AdversarialPattern trailing;
  trailing.machines = 1;
  trailing.events = {{PatternEventKind::Crash, 5.0, 0.0, 0}};
  const auto tv = validate(trailing);
  REQUIRE_EQ(tv.size(), 1);
  CHECK(tv[0].find("from t=5 onward") != std::string::npos);
}

TEST_CASE("single machine drains a queue in order") {
  const auto c = cfg(1, 1.0, {1.0});
  auto pat = injections_at_zero(1, {1.0, 1.0, 1.0});
  auto pol = make_policy("fifo", c);
  const auto tr = run(c, pat, *pol, 10.0);

  using K = TraceEventKind;
  CHECK_EQ(kinds(tr), std::vector<K>{K::Inject, K::Inject, K::Inject, K::CycleStart,
                                     K::Complete, K::CycleStart, K::Complete,
                                     K::CycleStart, K::Complete});
  const std::vector<double> expect_t = {0, 0, 0, 0, 1, 1, 2, 2, 3};
  const auto got_t = times(tr);
  REQUIRE_EQ(got_t.size(), expect_t.size());
  for (std::size_t i = 0; i < expect_t.size(); ++i) {
    CHECK_EQ(got_t[i], doctest::Approx(expect_t[i]));
  }
  CHECK_EQ(tr.distinct_completions, 3);
  CHECK_EQ(tr.completed, doctest::Approx(3.0));
  CHECK_EQ(tr.duplicate_informs, 0);
  // get does not remove: the first cycle-start still sees all three pending.
  CHECK_EQ(tr.events[3].kind, TraceEventKind::CycleStart);
  CHECK_EQ(tr.events[3].queue_sizes, std::vector<int>{3});
  // Completion events record the queue after the removal.
  CHECK_EQ(tr.events[4].queue_sizes, std::vector<int>{2});
}

TEST_CASE("speedup shortens cycles") {
  const auto c = cfg(1, 2.0, {1.0});
  auto pat = injections_at_zero(1, {1.0, 1.0, 1.0});
  auto pol = make_policy("fifo", c);
  const auto tr = run(c, pat, *pol, 10.0);
  std::vector<double> completes;
  for (const auto& e : tr.events) {
    if (e.kind == TraceEventKind::Complete) completes.push_back(e.t);
  }
  REQUIRE_EQ(completes.size(), 3);
  CHECK_EQ(completes[0], doctest::Approx(0.5));
  CHECK_EQ(completes[1], doctest::Approx(1.0));
  CHECK_EQ(completes[2], doctest::Approx(1.5));
}

TEST_CASE("same-instant collision produces a redundant inform") {
  const auto c = cfg(2, 1.0, {1.0});
  auto pat = injections_at_zero(2, {1.0});
  auto pol = make_policy("fifo", c);
  const auto tr = run(c, pat, *pol, 10.0);
  // Both machines see the same snapshot with a single task, run it in
  // parallel; the higher machine's inform is redundant.
  CHECK_EQ(tr.distinct_completions, 1);
  CHECK_EQ(tr.completed, doctest::Approx(1.0));
  CHECK_EQ(tr.duplicate_informs, 1);
  CHECK_EQ(tr.wasted_load, doctest::Approx(1.0));
}

TEST_CASE("completion at the crash instant counts (informs before crashes)") {
  const auto c = cfg(2, 1.0, {1.0});
  auto pat = injections_at_zero(2, {1.0, 1.0});
  pat.events.push_back(PatternEvent{PatternEventKind::Crash, 1.0, 0.0, 0});
  pat.sort_stable();
  IndexPolicy pol;
  const auto tr = run(c, pat, pol, 2.0);
  using K = TraceEventKind;
  // t=0: two injections, two cycle starts; t=1: both informs land before the
  // crash, and no interrupt fires because machine 0's cycle already finished.
  CHECK_EQ(kinds(tr), std::vector<K>{K::Inject, K::Inject, K::CycleStart, K::CycleStart,
                                     K::Complete, K::Complete, K::Crash});
  CHECK_EQ(tr.events[4].machine, 0);
  CHECK_EQ(tr.events[5].machine, 1);
  CHECK_EQ(tr.distinct_completions, 2);
}

TEST_CASE("mid-cycle crash interrupts and the restarted machine takes over") {
  const auto c = cfg(2, 1.0, {2.0});
  AdversarialPattern pat;
  pat.machines = 2;
  pat.start_alive = {true, false};
  pat.events = {
      {PatternEventKind::Inject, 0.0, 2.0, -1},
      {PatternEventKind::Restart, 1.0, 0.0, 1},
      {PatternEventKind::Crash, 1.0, 0.0, 0},
  };
  IndexPolicy pol;
  const auto tr = run(c, pat, pol, 5.0);
  using K = TraceEventKind;
  // Handoff at t=1: restart first (class 2), then interrupt+crash, then the
  // fresh machine re-fetches the still-pending task.
  CHECK_EQ(kinds(tr), std::vector<K>{K::Inject, K::CycleStart, K::Restart, K::Interrupt,
                                     K::Crash, K::CycleStart, K::Complete});
  CHECK_EQ(tr.events[3].task, tr.events[5].task);  // same task re-fetched
  CHECK_EQ(tr.events[6].t, doctest::Approx(3.0));  // progress was lost, not resumed
  CHECK_EQ(tr.distinct_completions, 1);
  CHECK_EQ(tr.completed, doctest::Approx(2.0));
}

TEST_CASE("empty repository parks machines until the next injection") {
  const auto c = cfg(1, 1.0, {1.0});
  AdversarialPattern pat;
  pat.machines = 1;
  pat.events = {{PatternEventKind::Inject, 5.0, 1.0, -1}};
  auto pol = make_policy("fifo", c);
  const auto tr = run(c, pat, *pol, 10.0);
  REQUIRE_FALSE(tr.events.empty());
  CHECK_EQ(tr.events.front().t, doctest::Approx(5.0));
  CHECK_EQ(tr.events.front().kind, TraceEventKind::Inject);
  CHECK_EQ(tr.distinct_completions, 1);
}

TEST_CASE("non-pending choice is a policy violation") {
  const auto c = cfg(1, 1.0, {1.0});
  auto pat = injections_at_zero(1, {1.0});
  ConstPolicy pol(999);
  CHECK_THROWS_AS(run(c, pat, pol, 10.0), PolicyViolation);
}

TEST_CASE("horizon clips unfinished cycles but keeps exact finishes") {
  const auto c = cfg(1, 1.0, {2.0, 3.0});

  auto crossing = injections_at_zero(1, {3.0});
  auto pol1 = make_policy("fifo", c);
  const auto tr1 = run(c, crossing, *pol1, 2.0);
  using K = TraceEventKind;
  CHECK_EQ(kinds(tr1), std::vector<K>{K::Inject, K::CycleStart});
  CHECK_EQ(tr1.completed, doctest::Approx(0.0));

  auto exact = injections_at_zero(1, {2.0});
  auto pol2 = make_policy("fifo", c);
  const auto tr2 = run(c, exact, *pol2, 2.0);
  CHECK_EQ(tr2.completed, doctest::Approx(2.0));
  CHECK_EQ(tr2.distinct_completions, 1);
}

TEST_CASE("run rejects inadmissible patterns and bad horizons") {
  const auto c = cfg(2, 1.0, {1.0});
  AdversarialPattern gap;
  gap.machines = 2;
  gap.start_alive = {true, false};
  gap.events = {
      {PatternEventKind::Crash, 5.0, 0.0, 0},
      {PatternEventKind::Restart, 7.0, 0.0, 1},
  };
  IndexPolicy pol;
  CHECK_THROWS_AS(run(c, gap, pol, 10.0), PatternError);

  auto ok = injections_at_zero(2, {1.0});
  CHECK_THROWS_AS(run(c, ok, pol, 0.0), PatternError);
  CHECK_THROWS_AS(run(c, ok, pol, -1.0), PatternError);
}

TEST_CASE("trace event names are stable") {
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::Inject)), "inject");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::CycleStart)), "cycle-start");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::Complete)), "complete");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::RedundantComplete)),
           "redundant-complete");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::Interrupt)), "interrupt");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::Crash)), "crash");
  CHECK_EQ(std::string(trace_event_name(TraceEventKind::Restart)), "restart");
}

}  // TEST_SUITE
