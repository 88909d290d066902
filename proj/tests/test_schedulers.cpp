#include "doctest.h"

#include <vector>

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

// Snapshot with `counts[c]` tasks in class c; ids are class-major
// (class 0 gets 0..n0-1, class 1 continues), arrivals 0,1,2,... per class.
QueueSnapshot make_snap(const SystemConfig& c, const std::vector<int>& counts) {
  QueueSnapshot s;
  s.by_class.resize(c.sizes.size());
  TaskId id = 0;
  for (std::size_t cls = 0; cls < counts.size(); ++cls) {
    for (int i = 0; i < counts[cls]; ++i) {
      s.by_class[cls].push_back(Task{id++, static_cast<double>(i), c.sizes[cls]});
    }
  }
  return s;
}

TaskId class_id(const QueueSnapshot& s, int cls, int pos) {
  return s.by_class[static_cast<std::size_t>(cls)][static_cast<std::size_t>(pos)].id;
}

}  // namespace

TEST_SUITE("schedulers") {

TEST_CASE("adequate load sum counts only full groups") {
  {
    const auto c = cfg(2, 1.0, {1.0, 2.0});
    const auto s = make_snap(c, {8, 4});
    // top: 2*floor(4/4) = 2; class 0: 1*floor(8/(4+2*2)) = 1.
    CHECK_EQ(adequate_load_sum(s, c), doctest::Approx(3.0));
  }
  {
    const auto c = cfg(2, 1.0, {1.0, 2.0, 4.0});
    const auto s = make_snap(c, {16, 8, 0});
    // top: 0; class 0: floor(16/8) = 2; class 1: 2*floor(8/8) = 2.
    CHECK_EQ(adequate_load_sum(s, c), doctest::Approx(4.0));
  }
}

TEST_CASE("preamble policy arms on a long small queue and runs floor(rho) smalls") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});  // rho_bar=2, arm level 2*4=8
  RhoMPreamblePolicy pol(c);

  auto s = make_snap(c, {10, 5});
  // Machine 0 arms: small queue 10 >= 8.
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.kind, ChoiceKind::Positioned);
  CHECK_EQ(ch.task, class_id(s, 0, 0));
  CHECK_EQ(pol.preamble_remaining(0), 2);
  pol.on_completed(0, s.by_class[0][0]);
  CHECK_EQ(pol.preamble_remaining(0), 1);

  // Machine 1 arms independently and is positioned m apart.
  auto ch1 = pol.choose(s, 1);
  CHECK_EQ(ch1.task, class_id(s, 0, 2));
  CHECK_EQ(pol.preamble_remaining(1), 2);

  // Second preamble execution for machine 0, then the large class takes over.
  auto s2 = make_snap(c, {8, 5});
  auto ch2 = pol.choose(s2, 0);
  CHECK_EQ(ch2.task, class_id(s2, 0, 0));
  pol.on_completed(0, s2.by_class[0][0]);
  CHECK_EQ(pol.preamble_remaining(0), 0);

  auto ch3 = pol.choose(s2, 0);
  CHECK_EQ(ch3.task, class_id(s2, 1, 0));
  CHECK_EQ(ch3.kind, ChoiceKind::Positioned);

  // A non-preamble completion does not consume preamble budget.
  pol.on_completed(0, s2.by_class[1][0]);
  CHECK_EQ(pol.preamble_remaining(0), 0);

  // Reset wipes the arming decision.
  pol.reset(0);
  CHECK_EQ(pol.preamble_remaining(0), -1);
  auto s3 = make_snap(c, {7, 5});  // below the arm level now
  auto ch4 = pol.choose(s3, 0);
  CHECK_EQ(ch4.task, class_id(s3, 1, 0));  // straight to the large class
  CHECK_EQ(pol.preamble_remaining(0), -1);
}

TEST_CASE("preamble policy class preference when unarmed") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});

  {
    RhoMPreamblePolicy pol(c);
    auto s = make_snap(c, {5, 2});  // small 5 < 8: unarmed; large 2 < 4; small >= 4
    auto ch = pol.choose(s, 1);
    CHECK_EQ(ch.task, class_id(s, 0, 2));
    CHECK_EQ(ch.kind, ChoiceKind::Positioned);
  }
  {
    RhoMPreamblePolicy pol(c);
    auto s = make_snap(c, {0, 3});  // only larges, below m^2: modular
    auto ch0 = pol.choose(s, 0);
    CHECK_EQ(ch0.task, class_id(s, 1, 0));
    CHECK_EQ(ch0.kind, ChoiceKind::Modular);
    RhoMPreamblePolicy pol2(c);
    auto ch1 = pol2.choose(s, 1);
    CHECK_EQ(ch1.task, class_id(s, 1, 2));  // (1*2) % 3 = 2
  }
  CHECK_THROWS_AS(RhoMPreamblePolicy(cfg(2, 1.0, {1.0, 2.0, 4.0})), ConfigError);
}

TEST_CASE("k-amortized assembles groups through a frame stack") {
  const auto c = cfg(1, 1.0, {1.0, 2.0});
  KAmortizedPolicy pol(c);

  auto s = make_snap(c, {6, 0});
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.kind, ChoiceKind::GroupScheduled);
  CHECK_EQ(ch.level, 0);
  CHECK_EQ(ch.task, class_id(s, 0, 0));
  REQUIRE_EQ(pol.stack_of(0).size(), 1);
  CHECK_EQ(pol.stack_of(0)[0].first, 1);
  CHECK_EQ(pol.stack_of(0)[0].second, doctest::Approx(0.0));

  pol.on_completed(0, s.by_class[0][0]);
  CHECK_EQ(pol.stack_of(0)[0].second, doctest::Approx(1.0));

  auto s2 = make_snap(c, {5, 0});
  auto ch2 = pol.choose(s2, 0);
  CHECK_EQ(ch2.level, 0);
  pol.on_completed(0, s2.by_class[0][0]);
  CHECK(pol.stack_of(0).empty());  // 1+1 filled the size-2 frame

  // With only 4 smalls the adequacy test fails: floor(4/3) = 1 < 2.
  auto s3 = make_snap(c, {4, 0});
  auto ch3 = pol.choose(s3, 0);
  CHECK_EQ(ch3.kind, ChoiceKind::Modular);
  CHECK_EQ(ch3.task, class_id(s3, 0, 0));
  CHECK_EQ(pol.grouped_choices(), 2);
  CHECK_EQ(pol.fallback_choices(), 1);
  // A fallback completion leaves no frame residue.
  pol.on_completed(0, s3.by_class[0][0]);
  CHECK(pol.stack_of(0).empty());
}

TEST_CASE("k-amortized three-level descent") {
  const auto c = cfg(1, 1.0, {1.0, 2.0, 4.0});
  KAmortizedPolicy pol(c);

  auto s = make_snap(c, {6, 3, 0});
  // adequate = 4*0 + floor(6/3) + 2*floor(3/3) = 4 >= l_top.
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.level, 0);
  REQUIRE_EQ(pol.stack_of(0).size(), 2);
  CHECK_EQ(pol.stack_of(0)[0].first, 2);
  CHECK_EQ(pol.stack_of(0)[1].first, 1);
  pol.on_completed(0, s.by_class[0][0]);

  auto s2 = make_snap(c, {5, 3, 0});
  auto ch2 = pol.choose(s2, 0);
  CHECK_EQ(ch2.level, 0);
  pol.on_completed(0, s2.by_class[0][0]);
  // The filled level-1 frame bubbles 2.0 into the level-2 frame.
  REQUIRE_EQ(pol.stack_of(0).size(), 1);
  CHECK_EQ(pol.stack_of(0)[0].first, 2);
  CHECK_EQ(pol.stack_of(0)[0].second, doctest::Approx(2.0));

  // Small queue thinned: the next descent can no longer group below level 1
  // and executes a level-1 task directly.
  auto s3 = make_snap(c, {4, 3, 0});
  auto ch3 = pol.choose(s3, 0);
  CHECK_EQ(ch3.level, 1);
  CHECK_EQ(ch3.task, class_id(s3, 1, 0));
  pol.on_completed(0, s3.by_class[1][0]);
  CHECK(pol.stack_of(0).empty());  // 2+2 filled the level-2 frame
}

TEST_CASE("k-amortized queue-threshold monitor fires on a drained class") {
  const auto c = cfg(1, 1.0, {1.0, 2.0});
  KAmortizedPolicy pol(c);
  auto s = make_snap(c, {6, 1});
  pol.choose(s, 0);  // stack committed to grouping at class 0
  // The class-0 queue collapses before the group is done.
  auto drained = make_snap(c, {0, 1});
  CHECK_THROWS_AS(pol.choose(drained, 0), PolicyViolation);
}

TEST_CASE("k-amortized reset drops a half-built group") {
  const auto c = cfg(1, 1.0, {1.0, 2.0});
  KAmortizedPolicy pol(c);
  auto s = make_snap(c, {6, 0});
  pol.choose(s, 0);
  pol.on_completed(0, s.by_class[0][0]);
  CHECK_FALSE(pol.stack_of(0).empty());
  pol.reset(0);
  CHECK(pol.stack_of(0).empty());
  CHECK_THROWS_AS(KAmortizedPolicy(cfg(1, 1.0, {1.0, 1.5})), ConfigError);
}

TEST_CASE("mk-amortized runs stages against the lowest candidate class") {
  const auto c = cfg(1, 1.0, {1.0, 1.5});
  MkAmortizedPolicy pol(c, 4, false);  // bar = 4*2*1.5 = 12

  auto s = make_snap(c, {20, 0});
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.kind, ChoiceKind::GroupScheduled);
  CHECK_EQ(ch.level, 0);
  REQUIRE_FALSE(pol.log_of(0).empty());
  CHECK_EQ(pol.log_of(0)[0], std::pair<char, int>('i', 0));
  pol.on_completed(0, s.by_class[0][0]);
  CHECK_EQ(pol.log_of(0)[1], std::pair<char, int>('c', 0));

  // Each completion closes one outer call (1 > 1.5 - 1), so a stage lasts
  // c*k = 8 grouped executions before candidates rebuild.
  for (int i = 0; i < 10; ++i) {
    auto si = make_snap(c, {19 - i, 0});
    auto chi = pol.choose(si, 0);
    CHECK_EQ(chi.level, 0);
    pol.on_completed(0, si.by_class[0][0]);
  }
  CHECK_EQ(pol.grouped_choices(), 11);
  CHECK_EQ(pol.fallback_choices(), 0);
  // Every grouped completion stayed at the logged appropriate size.
  int cur = -1;
  for (const auto& [tag, v] : pol.log_of(0)) {
    if (tag == 'i') cur = v;
    else CHECK_EQ(v, cur);
  }
}

TEST_CASE("mk-amortized falls back when no class clears the bar") {
  const auto c = cfg(1, 1.0, {1.0, 1.5});
  MkAmortizedPolicy pol(c, 4, false);  // bar 12
  auto s = make_snap(c, {5, 2});       // committable 5 and 3: both short
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.kind, ChoiceKind::Modular);
  CHECK_EQ(pol.fallback_choices(), 1);
  pol.on_completed(0, s.by_class[0][0]);
  CHECK(pol.log_of(0).empty());  // fallback work is not grouped work

  // Supply arrives: the next decision re-checks and starts a stage.
  auto s2 = make_snap(c, {20, 2});
  auto ch2 = pol.choose(s2, 0);
  CHECK_EQ(ch2.kind, ChoiceKind::GroupScheduled);
}

TEST_CASE("mk-amortized appropriate size drops when a lower class fills up") {
  const auto c = cfg(1, 1.0, {1.0, 2.0});
  MkAmortizedPolicy pol(c, 1, false);  // bar = 1*2*2 = 4

  auto s = make_snap(c, {1, 4});  // class 1 committable 8 >= 4; class 0 short
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.level, 1);  // frameless leaf at the top class
  CHECK_EQ(ch.task, class_id(s, 1, 0));
  pol.on_completed(0, s.by_class[1][0]);

  // The small class fills before the next decision: i* drops to 0.
  auto s2 = make_snap(c, {6, 3});
  auto ch2 = pol.choose(s2, 0);
  CHECK_EQ(ch2.level, 0);
  const auto& log = pol.log_of(0);
  REQUIRE_GE(log.size(), 3);
  CHECK_EQ(log[0], std::pair<char, int>('i', 1));
  CHECK_EQ(log[1], std::pair<char, int>('c', 1));
  CHECK_EQ(log[2], std::pair<char, int>('i', 0));
}

TEST_CASE("mk-amortized queue-threshold monitor fires on a drained class") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});
  MkAmortizedPolicy pol(c, 1, false);  // bar 4, m^2 = 4
  auto s = make_snap(c, {16, 4});
  auto ch = pol.choose(s, 0);
  CHECK_EQ(ch.level, 0);
  pol.on_completed(0, s.by_class[0][0]);
  auto drained = make_snap(c, {2, 4});  // class 0 below m^2 mid-stage
  CHECK_THROWS_AS(pol.choose(drained, 0), PolicyViolation);
}

TEST_CASE("mk-amortized adaptive doubling raises the candidate bar") {
  const auto c = cfg(1, 1.0, {1.0, 2.0});
  MkAmortizedPolicy adaptive(c, 1, true);
  MkAmortizedPolicy fixed(c, 1, false);

  // Three non-grouped completions of load 2 push load_since_double past
  // c^2*k*lmax = 4 and double c: the candidate bar becomes 8.
  Task big{100, 0.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    adaptive.on_completed(0, big);
    fixed.on_completed(0, big);
  }
  auto s = make_snap(c, {0, 3});  // committable 6: clears bar 4, not bar 8
  CHECK_EQ(fixed.choose(s, 0).kind, ChoiceKind::GroupScheduled);
  CHECK_EQ(adaptive.choose(s, 0).kind, ChoiceKind::Modular);

  // Reset restores the configured c.
  adaptive.reset(0);
  CHECK_EQ(adaptive.choose(s, 0).kind, ChoiceKind::GroupScheduled);

  CHECK_THROWS_AS(MkAmortizedPolicy(c, 0, false), ConfigError);
  CHECK_THROWS_AS(MkAmortizedPolicy(cfg(1, 1.0, {1.0}), 1, false), ConfigError);
}

TEST_CASE("m-lis follows the position rule over the unified queue") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});
  MLisPolicy pol(c);

  QueueSnapshot s;
  s.by_class.resize(2);
  s.by_class[0] = {Task{0, 0.0, 1.0}, Task{3, 3.0, 1.0}};
  s.by_class[1] = {Task{1, 1.0, 2.0}, Task{2, 2.0, 2.0}};
  // unified by arrival: 0, 1, 2, 3 — four tasks reach the m^2 threshold.
  auto ch0 = pol.choose(s, 0);
  CHECK_EQ(ch0.task, 0);
  CHECK_EQ(ch0.kind, ChoiceKind::Positioned);
  auto ch1 = pol.choose(s, 1);
  CHECK_EQ(ch1.task, 2);

  s.by_class[0].pop_back();  // three tasks: below the threshold, wrap
  auto ch2 = pol.choose(s, 1);
  CHECK_EQ(ch2.task, 2);  // (1*2) % 3
  CHECK_EQ(ch2.kind, ChoiceKind::Modular);
}

TEST_CASE("generic heuristics pick their heads; grouplis positions within the class") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});
  QueueSnapshot s;
  s.by_class.resize(2);
  s.by_class[0] = {Task{4, 2.0, 1.0}, Task{5, 3.0, 1.0}, Task{6, 4.0, 1.0},
                   Task{7, 5.0, 1.0}};
  s.by_class[1] = {Task{0, 0.0, 2.0}, Task{1, 1.0, 2.0}};

  GenericPolicy fifo(c, GenericKind::Fifo, false);
  CHECK_EQ(fifo.choose(s, 1).task, 0);  // oldest overall, machine-independent
  GenericPolicy ss(c, GenericKind::ShortestSize, false);
  CHECK_EQ(ss.choose(s, 1).task, 4);
  GenericPolicy ls(c, GenericKind::LargestSize, false);
  CHECK_EQ(ls.choose(s, 1).task, 0);

  // grouplis: the head names the class, the position rule picks within it.
  GenericPolicy ssg(c, GenericKind::ShortestSize, true);
  auto ch = ssg.choose(s, 1);
  CHECK_EQ(ch.task, 6);  // class 0 has 4 >= m^2 tasks: position 1*2
  CHECK_EQ(ch.kind, ChoiceKind::Positioned);
  GenericPolicy lsg(c, GenericKind::LargestSize, true);
  auto ch2 = lsg.choose(s, 1);
  CHECK_EQ(ch2.task, 0);  // class 1 has 2 < m^2: (1*2) % 2 = 0
  CHECK_EQ(ch2.kind, ChoiceKind::Modular);

  CHECK_EQ(fifo.name(), "fifo");
  CHECK_EQ(ss.name(), "ss");
  CHECK_EQ(ls.name(), "ls");
  CHECK_EQ(ssg.name(), "ss+grouplis");
}

TEST_CASE("policy factory") {
  const auto c = cfg(2, 1.0, {1.0, 2.0});
  CHECK_EQ(make_policy("rho-m-preamble", c)->name(), "rho-m-preamble");
  CHECK_EQ(make_policy("k-amortized", c)->name(), "k-amortized");
  CHECK_EQ(make_policy("mk-amortized", c)->name(), "mk-amortized");
  CHECK_EQ(make_policy("m-lis", c)->name(), "m-lis");
  CHECK_EQ(make_policy("fifo", c)->name(), "fifo");
  PolicyOptions opt;
  opt.grouplis = true;
  CHECK_EQ(make_policy("ls", c, opt)->name(), "ls+grouplis");
  CHECK_THROWS_AS(make_policy("nope", c), ConfigError);
}

}  // TEST_SUITE
