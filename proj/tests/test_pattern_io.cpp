#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "faultline/adversary.hpp"
#include "faultline/pattern_io.hpp"

using namespace faultline;

TEST_SUITE("pattern_io") {

TEST_CASE("parse basics, comments, machine inference") {
  const std::string text =
      "# demo pattern\n"
      "inject 0 1.5\n"
      "inject 0.25 2 # trailing comment\n"
      "crash 1 1\n"
      "restart 2 1\n"
      "\n";
  const auto pat = parse_pattern_file(text);
  CHECK_EQ(pat.machines, 2);
  CHECK(pat.start_alive.empty());  // no start-alive line: everyone alive
  CHECK(pat.machine_starts_alive(0));
  REQUIRE_EQ(pat.events.size(), 4);
  CHECK_EQ(pat.events[0].kind, PatternEventKind::Inject);
  CHECK_EQ(pat.events[0].size, doctest::Approx(1.5));
  CHECK_EQ(pat.events[2].kind, PatternEventKind::Crash);
  CHECK_EQ(pat.events[3].kind, PatternEventKind::Restart);
}

TEST_CASE("start-alive line controls initial aliveness") {
  const auto pat = parse_pattern_file("start-alive 1\ninject 0 1\nrestart 2 0\n");
  CHECK_EQ(pat.machines, 2);
  REQUIRE_EQ(pat.start_alive.size(), 2);
  CHECK_FALSE(pat.start_alive[0]);
  CHECK(pat.start_alive[1]);

  // A bare start-alive means every machine starts crashed — admissible only
  // if someone restarts immediately; here nobody references a machine, so the
  // single implied machine starts dead and the pattern is inadmissible.
  CHECK_THROWS_AS(parse_pattern_file("start-alive\ninject 0 1\n"), PatternError);
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_line = [](const std::string& text, const std::string& frag) {
    try {
      parse_pattern_file(text);
      FAIL("expected PatternError");
    } catch (const PatternError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(frag) != std::string::npos);
    }
  };
  expect_line("inject 0 1\ninject nope 2\n", "line 2");
  expect_line("inject 0\n", "line 1: expected: inject <t> <size>");
  expect_line("inject 0 -1\n", "size must be positive");
  expect_line("inject -0.5 1\n", "time must be nonnegative");
  expect_line("crash 1\n", "expected: crash <t> <machine>");
  expect_line("crash 1 -2\n", "machine index must be nonnegative");
  expect_line("warp 1 2\n", "unknown directive 'warp'");
  expect_line("inject 0 1 junk\n", "trailing token 'junk'");
}

TEST_CASE("inadmissible patterns are rejected with the reason") {
  try {
    parse_pattern_file("inject 0 1\ncrash 1 0\n");  // one machine, never restarts
    FAIL("expected PatternError");
  } catch (const PatternError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("inadmissible pattern:", 0) == 0);
  }
  // Same-machine bounce at one instant parses fine in alternation order.
  const auto pat = parse_pattern_file("inject 0 1\ncrash 1 0\nrestart 1 0\n");
  CHECK_EQ(pat.machines, 1);
  CHECK_EQ(pat.events.size(), 3);
  // The reverse order breaks alternation for an initially-alive machine.
  CHECK_THROWS_AS(parse_pattern_file("inject 0 1\nrestart 1 0\ncrash 1 0\n"),
                  PatternError);
}

TEST_CASE("write/parse round trip is a fixed point") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    RandomPatternParams p;
    p.seed = seed;
    p.m = 3;
    p.sizes = {1.0, 2.5};
    p.horizon = 12.0;
    p.crash_rate = 1.5;
    p.injection_rate = 2.0;
    p.class_floor = {4, 2};
    const auto pat = build_random_pattern(p);
    const std::string once = write_pattern_file(pat);
    const auto reparsed = parse_pattern_file(once);
    CHECK_EQ(reparsed.machines, pat.machines);
    CHECK_EQ(reparsed.events.size(), pat.events.size());
    CHECK_EQ(write_pattern_file(reparsed), once);
  }
}

TEST_CASE("file wrappers") {
  const auto pat = parse_pattern_file("start-alive 0\ninject 0 1\ninject 2 1\n");
  const std::string path = "pattern_io_test_tmp.pattern";
  save_pattern(pat, path);
  const auto loaded = load_pattern(path);
  CHECK_EQ(write_pattern_file(loaded), write_pattern_file(pat));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_pattern("no/such/dir/file.pattern"), PatternError);
}

TEST_CASE("float formatting round-trips at 12 significant digits") {
  CHECK_EQ(format_double(1.0), "1");
  CHECK_EQ(format_double(0.25), "0.25");
  CHECK_EQ(format_double(1e-9), "1e-09");
  const double d3 = std::pow(2.0, 0.6);
  const double r = round_12sig(d3);
  CHECK_EQ(round_12sig(r), r);  // idempotent
  CHECK_EQ(r, doctest::Approx(d3).epsilon(1e-11));
  CHECK_EQ(format_double(round_12sig(d3)), format_double(d3));
}

}  // TEST_SUITE
