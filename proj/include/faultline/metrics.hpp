#pragma once

#include <cstddef>
#include <vector>

#include "faultline/engine.hpp"
#include "faultline/oracle.hpp"

namespace faultline {

// Size-class filter for load queries: all sizes, exactly l, strictly below l,
// or at least l (all comparisons within kTimeTol).
struct SizeFilter {
  enum Kind { All, Eq, Lt, Ge };
  Kind kind = All;
  double l = 0.0;

  bool pass(double size) const;
  static SizeFilter all() { return {}; }
  static SizeFilter eq(double l) { return SizeFilter{Eq, l}; }
  static SizeFilter lt(double l) { return SizeFilter{Lt, l}; }
  static SizeFilter ge(double l) { return SizeFilter{Ge, l}; }
};

// Distinct completed load of the execution up to and including instant t.
double completed_load(const ExecutionTrace& trace, double t, const SizeFilter& f = {});
// Injected-but-not-completed load at instant t.
double pending_load(const ExecutionTrace& trace, double t, const SizeFilter& f = {});

// Completion trajectory of an execution trace (distinct completions only).
LoadTrajectory completion_trajectory(const ExecutionTrace& trace);

struct RatioSample {
  double t = 0.0;
  double c_alg = 0.0;
  double c_base = 0.0;
  double ratio = 0.0;  // NaN while c_base == 0
};

struct RatioSeries {
  std::vector<RatioSample> samples;  // one after every completion of either execution
  double burn_in = 0.0;
  double alpha = 1.0;
  double final_ratio = 0.0;       // NaN if the baseline never completes anything
  double min_suffix_ratio = 0.0;  // over samples at t >= burn_in with c_base > 0; NaN if none
  double slack_estimate = 0.0;    // min over that suffix of c_alg - alpha * c_base
};

// Ratio-over-time of an online execution against a baseline trajectory,
// sampled after every completion instant of either execution and at the
// horizon.
RatioSeries competitive_ratio(const ExecutionTrace& alg, const LoadTrajectory& base,
                              double horizon, double burn_in = 0.0, double alpha = 1.0);

struct RedundancyReport {
  std::size_t duplicates = 0;     // AlreadyDone informs
  double wasted_load = 0.0;       // sizes of the cycles that produced them
  std::size_t lemma_violations = 0;
};

// Redundancy audit of one trace. A duplicate pair counts as a non-redundancy
// violation only if the pair's size class held at least m^2 pending tasks at
// every point of the span from the earliest involved cycle start to the
// latest inform — duplicates born of thin queues are expected.
RedundancyReport redundancy_report(const ExecutionTrace& trace);

}  // namespace faultline
