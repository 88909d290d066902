#pragma once

#include <cstdint>
#include <vector>

#include "faultline/core.hpp"

namespace faultline {

// One baseline cycle: machine starts a task of the given size at `start`.
struct ScriptEntry {
  int machine = 0;
  double start = 0.0;
  double size = 0.0;
};

// Cumulative completed load as a right-continuous step function, with one
// point per completion instant (same-instant completions merged).
struct LoadTrajectory {
  struct Point {
    double t = 0.0;
    double load = 0.0;  // cumulative load after this instant
  };
  std::vector<Point> points;

  double value_at(double t) const;
  double final_value() const { return points.empty() ? 0.0 : points.back().load; }

  static LoadTrajectory from_completions(std::vector<std::pair<double, double>> completions);
};

// Exhaustive-search budget for the optimal baseline. Instances beyond it are
// refused with BudgetError rather than silently truncated.
struct OracleLimits {
  int max_tasks = 10;
  int max_machines = 2;
  int max_error_events = 8;
};

struct OfflineSchedule {
  struct Cycle {
    int machine = 0;
    double start = 0.0;
    double size = 0.0;
    TaskId task = -1;
  };
  std::vector<Cycle> cycles;  // chronological
  double completed_load = 0.0;
  std::uint64_t explored_nodes = 0;

  LoadTrajectory trajectory(double horizon) const;
};

// Maximum completed load any offline baseline (speedup 1) can reach on the
// pattern by the horizon: branch-and-bound over the decision instants
// {injection, restart, own completion}, never starting a task its machine's
// current alive interval cannot finish.
OfflineSchedule optimal_offline(const AdversarialPattern& pattern, int m, double horizon,
                                const OracleLimits& limits = {});

// Test-mode refinement: the same search with an epsilon-grid of extra
// decision instants, for validating that the restricted instants lose nothing.
OfflineSchedule optimal_offline_grid(const AdversarialPattern& pattern, int m, double horizon,
                                     double eps, const OracleLimits& limits = {});

// Deterministic replay of an explicit baseline script against the pattern's
// alive intervals. Rejects (PatternError) entries starting on a crashed
// machine or overlapping the machine's previous entry; an entry whose
// machine crashes before the task finishes contributes nothing. Repository
// availability is not modelled here — callers constructing adversarial
// baselines keep their scripts supply-feasible.
LoadTrajectory scripted_x(const std::vector<ScriptEntry>& script,
                          const AdversarialPattern& pattern, double horizon);

}  // namespace faultline
