#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "faultline/core.hpp"

namespace faultline {

// How a policy arrived at its choice. Positioned means index p*m into a
// queue at or above the m^2 threshold, Modular the wrapped index below it,
// GroupScheduled a grouped choice at a specific size class.
enum class ChoiceKind { Positioned, Modular, GroupScheduled };

struct TaskChoice {
  TaskId task = -1;
  ChoiceKind kind = ChoiceKind::Positioned;
  int level = -1;  // size class for GroupScheduled choices
};

// Online scheduling policy. One instance drives all m machines; all
// per-machine memory must live behind the machine index and be wiped by
// reset(p), which the engine calls at t=0 and at every restart of p.
// choose() is only invoked with a nonempty snapshot (work conservation) and
// must return a pending task. on_completed(p, task) follows every full
// execution by p, whether the inform was Accepted or AlreadyDone.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void reset(int machine) = 0;
  virtual TaskChoice choose(const QueueSnapshot& snap, int machine) = 0;
  virtual void on_completed(int machine, const Task& task) { (void)machine; (void)task; }
};

enum class TraceEventKind {
  Inject,
  CycleStart,
  Complete,
  RedundantComplete,
  Interrupt,
  Crash,
  Restart
};

const char* trace_event_name(TraceEventKind k);

struct TraceEvent {
  double t = 0.0;
  TraceEventKind kind = TraceEventKind::Inject;
  int machine = -1;  // -1 for injections
  TaskId task = -1;
  double size = 0.0;
  double completed_load = 0.0;   // running distinct completed load after the event
  std::vector<int> queue_sizes;  // per-class pending counts after the event
};

struct ExecutionTrace {
  SystemConfig config;
  double horizon = 0.0;
  std::vector<TraceEvent> events;
  std::vector<Task> injected;  // in id order

  std::size_t distinct_completions = 0;
  double completed = 0.0;
  std::size_t duplicate_informs = 0;
  double wasted_load = 0.0;
};

// Per-machine half-open alive intervals [restart, crash) implied by the
// pattern, walking each machine's own events in pattern order. A final
// interval without a crash is open-ended (end = +infinity). Alternation
// violations are appended to *violations (or thrown as PatternError when
// violations is null).
std::vector<std::vector<std::pair<double, double>>> alive_intervals(
    const AdversarialPattern& pattern, std::vector<std::string>* violations = nullptr);

// Admissibility check: crash/restart alternation per machine and at least
// one alive machine at every instant. Returns human-readable violations;
// empty means the pattern is admissible.
std::vector<std::string> validate(const AdversarialPattern& pattern);

// Deterministic discrete-event simulation of `policy` against `pattern` on
// [0, horizon]. Throws PatternError if the pattern is inadmissible and
// PolicyViolation if the policy returns a non-pending task.
ExecutionTrace run(const SystemConfig& config, const AdversarialPattern& pattern,
                   Policy& policy, double horizon);

}  // namespace faultline
