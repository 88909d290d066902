#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace faultline {

// Global time/size equality tolerance. Constructions in the verification
// harness use irrational boundaries (delta = rho^(1/5)), so instants are
// doubles and two values within this tolerance denote the same instant.
inline constexpr double kTimeTol = 1e-9;

inline bool same_instant(double a, double b) { return std::fabs(a - b) <= kTimeTol; }

struct FaultlineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid SystemConfig or policy/config mismatch.
struct ConfigError : FaultlineError {
  using FaultlineError::FaultlineError;
};

// Malformed or inadmissible adversarial pattern (file or constructed).
struct PatternError : FaultlineError {
  using FaultlineError::FaultlineError;
};

// A scheduling policy broke one of its own runtime invariants
// (non-pending choice, queue-threshold monitor, pending-load monitor).
struct PolicyViolation : FaultlineError {
  using FaultlineError::FaultlineError;
};

// Oracle instance outside the exhaustive-search budget.
struct BudgetError : FaultlineError {
  using FaultlineError::FaultlineError;
};

using TaskId = std::int64_t;

// A unit of work: injection sequence number, arrival instant, size
// (units of baseline processing time).
struct Task {
  TaskId id = -1;
  double arrival = 0.0;
  double size = 0.0;
};

// Machine count, speedup and the ascending ladder of admissible task sizes.
// Size classes are indexed 0..k-1 throughout (class 0 = l_min, class k-1 = l_max).
struct SystemConfig {
  int m = 1;
  double s = 1.0;
  std::vector<double> sizes;

  int k() const { return static_cast<int>(sizes.size()); }
  double lmin() const { return sizes.front(); }
  double lmax() const { return sizes.back(); }
  double rho() const { return lmax() / lmin(); }
  // floor(rho), tolerant of float noise just below an integer.
  int rho_bar() const { return static_cast<int>(std::floor(rho() + kTimeTol)); }
  // sizes[i] / sizes[j] for class indices i >= j.
  double ratio(int i, int j) const { return sizes[i] / sizes[j]; }
  // rho_i in step form: sizes[i] / sizes[i-1], for i in [1, k-1].
  double step_ratio(int i) const { return sizes[i] / sizes[i - 1]; }
  bool pairwise_divisible() const;
  // Class index whose ladder size matches `size` within tolerance, or -1.
  int size_class(double size) const;
  // Throws ConfigError unless m >= 1, s >= 1 and sizes are positive ascending.
  void validate() const;
};

enum class PatternEventKind { Inject, Crash, Restart };

struct PatternEvent {
  PatternEventKind kind = PatternEventKind::Inject;
  double t = 0.0;
  double size = 0.0;  // Inject only
  int machine = -1;   // Crash / Restart only
};

// A fixed adversarial script: task injections plus machine crash/restart
// events, with the aliveness of each machine at t = 0. Events are kept in
// nondecreasing time order; order within an instant is stable and, for one
// machine's own crash/restart events, must follow its alternation.
struct AdversarialPattern {
  int machines = 1;
  std::vector<bool> start_alive;  // empty means "all alive"
  std::vector<PatternEvent> events;

  bool machine_starts_alive(int p) const {
    return start_alive.empty() ? true : start_alive.at(static_cast<std::size_t>(p));
  }
  double last_event_time() const {
    return events.empty() ? 0.0 : events.back().t;
  }
  void sort_stable();
  std::size_t count_injections() const;
  std::size_t count_error_events() const;
};

struct InformResult {
  enum Outcome { Accepted, AlreadyDone };
  Outcome outcome = Accepted;
};

// Point-in-time copy of the pending queues, one per size class, each
// ascending by (arrival, id).
struct QueueSnapshot {
  std::vector<std::vector<Task>> by_class;

  bool empty() const;
  std::size_t total() const;
  // All pending tasks by (arrival, id): the longest-in-system order.
  std::vector<Task> unified_by_arrival() const;
  // All pending tasks by (size asc, arrival, id): the fallback queue order.
  std::vector<Task> unified_by_size_then_arrival() const;
};

// The shared task store. Injection appends to the per-size queue, get takes
// a snapshot, inform removes the task on first completion and reports
// AlreadyDone on any later one (tasks are idempotent).
class Repository {
 public:
  explicit Repository(const SystemConfig& config);

  // Appends to L_{task.size} keeping (arrival, id) order. Throws
  // PatternError on duplicate/non-monotonic ids or a size not on the ladder.
  void inject(const Task& task);
  QueueSnapshot get() const;
  // Accepted removes the task immediately; AlreadyDone leaves state
  // unchanged. Unknown ids are a simulation bug.
  InformResult inform(TaskId id);

  const std::vector<std::vector<Task>>& queues() const { return queues_; }
  std::vector<int> queue_sizes() const;
  std::size_t pending_count() const { return pending_; }
  bool is_pending(TaskId id) const;
  bool is_completed(TaskId id) const;
  const Task& task_meta(TaskId id) const;

 private:
  struct Entry {
    Task task;
    int cls = -1;
    bool completed = false;
  };
  const SystemConfig* config_;
  std::vector<std::vector<Task>> queues_;
  std::unordered_map<TaskId, Entry> known_;
  TaskId last_id_ = -1;
  std::size_t pending_ = 0;
};

// Canonical same-instant event ordering. Classes run informs, restarts,
// crashes, injections, gets; within a class ascending machine id, then
// sequence number. One exception keeps crash/restart alternation sound: a
// machine that is alive and holds both a crash and a restart at the instant
// processes them as an adjacent crash-then-restart pair in the crash slot
// (the "bounce" used by same-machine phase boundaries).
enum class SimEventClass { Inform = 0, Restart = 1, Crash = 2, Inject = 3, Get = 4 };

struct SimEvent {
  SimEventClass cls = SimEventClass::Inform;
  int machine = -1;  // -1 for injections
  long seq = 0;
};

std::vector<SimEvent> order_simultaneous(std::vector<SimEvent> events,
                                         const std::vector<bool>& alive_before);

}  // namespace faultline
