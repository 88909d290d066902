#include "faultline/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace faultline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_t(double t) {
  std::ostringstream os;
  os.precision(12);
  os << t;
  return os.str();
}

}  // namespace

const char* trace_event_name(TraceEventKind k) {
  switch (k) {
    case TraceEventKind::Inject: return "inject";
    case TraceEventKind::CycleStart: return "cycle-start";
    case TraceEventKind::Complete: return "complete";
    case TraceEventKind::RedundantComplete: return "redundant-complete";
    case TraceEventKind::Interrupt: return "interrupt";
    case TraceEventKind::Crash: return "crash";
    case TraceEventKind::Restart: return "restart";
  }
  return "?";
}

std::vector<std::vector<std::pair<double, double>>> alive_intervals(
    const AdversarialPattern& pattern, std::vector<std::string>* violations) {
  const int m = pattern.machines;
  std::vector<std::vector<std::pair<double, double>>> out(static_cast<std::size_t>(m));
  auto complain = [&](const std::string& msg) {
    if (violations) violations->push_back(msg);
    else throw PatternError(msg);
  };
  for (int p = 0; p < m; ++p) {
    bool alive = pattern.machine_starts_alive(p);
    double open_since = alive ? 0.0 : kInf;
    for (const auto& e : pattern.events) {
      if (e.machine != p) continue;
      if (e.kind == PatternEventKind::Crash) {
        if (!alive) {
          complain("machine " + std::to_string(p) + ": crash at t=" + fmt_t(e.t) +
                   " while already crashed");
          continue;
        }
        out[static_cast<std::size_t>(p)].emplace_back(open_since, e.t);
        alive = false;
      } else if (e.kind == PatternEventKind::Restart) {
        if (alive) {
          complain("machine " + std::to_string(p) + ": restart at t=" + fmt_t(e.t) +
                   " while already alive");
          continue;
        }
        open_since = e.t;
        alive = true;
      }
    }
    if (alive) out[static_cast<std::size_t>(p)].emplace_back(open_since, kInf);
  }
  return out;
}

std::vector<std::string> validate(const AdversarialPattern& pattern) {
  std::vector<std::string> violations;
  if (pattern.machines < 1) {
    violations.push_back("pattern must involve at least one machine");
    return violations;
  }
  for (const auto& e : pattern.events) {
    if (e.t < -kTimeTol) violations.push_back("event before t=0 at t=" + fmt_t(e.t));
    if (e.kind != PatternEventKind::Inject &&
        (e.machine < 0 || e.machine >= pattern.machines)) {
      violations.push_back("machine index " + std::to_string(e.machine) + " out of range");
    }
    if (e.kind == PatternEventKind::Inject && e.size <= kTimeTol) {
      violations.push_back("injection at t=" + fmt_t(e.t) + " with non-positive size");
    }
  }
  double prev = -kInf;
  for (const auto& e : pattern.events) {
    if (e.t < prev - kTimeTol) {
      violations.push_back("events out of time order at t=" + fmt_t(e.t));
      break;
    }
    prev = std::max(prev, e.t);
  }
  if (!violations.empty()) return violations;

  auto intervals = alive_intervals(pattern, &violations);

  // Coverage: the union of all alive intervals must be [0, +inf) with no
  // positive-length gap (instant handoffs and bounces are seamless because
  // intervals are half-open).
  std::vector<std::pair<double, double>> all;
  for (const auto& per : intervals)
    for (const auto& iv : per)
      if (iv.second > iv.first + kTimeTol || iv.second == kInf) all.push_back(iv);
  std::sort(all.begin(), all.end());
  double covered_to = 0.0;
  for (const auto& iv : all) {
    if (iv.first > covered_to + kTimeTol) {
      violations.push_back("no machine alive on [" + fmt_t(covered_to) + ", " +
                           fmt_t(iv.first) + ")");
    }
    covered_to = std::max(covered_to, iv.second);
    if (covered_to == kInf) break;
  }
  if (covered_to != kInf) {
    violations.push_back("no machine alive from t=" + fmt_t(covered_to) + " onward");
  }
  return violations;
}

ExecutionTrace run(const SystemConfig& config, const AdversarialPattern& pattern,
                   Policy& policy, double horizon) {
  config.validate();
  if (!(horizon > 0.0)) throw PatternError("horizon must be positive");
  {
    auto v = validate(pattern);
    if (!v.empty()) throw PatternError("inadmissible pattern: " + v.front());
  }

  struct Cycle {
    TaskId task = -1;
    double size = 0.0;
    double start = 0.0;
    double finish = 0.0;
  };
  struct Mach {
    bool alive = true;
    std::optional<Cycle> cycle;
  };

  Repository repo(config);
  const int m = pattern.machines;
  std::vector<Mach> mach(static_cast<std::size_t>(m));
  for (int p = 0; p < m; ++p) {
    mach[static_cast<std::size_t>(p)].alive = pattern.machine_starts_alive(p);
    policy.reset(p);
  }

  ExecutionTrace trace;
  trace.config = config;
  trace.horizon = horizon;

  TaskId next_id = 0;
  std::size_t ip = 0;
  const auto& E = pattern.events;

  auto push_event = [&](double t, TraceEventKind kind, int p, TaskId task, double size) {
    TraceEvent ev;
    ev.t = t;
    ev.kind = kind;
    ev.machine = p;
    ev.task = task;
    ev.size = size;
    ev.completed_load = trace.completed;
    ev.queue_sizes = repo.queue_sizes();
    trace.events.push_back(std::move(ev));
  };

  while (true) {
    double now = kInf;
    if (ip < E.size()) now = E[ip].t;
    for (const auto& mc : mach) {
      if (mc.alive && mc.cycle) now = std::min(now, mc.cycle->finish);
    }
    if (now == kInf || now > horizon + kTimeTol) break;

    // Class 1: informs from cycles finishing at this instant.
    for (int p = 0; p < m; ++p) {
      auto& mc = mach[static_cast<std::size_t>(p)];
      if (!mc.alive || !mc.cycle || mc.cycle->finish > now + kTimeTol) continue;
      const Cycle cy = *mc.cycle;
      mc.cycle.reset();
      const Task meta = repo.task_meta(cy.task);
      const auto res = repo.inform(cy.task);
      if (res.outcome == InformResult::Accepted) {
        trace.completed += cy.size;
        ++trace.distinct_completions;
        push_event(now, TraceEventKind::Complete, p, cy.task, cy.size);
      } else {
        ++trace.duplicate_informs;
        trace.wasted_load += cy.size;
        push_event(now, TraceEventKind::RedundantComplete, p, cy.task, cy.size);
      }
      policy.on_completed(p, meta);
    }

    // Gather the pattern events of this instant.
    std::vector<PatternEvent> evs;
    while (ip < E.size() && E[ip].t <= now + kTimeTol) evs.push_back(E[ip++]);

    std::vector<int> restarts, crashes;  // machine ids
    std::vector<PatternEvent> injects;
    for (const auto& e : evs) {
      switch (e.kind) {
        case PatternEventKind::Restart: restarts.push_back(e.machine); break;
        case PatternEventKind::Crash: crashes.push_back(e.machine); break;
        case PatternEventKind::Inject: injects.push_back(e); break;
      }
    }
    std::sort(restarts.begin(), restarts.end());
    std::sort(crashes.begin(), crashes.end());

    auto do_restart = [&](int p) {
      auto& mc = mach[static_cast<std::size_t>(p)];
      if (mc.alive) throw PatternError("restart of alive machine " + std::to_string(p));
      mc.alive = true;
      policy.reset(p);
      push_event(now, TraceEventKind::Restart, p, -1, 0.0);
    };
    auto do_crash = [&](int p) {
      auto& mc = mach[static_cast<std::size_t>(p)];
      if (!mc.alive) throw PatternError("crash of crashed machine " + std::to_string(p));
      if (mc.cycle) {
        push_event(now, TraceEventKind::Interrupt, p, mc.cycle->task, mc.cycle->size);
        mc.cycle.reset();
      }
      mc.alive = false;
      push_event(now, TraceEventKind::Crash, p, -1, 0.0);
    };

    // Class 2: restarts — except the restart half of an alive machine's
    // bounce, which runs right after that machine's crash (class 3).
    std::vector<int> bounce;
    for (int p : restarts) {
      const bool has_crash = std::binary_search(crashes.begin(), crashes.end(), p);
      if (has_crash && mach[static_cast<std::size_t>(p)].alive) bounce.push_back(p);
      else do_restart(p);
    }
    // Class 3: crashes, with bounce restarts trailing their own crash.
    for (int p : crashes) {
      do_crash(p);
      if (std::binary_search(bounce.begin(), bounce.end(), p)) do_restart(p);
    }

    // Class 4: injections, in pattern order, stamped with the canonical instant.
    for (const auto& e : injects) {
      Task task{next_id++, now, e.size};
      repo.inject(task);
      trace.injected.push_back(task);
      push_event(now, TraceEventKind::Inject, -1, task.id, task.size);
    }

    // Class 5: gets. Every idle alive machine sees the same snapshot; an
    // empty repository parks them until the next injection instant.
    std::optional<QueueSnapshot> snap;
    for (int p = 0; p < m; ++p) {
      auto& mc = mach[static_cast<std::size_t>(p)];
      if (!mc.alive || mc.cycle) continue;
      if (!snap) snap = repo.get();
      if (snap->empty()) break;
      const TaskChoice ch = policy.choose(*snap, p);
      if (!repo.is_pending(ch.task)) {
        throw PolicyViolation("policy " + policy.name() + " chose non-pending task " +
                              std::to_string(ch.task));
      }
      const Task& meta = repo.task_meta(ch.task);
      Cycle cy;
      cy.task = ch.task;
      cy.size = meta.size;
      cy.start = now;
      cy.finish = now + meta.size / config.s;
      mc.cycle = cy;
      push_event(now, TraceEventKind::CycleStart, p, ch.task, meta.size);
    }
  }

  return trace;
}

}  // namespace faultline
