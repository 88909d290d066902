#include "faultline/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faultline/engine.hpp"

namespace faultline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Instance {
  std::vector<Task> tasks;
  int m = 0;
  double horizon = 0.0;
  // Per machine: alive intervals clipped to [0, horizon].
  std::vector<std::vector<std::pair<double, double>>> alive;
  std::vector<double> decision_times;  // sorted, deduplicated
};

struct MachineState {
  bool busy = false;
  double finish = 0.0;
  double size = 0.0;
  TaskId task = -1;
  int cycle_index = -1;  // position in the schedule-so-far stack
};

struct Search {
  const Instance* inst = nullptr;
  double best = -1.0;
  std::vector<OfflineSchedule::Cycle> best_cycles;
  std::vector<OfflineSchedule::Cycle> cur_cycles;
  std::uint64_t explored = 0;

  // The alive interval of machine q containing t, or nullptr.
  const std::pair<double, double>* interval_at(int q, double t) const {
    for (const auto& iv : inst->alive[static_cast<std::size_t>(q)]) {
      if (t >= iv.first - kTimeTol && t < iv.second - kTimeTol) return &iv;
    }
    return nullptr;
  }

  double remaining_capacity(int q, double from) const {
    double cap = 0.0;
    for (const auto& iv : inst->alive[static_cast<std::size_t>(q)]) {
      const double b = std::max(iv.first, from);
      if (iv.second > b) cap += iv.second - b;
    }
    return cap;
  }

  double upper_bound(double t, const std::vector<MachineState>& ms, unsigned pending_mask,
                     double load) const {
    double bound = load;
    double cap = 0.0;
    for (int q = 0; q < inst->m; ++q) {
      const auto& s = ms[static_cast<std::size_t>(q)];
      if (s.busy) bound += s.size;  // started cycles always fit their interval
      cap += remaining_capacity(q, s.busy ? s.finish : t);
    }
    double pend = 0.0;
    for (std::size_t i = 0; i < inst->tasks.size(); ++i) {
      if (pending_mask & (1u << i)) pend += inst->tasks[i].size;
    }
    return bound + std::min(cap, pend);
  }

  void record(double load) {
    if (load > best + 1e-12) {
      best = load;
      best_cycles = cur_cycles;
    }
  }

  // Advance to the next instant: earliest busy finish or decision time > t.
  void advance(double t, std::vector<MachineState> ms, unsigned pending_mask, double load) {
    double tn = kInf;
    for (const auto& s : ms) {
      if (s.busy) tn = std::min(tn, s.finish);
    }
    auto it = std::upper_bound(inst->decision_times.begin(), inst->decision_times.end(),
                               t + kTimeTol);
    if (it != inst->decision_times.end()) tn = std::min(tn, *it);
    if (tn == kInf || tn > inst->horizon + kTimeTol) {
      // No further instant inside the horizon. Cycles still in flight were
      // checked to fit their interval and the horizon when started, so they
      // complete; credit them and record.
      for (auto& s : ms) {
        if (s.busy) load += s.size;
      }
      record(load);
      return;
    }
    for (auto& s : ms) {
      if (s.busy && s.finish <= tn + kTimeTol) {
        load += s.size;
        s.busy = false;
      }
    }
    step(tn, std::move(ms), pending_mask, load, 0u);
  }

  // One decision layer at instant t: the lowest idle alive machine not yet
  // waived either starts a startable pending task or waives until the next
  // instant; then the next such machine decides, and so on.
  void step(double t, std::vector<MachineState> ms, unsigned pending_mask, double load,
            unsigned waived) {
    ++explored;
    if (upper_bound(t, ms, pending_mask, load) <= best + 1e-12) return;

    int q = -1;
    const std::pair<double, double>* iv = nullptr;
    for (int c = 0; c < inst->m; ++c) {
      if (ms[static_cast<std::size_t>(c)].busy) continue;
      if (waived & (1u << c)) continue;
      iv = interval_at(c, t);
      if (iv) {
        q = c;
        break;
      }
    }
    if (q < 0) {
      advance(t, std::move(ms), pending_mask, load);
      return;
    }

    record(load);  // the do-nothing-from-here completion of current credit is
                   // handled on advance; recording here is harmless and keeps
                   // best monotone on early exits.

    const double end = std::min(iv->second, inst->horizon);
    for (std::size_t i = 0; i < inst->tasks.size(); ++i) {
      if (!(pending_mask & (1u << i))) continue;
      const Task& tk = inst->tasks[i];
      if (tk.arrival > t + kTimeTol) continue;
      // Equivalent-task pruning: among pending tasks with identical arrival
      // and size, only the lowest id branches.
      bool shadowed = false;
      for (std::size_t j = 0; j < i; ++j) {
        if ((pending_mask & (1u << j)) &&
            std::fabs(inst->tasks[j].arrival - tk.arrival) <= kTimeTol &&
            std::fabs(inst->tasks[j].size - tk.size) <= kTimeTol) {
          shadowed = true;
          break;
        }
      }
      if (shadowed) continue;
      // Never start a cycle the interval (or horizon) cannot finish: it would
      // only block the machine, so it is dominated by waiving.
      if (t + tk.size > end + kTimeTol) continue;

      auto ms2 = ms;
      auto& s = ms2[static_cast<std::size_t>(q)];
      s.busy = true;
      s.finish = t + tk.size;
      s.size = tk.size;
      s.task = tk.id;
      cur_cycles.push_back(OfflineSchedule::Cycle{q, t, tk.size, tk.id});
      step(t, std::move(ms2), pending_mask & ~(1u << i), load, waived);
      cur_cycles.pop_back();
    }
    step(t, std::move(ms), pending_mask, load, waived | (1u << q));
  }
};

OfflineSchedule solve(const AdversarialPattern& pattern, int m, double horizon,
                      const OracleLimits& limits, double grid_eps) {
  if (m < 1) throw ConfigError("oracle needs m >= 1");
  if (m > limits.max_machines) {
    throw BudgetError("oracle budget: " + std::to_string(m) + " machines exceeds limit " +
                      std::to_string(limits.max_machines));
  }
  const std::size_t n_err = pattern.count_error_events();
  if (n_err > static_cast<std::size_t>(limits.max_error_events)) {
    throw BudgetError("oracle budget: " + std::to_string(n_err) +
                      " crash/restart events exceed limit " +
                      std::to_string(limits.max_error_events));
  }

  Instance inst;
  inst.m = m;
  inst.horizon = horizon;
  TaskId next_id = 0;
  for (const auto& e : pattern.events) {
    if (e.kind != PatternEventKind::Inject) continue;
    if (e.t > horizon + kTimeTol) continue;
    inst.tasks.push_back(Task{next_id++, e.t, e.size});
  }
  if (inst.tasks.size() > static_cast<std::size_t>(limits.max_tasks)) {
    throw BudgetError("oracle budget: " + std::to_string(inst.tasks.size()) +
                      " tasks exceed limit " + std::to_string(limits.max_tasks));
  }

  auto raw = alive_intervals(pattern);
  inst.alive.resize(static_cast<std::size_t>(m));
  for (int q = 0; q < m && static_cast<std::size_t>(q) < raw.size(); ++q) {
    for (auto iv : raw[static_cast<std::size_t>(q)]) {
      iv.second = std::min(iv.second, horizon);
      if (iv.second > iv.first + kTimeTol) {
        inst.alive[static_cast<std::size_t>(q)].push_back(iv);
      }
    }
  }

  std::vector<double> times;
  for (const auto& tk : inst.tasks) times.push_back(tk.arrival);
  for (const auto& per : inst.alive) {
    for (const auto& iv : per) times.push_back(iv.first);
  }
  if (grid_eps > 0.0) {
    for (double t = 0.0; t <= horizon + kTimeTol; t += grid_eps) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  for (double t : times) {
    if (inst.decision_times.empty() || t > inst.decision_times.back() + kTimeTol) {
      inst.decision_times.push_back(t);
    }
  }

  Search search;
  search.inst = &inst;
  search.best = -1.0;

  std::vector<MachineState> ms(static_cast<std::size_t>(m));
  const double t0 = inst.decision_times.empty() ? 0.0 : inst.decision_times.front();
  search.step(t0, std::move(ms), inst.tasks.empty() ? 0u : (1u << inst.tasks.size()) - 1u,
              0.0, 0u);

  OfflineSchedule out;
  out.completed_load = std::max(0.0, search.best);
  out.cycles = search.best_cycles;
  std::sort(out.cycles.begin(), out.cycles.end(),
            [](const OfflineSchedule::Cycle& a, const OfflineSchedule::Cycle& b) {
              if (a.start != b.start) return a.start < b.start;
              return a.machine < b.machine;
            });
  out.explored_nodes = search.explored;
  return out;
}

}  // namespace

double LoadTrajectory::value_at(double t) const {
  double v = 0.0;
  for (const auto& p : points) {
    if (p.t <= t + kTimeTol) v = p.load;
    else break;
  }
  return v;
}

LoadTrajectory LoadTrajectory::from_completions(
    std::vector<std::pair<double, double>> completions) {
  std::sort(completions.begin(), completions.end());
  LoadTrajectory traj;
  double cum = 0.0;
  for (const auto& [t, sz] : completions) {
    cum += sz;
    if (!traj.points.empty() && same_instant(traj.points.back().t, t)) {
      traj.points.back().load = cum;
    } else {
      traj.points.push_back(Point{t, cum});
    }
  }
  return traj;
}

LoadTrajectory OfflineSchedule::trajectory(double horizon) const {
  std::vector<std::pair<double, double>> completions;
  for (const auto& c : cycles) {
    const double t = c.start + c.size;
    if (t <= horizon + kTimeTol) completions.emplace_back(t, c.size);
  }
  return LoadTrajectory::from_completions(std::move(completions));
}

OfflineSchedule optimal_offline(const AdversarialPattern& pattern, int m, double horizon,
                                const OracleLimits& limits) {
  return solve(pattern, m, horizon, limits, 0.0);
}

OfflineSchedule optimal_offline_grid(const AdversarialPattern& pattern, int m, double horizon,
                                     double eps, const OracleLimits& limits) {
  if (!(eps > 0.0)) throw ConfigError("grid step must be positive");
  return solve(pattern, m, horizon, limits, eps);
}

LoadTrajectory scripted_x(const std::vector<ScriptEntry>& script,
                          const AdversarialPattern& pattern, double horizon) {
  const auto alive = alive_intervals(pattern);
  std::vector<std::vector<ScriptEntry>> per(static_cast<std::size_t>(pattern.machines));
  for (const auto& e : script) {
    if (e.machine < 0 || e.machine >= pattern.machines) {
      throw PatternError("script entry for machine " + std::to_string(e.machine) +
                         " outside the pattern's machines");
    }
    per[static_cast<std::size_t>(e.machine)].push_back(e);
  }
  std::vector<std::pair<double, double>> completions;
  for (int q = 0; q < pattern.machines; ++q) {
    auto& entries = per[static_cast<std::size_t>(q)];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ScriptEntry& a, const ScriptEntry& b) { return a.start < b.start; });
    double busy_until = -kInf;
    for (const auto& e : entries) {
      const std::pair<double, double>* iv = nullptr;
      for (const auto& cand : alive[static_cast<std::size_t>(q)]) {
        if (e.start >= cand.first - kTimeTol && e.start < cand.second - kTimeTol) {
          iv = &cand;
          break;
        }
      }
      if (!iv) {
        throw PatternError("script schedules machine " + std::to_string(q) +
                           " at t=" + std::to_string(e.start) + " while it is crashed");
      }
      if (e.start < busy_until - kTimeTol) {
        throw PatternError("script overlaps cycles on machine " + std::to_string(q));
      }
      const double finish = e.start + e.size;
      if (finish <= iv->second + kTimeTol) {
        busy_until = finish;
        if (finish <= horizon + kTimeTol) completions.emplace_back(finish, e.size);
      } else {
        busy_until = iv->second;  // interrupted at the crash; contributes nothing
      }
    }
  }
  return LoadTrajectory::from_completions(std::move(completions));
}

}  // namespace faultline
