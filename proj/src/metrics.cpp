#include "faultline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace faultline {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}

bool SizeFilter::pass(double size) const {
  switch (kind) {
    case All: return true;
    case Eq: return std::fabs(size - l) <= kTimeTol;
    case Lt: return size < l - kTimeTol;
    case Ge: return size >= l - kTimeTol;
  }
  return false;
}

double completed_load(const ExecutionTrace& trace, double t, const SizeFilter& f) {
  double sum = 0.0;
  for (const auto& e : trace.events) {
    if (e.t > t + kTimeTol) break;
    if (e.kind == TraceEventKind::Complete && f.pass(e.size)) sum += e.size;
  }
  return sum;
}

double pending_load(const ExecutionTrace& trace, double t, const SizeFilter& f) {
  double injected = 0.0;
  for (const auto& e : trace.events) {
    if (e.t > t + kTimeTol) break;
    if (e.kind == TraceEventKind::Inject && f.pass(e.size)) injected += e.size;
  }
  return injected - completed_load(trace, t, f);
}

LoadTrajectory completion_trajectory(const ExecutionTrace& trace) {
  std::vector<std::pair<double, double>> completions;
  for (const auto& e : trace.events) {
    if (e.kind == TraceEventKind::Complete) completions.emplace_back(e.t, e.size);
  }
  return LoadTrajectory::from_completions(std::move(completions));
}

RatioSeries competitive_ratio(const ExecutionTrace& alg, const LoadTrajectory& base,
                              double horizon, double burn_in, double alpha) {
  const LoadTrajectory alg_traj = completion_trajectory(alg);

  std::vector<double> times;
  for (const auto& p : alg_traj.points) times.push_back(p.t);
  for (const auto& p : base.points) times.push_back(p.t);
  times.push_back(horizon);
  std::sort(times.begin(), times.end());

  RatioSeries series;
  series.burn_in = burn_in;
  series.alpha = alpha;
  double min_ratio = kNaN;
  double min_slack = kNaN;
  for (double t : times) {
    if (t > horizon + kTimeTol) break;
    if (!series.samples.empty() && same_instant(series.samples.back().t, t)) continue;
    RatioSample s;
    s.t = t;
    s.c_alg = alg_traj.value_at(t);
    s.c_base = base.value_at(t);
    s.ratio = (s.c_base > kTimeTol) ? s.c_alg / s.c_base : kNaN;
    series.samples.push_back(s);
    if (t >= burn_in - kTimeTol) {
      if (!std::isnan(s.ratio) && (std::isnan(min_ratio) || s.ratio < min_ratio)) {
        min_ratio = s.ratio;
      }
      const double slack = s.c_alg - alpha * s.c_base;
      if (std::isnan(min_slack) || slack < min_slack) min_slack = slack;
    }
  }
  series.final_ratio = series.samples.empty() ? kNaN : series.samples.back().ratio;
  series.min_suffix_ratio = min_ratio;
  series.slack_estimate = min_slack;
  return series;
}

RedundancyReport redundancy_report(const ExecutionTrace& trace) {
  RedundancyReport rep;
  const int m = trace.config.m;
  const int mm = m * m;

  struct Execution {
    double start = 0.0;
    double end = 0.0;
    int machine = -1;
  };
  std::map<TaskId, std::vector<Execution>> by_task;
  std::map<TaskId, int> task_class;
  std::vector<std::pair<TaskId, double>> open_cycle(
      static_cast<std::size_t>(m), {-1, 0.0});  // per machine: task, start

  for (const auto& e : trace.events) {
    switch (e.kind) {
      case TraceEventKind::CycleStart:
        open_cycle[static_cast<std::size_t>(e.machine)] = {e.task, e.t};
        break;
      case TraceEventKind::Complete:
      case TraceEventKind::RedundantComplete: {
        if (e.kind == TraceEventKind::RedundantComplete) {
          ++rep.duplicates;
          rep.wasted_load += e.size;
        }
        auto& oc = open_cycle[static_cast<std::size_t>(e.machine)];
        by_task[e.task].push_back(Execution{oc.second, e.t, e.machine});
        task_class[e.task] = trace.config.size_class(e.size);
        oc = {-1, 0.0};
        break;
      }
      default: break;
    }
  }

  // A pair of full executions of one task by different machines violates
  // non-redundancy only if its class never dipped below m^2 across the span.
  // The span's first event is the pair's earlier cycle start, whose recorded
  // state is the pending queue its choice saw; events at the closing inform
  // instant are exempt — any dip there is the removal in question.
  for (const auto& [task, execs] : by_task) {
    if (execs.size() < 2) continue;
    const int cls = task_class[task];
    bool violated = false;
    for (std::size_t i = 0; i < execs.size() && !violated; ++i) {
      for (std::size_t j = i + 1; j < execs.size() && !violated; ++j) {
        if (execs[i].machine == execs[j].machine) continue;
        const double w0 = std::min(execs[i].start, execs[j].start);
        const double w1 = std::max(execs[i].end, execs[j].end);
        bool always_thick = true;
        for (const auto& e : trace.events) {
          if (e.t < w0 - kTimeTol) continue;
          if (e.t >= w1 - kTimeTol) break;
          if (e.queue_sizes.at(static_cast<std::size_t>(cls)) < mm) {
            always_thick = false;
            break;
          }
        }
        if (always_thick) violated = true;
      }
    }
    if (violated) ++rep.lemma_violations;
  }
  return rep;
}

}  // namespace faultline
