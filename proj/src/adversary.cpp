#include "faultline/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "faultline/engine.hpp"

namespace faultline {

double DetRng::next_exp(double rate) {
  // Inverse CDF on a [0,1) draw; 1-u keeps the argument strictly positive.
  return -std::log(1.0 - next_double01()) / rate;
}

// ---------------------------------------------------------------------------
// Eight-phase periodic construction

MlisEpochSpec MlisEpochSpec::make(double rho, double lmin) {
  if (!(rho > 1.0) || !(lmin > 0.0)) {
    throw ConfigError("mlis construction needs rho > 1 and lmin > 0");
  }
  MlisEpochSpec s;
  s.delta = std::pow(rho, 0.2);
  s.lmin = lmin;
  const double d = s.delta;
  const double d2 = d * d, d3 = d2 * d, d4 = d3 * d, d5 = d4 * d;
  s.task_sizes = {1.0, d2, d2, d4, d, d3, d3, d5};
  for (auto& v : s.task_sizes) v *= lmin;
  s.phase_durations = {d3, d, d3, d2, d4, d2, d4, d2};
  for (auto& v : s.phase_durations) v *= lmin;
  s.alive_machine = {1, 0, 0, 0, 1, 0, 0, 0};
  s.epoch_length = 0.0;
  for (double v : s.phase_durations) s.epoch_length += v;
  return s;
}

MlisInstance make_mlis_instance(double rho, double lmin, int epochs) {
  if (epochs < 1) throw ConfigError("mlis construction needs at least one epoch");
  MlisInstance inst;
  inst.spec = MlisEpochSpec::make(rho, lmin);
  const double d = inst.spec.delta;
  const double d2 = d * d, d3 = d2 * d, d4 = d3 * d, d5 = d4 * d;

  inst.config.m = 2;
  inst.config.s = 2.0;
  inst.config.sizes = {lmin, lmin * d, lmin * d2, lmin * d3, lmin * d4, lmin * d5};
  inst.epochs = epochs;
  inst.horizon = epochs * inst.spec.epoch_length;
  inst.x_epoch_load = lmin * (2 * d4 + 2 * d3 + 3 * d2 + d);
  inst.mlis_epoch_load = lmin * (1 + d + 2 * d2 + 2 * d3 + d4 + d5);

  AdversarialPattern& pat = inst.pattern;
  pat.machines = 2;
  pat.start_alive = {false, true};  // phase 1 belongs to machine 1

  // All tasks are available up front.
  for (int e = 0; e < epochs; ++e) {
    for (double sz : inst.spec.task_sizes) {
      pat.events.push_back(PatternEvent{PatternEventKind::Inject, 0.0, sz, -1});
    }
  }

  double t = 0.0;
  for (int e = 0; e < epochs; ++e) {
    for (int ph = 0; ph < 8; ++ph) {
      const int cur = inst.spec.alive_machine[static_cast<std::size_t>(ph)];
      inst.x_script.push_back(
          ScriptEntry{cur, t, inst.spec.phase_durations[static_cast<std::size_t>(ph)]});
      t += inst.spec.phase_durations[static_cast<std::size_t>(ph)];
      // Boundary into the next phase (the final boundary hands off to the
      // machine of a hypothetical next epoch, keeping the pattern admissible).
      const int nxt = inst.spec.alive_machine[static_cast<std::size_t>((ph + 1) % 8)];
      if (nxt != cur) {
        pat.events.push_back(PatternEvent{PatternEventKind::Restart, t, 0.0, nxt});
        pat.events.push_back(PatternEvent{PatternEventKind::Crash, t, 0.0, cur});
      } else {
        pat.events.push_back(PatternEvent{PatternEventKind::Crash, t, 0.0, cur});
        pat.events.push_back(PatternEvent{PatternEventKind::Restart, t, 0.0, cur});
      }
    }
  }
  return inst;
}

AdversarialPattern build_mlis_pattern(double rho, double lmin, int epochs) {
  return make_mlis_instance(rho, lmin, epochs).pattern;
}

// ---------------------------------------------------------------------------
// Phase suite

namespace {

// Shared assembly: sizes the top-ups and the scripted baseline against an
// analytic co-simulation of the preamble policy at speedup 1.
PhaseInstance assemble_phase_instance(const PhaseSpec& intent, const SystemConfig& config) {
  PhaseInstance inst;
  inst.config = config;
  inst.config.s = 1.0;
  inst.config.validate();
  if (inst.config.k() != 2) throw ConfigError("phase suite uses exactly two size classes");

  const double lmin = inst.config.lmin();
  const double lmax = inst.config.lmax();
  const int m = inst.config.m;
  const int rb = inst.config.rho_bar();
  const long mm = static_cast<long>(m) * m;
  const long arm_level = static_cast<long>(rb) * mm;

  double total = 0.0;
  for (const auto& ph : intent.phases) total += ph.duration;

  // Large-task supply: enough for every phase of either execution plus the
  // m^2 cushion that keeps the large queue positioned at all times.
  const long fl =
      mm + static_cast<long>(std::ceil(total / lmax)) + static_cast<long>(intent.phases.size()) + 8;

  AdversarialPattern& pat = inst.pattern;
  pat.machines = m;
  pat.start_alive.assign(static_cast<std::size_t>(m), false);
  if (intent.phases.empty()) throw ConfigError("phase suite needs at least one phase");
  pat.start_alive[static_cast<std::size_t>(intent.phases.front().machine)] = true;

  for (long i = 0; i < fl; ++i) {
    pat.events.push_back(PatternEvent{PatternEventKind::Inject, 0.0, lmax, -1});
  }

  long cur_min = 0;      // co-simulated small queue of the online execution
  long x_min_avail = 0;  // small supply still unused by the baseline
  long x_max_avail = fl;

  double t0 = 0.0;
  for (std::size_t pi = 0; pi < intent.phases.size(); ++pi) {
    const auto& in = intent.phases[pi];
    const double lam = in.duration;
    const int p = in.machine;

    PhaseSpec::Phase realized;
    realized.machine = p;
    realized.start = t0;
    realized.duration = lam;

    const bool intend_topup = (in.type == 1 || in.type == 2);
    if (intend_topup && cur_min < arm_level) {
      const long topup = arm_level - cur_min;
      for (long i = 0; i < topup; ++i) {
        pat.events.push_back(PatternEvent{PatternEventKind::Inject, t0, lmin, -1});
      }
      cur_min = arm_level;
      x_min_avail += topup;
    }

    if (cur_min >= arm_level) {
      // The phase's restart arms the preamble whatever the intent was.
      realized.type = (lam < rb * lmin - kTimeTol) ? 1 : 2;
      const long n1 =
          std::min<long>(rb, static_cast<long>(std::floor((lam + kTimeTol) / lmin)));
      cur_min -= n1;
    } else {
      realized.type = (lam < lmax - kTimeTol) ? 3 : 4;
    }
    inst.spec.phases.push_back(realized);

    // Baseline best response within the phase, limited by its running small
    // supply; small tasks are scripted first.
    long best_a = 0, best_b = 0;
    double best_load = -1.0;
    const long bmax = std::min<long>(x_max_avail,
                                     static_cast<long>(std::floor((lam + kTimeTol) / lmax)));
    for (long b = bmax; b >= 0; --b) {
      const long a = std::min<long>(
          x_min_avail, static_cast<long>(std::floor((lam - b * lmax + kTimeTol) / lmin)));
      const double load = a * lmin + b * lmax;
      if (load > best_load + kTimeTol) {
        best_load = load;
        best_a = a;
        best_b = b;
      }
    }
    double xs = t0;
    for (long i = 0; i < best_a; ++i) {
      inst.x_script.push_back(ScriptEntry{p, xs, lmin});
      xs += lmin;
    }
    for (long i = 0; i < best_b; ++i) {
      inst.x_script.push_back(ScriptEntry{p, xs, lmax});
      xs += lmax;
    }
    x_min_avail -= best_a;
    x_max_avail -= best_b;

    // Boundary into the next phase; the final boundary hands off (or
    // bounces) so some machine stays alive past the horizon.
    t0 += lam;
    const int nxt = (pi + 1 < intent.phases.size())
                        ? intent.phases[pi + 1].machine
                        : (m > 1 ? (p + 1) % m : p);
    if (nxt != p) {
      pat.events.push_back(PatternEvent{PatternEventKind::Restart, t0, 0.0, nxt});
      pat.events.push_back(PatternEvent{PatternEventKind::Crash, t0, 0.0, p});
    } else {
      pat.events.push_back(PatternEvent{PatternEventKind::Crash, t0, 0.0, p});
      pat.events.push_back(PatternEvent{PatternEventKind::Restart, t0, 0.0, p});
    }
  }
  inst.horizon = t0;
  pat.sort_stable();
  return inst;
}

}  // namespace

AdversarialPattern build_phase_pattern(const PhaseSpec& spec, const SystemConfig& config) {
  return assemble_phase_instance(spec, config).pattern;
}

PhaseInstance build_phase_instance(std::uint64_t seed, int m, double rho, double horizon) {
  if (m < 1) throw ConfigError("phase suite needs m >= 1");
  if (!(rho >= 2.0)) throw ConfigError("phase suite needs rho >= 2");
  SystemConfig config;
  config.m = m;
  config.s = 1.0;
  config.sizes = {1.0, rho};
  const int rb = config.rho_bar();
  const double lmax = rho;

  DetRng rng(seed);
  PhaseSpec intent;
  double cum = 0.0;
  while (cum < horizon) {
    PhaseSpec::Phase ph;
    const std::uint64_t w = rng.next_below(10);
    ph.type = (w < 3) ? 1 : (w < 6) ? 2 : (w < 8) ? 3 : 4;
    ph.machine = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(m)));
    switch (ph.type) {
      case 1: ph.duration = rng.next_uniform(0.35, rb - 0.35); break;
      case 2: ph.duration = rb + rng.next_uniform(0.1, 3.0) * lmax; break;
      case 3: ph.duration = rng.next_uniform(0.25, 0.9) * lmax; break;
      default: ph.duration = rng.next_uniform(1.1, 3.5) * lmax; break;
    }
    ph.start = cum;
    cum += ph.duration;
    intent.phases.push_back(ph);
  }
  return assemble_phase_instance(intent, config);
}

// ---------------------------------------------------------------------------
// Random patterns

AdversarialPattern build_random_pattern(const RandomPatternParams& params) {
  SystemConfig probe;
  probe.m = params.m;
  probe.s = 1.0;
  probe.sizes = params.sizes;
  probe.validate();
  if (!params.class_floor.empty() &&
      params.class_floor.size() != params.sizes.size()) {
    throw ConfigError("class_floor must match the size ladder");
  }

  DetRng rng(params.seed);
  AdversarialPattern pat;
  pat.machines = params.m;
  pat.start_alive.assign(static_cast<std::size_t>(params.m), true);

  for (std::size_t c = 0; c < params.class_floor.size(); ++c) {
    for (int i = 0; i < params.class_floor[c]; ++i) {
      pat.events.push_back(PatternEvent{PatternEventKind::Inject, 0.0, params.sizes[c], -1});
    }
  }
  if (params.injection_rate > 0.0) {
    double t = rng.next_exp(params.injection_rate);
    while (t <= params.horizon) {
      const double sz = params.sizes[rng.next_below(params.sizes.size())];
      pat.events.push_back(PatternEvent{PatternEventKind::Inject, t, sz, -1});
      t += rng.next_exp(params.injection_rate);
    }
  }
  if (params.crash_rate > 0.0) {
    for (int p = 0; p < params.m; ++p) {
      double t = rng.next_exp(params.crash_rate);
      while (t <= params.horizon) {
        pat.events.push_back(PatternEvent{PatternEventKind::Crash, t, 0.0, p});
        t += rng.next_exp(params.crash_rate);
        if (t > params.horizon) break;
        pat.events.push_back(PatternEvent{PatternEventKind::Restart, t, 0.0, p});
        t += rng.next_exp(params.crash_rate);
      }
    }
  }
  pat.sort_stable();

  // Admissibility pass: a crash that would silence the last alive machine is
  // deferred to the next restart instant (handoff or bounce) or dropped if no
  // restart ever comes.
  std::vector<PatternEvent> out;
  out.reserve(pat.events.size());
  std::vector<bool> alive(static_cast<std::size_t>(params.m), true);
  int count = params.m;
  std::deque<int> deferred;
  auto is_deferred = [&](int p) {
    return std::find(deferred.begin(), deferred.end(), p) != deferred.end();
  };
  for (const auto& e : pat.events) {
    switch (e.kind) {
      case PatternEventKind::Inject:
        out.push_back(e);
        break;
      case PatternEventKind::Crash: {
        if (count >= 2) {
          out.push_back(e);
          alive[static_cast<std::size_t>(e.machine)] = false;
          --count;
        } else {
          deferred.push_back(e.machine);
        }
        break;
      }
      case PatternEventKind::Restart: {
        if (is_deferred(e.machine)) {
          // The machine's own restart arrived first: bounce here.
          deferred.erase(std::find(deferred.begin(), deferred.end(), e.machine));
          out.push_back(PatternEvent{PatternEventKind::Crash, e.t, 0.0, e.machine});
          out.push_back(e);
        } else {
          out.push_back(e);
          alive[static_cast<std::size_t>(e.machine)] = true;
          ++count;
          while (!deferred.empty() && count >= 2) {
            const int q = deferred.front();
            deferred.pop_front();
            out.push_back(PatternEvent{PatternEventKind::Crash, e.t, 0.0, q});
            alive[static_cast<std::size_t>(q)] = false;
            --count;
          }
        }
        break;
      }
    }
  }
  pat.events = std::move(out);

  const auto violations = validate(pat);
  if (!violations.empty()) {
    throw FaultlineError("internal: generated pattern inadmissible: " + violations.front());
  }
  return pat;
}

AdversarialPattern build_random_pattern(std::uint64_t seed, int m,
                                        const std::vector<double>& sizes, double horizon,
                                        double crash_rate, double injection_rate) {
  RandomPatternParams p;
  p.seed = seed;
  p.m = m;
  p.sizes = sizes;
  p.horizon = horizon;
  p.crash_rate = crash_rate;
  p.injection_rate = injection_rate;
  return build_random_pattern(p);
}

}  // namespace faultline
