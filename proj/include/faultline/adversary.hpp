#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "faultline/core.hpp"
#include "faultline/oracle.hpp"

namespace faultline {

// Deterministic random helpers over std::mt19937_64. The standard engine is
// portable; the standard *distributions* are not, so every draw is built
// directly from raw engine output.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next_u64() { return eng_(); }
  // Uniform in [0, 1) with 53 random bits.
  double next_double01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return eng_() % n; }
  double next_exp(double rate);
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double01(); }

 private:
  std::mt19937_64 eng_;
};

// --- Eight-phase periodic construction ------------------------------------
//
// Two machines, six-size ladder lmin * {1, d, d^2, d^3, d^4, d^5} with
// d = rho^(1/5). Every epoch injects eight tasks up front and runs eight
// single-alive-machine phases whose boundaries force the longest-in-system
// policy into the one unfavourable completion order, while a scripted
// baseline fills every phase exactly.
struct MlisEpochSpec {
  double delta = 0.0;
  double lmin = 0.0;
  std::array<double, 8> task_sizes{};      // injection order, per epoch
  std::array<double, 8> phase_durations{};
  std::array<int, 8> alive_machine{};
  double epoch_length = 0.0;
  static MlisEpochSpec make(double rho, double lmin);
};

struct MlisInstance {
  MlisEpochSpec spec;
  SystemConfig config;  // m = 2, s = 2, the six-size ladder
  AdversarialPattern pattern;
  std::vector<ScriptEntry> x_script;
  int epochs = 0;
  double horizon = 0.0;
  double x_epoch_load = 0.0;     // closed form: (2d^4 + 2d^3 + 3d^2 + d) * lmin
  double mlis_epoch_load = 0.0;  // closed form: (1 + d + 2d^2 + 2d^3 + d^4 + d^5) * lmin
};

MlisInstance make_mlis_instance(double rho, double lmin, int epochs);
AdversarialPattern build_mlis_pattern(double rho, double lmin, int epochs);

// --- Single-alive-machine phase suite --------------------------------------
//
// Phases tile [0, horizon]; exactly one machine is alive in each. Types:
//   1: phase starts with the small queue topped up to rho_bar*m^2 and is too
//      short for the full small-task preamble;
//   2: same start, long enough for the preamble and then large tasks;
//   3: no top-up, shorter than one large task;
//   4: no top-up, fits at least one large task.
struct PhaseSpec {
  struct Phase {
    int type = 1;
    int machine = 0;
    double start = 0.0;
    double duration = 0.0;
  };
  std::vector<Phase> phases;
};

struct PhaseInstance {
  PhaseSpec spec;
  SystemConfig config;  // two sizes {lmin, lmax}, s = 1
  AdversarialPattern pattern;
  std::vector<ScriptEntry> x_script;
  double horizon = 0.0;
};

// Builds the pattern for a given phase script: per-phase small-queue top-ups
// sized against a co-simulation of the preamble policy, a front-loaded large
// supply, and boundary crash/restart events. The instance variant also
// returns the scripted baseline that packs every phase.
AdversarialPattern build_phase_pattern(const PhaseSpec& spec, const SystemConfig& config);
PhaseInstance build_phase_instance(std::uint64_t seed, int m, double rho, double horizon);

// --- Random patterns --------------------------------------------------------

struct RandomPatternParams {
  std::uint64_t seed = 0;
  int m = 1;
  std::vector<double> sizes;
  double horizon = 1.0;
  double crash_rate = 0.0;      // per-machine crash/restart alternation rate
  double injection_rate = 0.0;  // Poisson arrivals, uniform ladder sizes
  // Optional per-class bulk injected at t = 0 (defaults to none).
  std::vector<int> class_floor;
};

// Poisson task stream plus per-machine exponential crash/restart alternation,
// post-processed so no crash ever silences the last alive machine: such a
// crash is deferred to the next restart instant (same-instant handoff or
// bounce) or dropped together with its paired restart. The result always
// passes validate().
AdversarialPattern build_random_pattern(const RandomPatternParams& params);
AdversarialPattern build_random_pattern(std::uint64_t seed, int m,
                                        const std::vector<double>& sizes, double horizon,
                                        double crash_rate, double injection_rate);

}  // namespace faultline
