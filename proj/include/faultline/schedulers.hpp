#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "faultline/engine.hpp"

namespace faultline {

// Adequacy measure over a snapshot: the load the grouping scheme can commit
// to without starving, counting only full groups:
//   l_top * floor(|L_top| / m^2)  +  sum_{i < top} l_i * floor(|L_i| / (m^2 + m*r_{i+1}))
// where r_{i+1} = sizes[i+1] / sizes[i].
double adequate_load_sum(const QueueSnapshot& snap, const SystemConfig& config);

// Two-size-class policy: after each restart a machine first works off up to
// floor(rho) small tasks when the small queue is long enough (>= rho_bar*m^2
// at its first decision), then prefers the large class, always through the
// m^2-threshold position rule.
class RhoMPreamblePolicy : public Policy {
 public:
  explicit RhoMPreamblePolicy(const SystemConfig& config);
  std::string name() const override { return "rho-m-preamble"; }
  void reset(int machine) override;
  TaskChoice choose(const QueueSnapshot& snap, int machine) override;
  void on_completed(int machine, const Task& task) override;

  // Introspection for tests: remaining preamble budget, or -1 if unarmed.
  int preamble_remaining(int machine) const;

 private:
  struct State {
    bool armed_known = false;
    bool preamble = false;
    int done = 0;
    bool last_was_preamble = false;
  };
  const SystemConfig* cfg_;
  std::vector<State> st_;
};

// Pairwise-divisible ladder policy: recursive grouping of small tasks into
// one conceptual task of the top size, reified as an explicit stack of
// (level, accumulated) frames per machine. Runtime monitors enforce the two
// grouping invariants (queue >= m^2 at every grouped choice; bounded pending
// load below the active level) and throw PolicyViolation when broken.
class KAmortizedPolicy : public Policy {
 public:
  explicit KAmortizedPolicy(const SystemConfig& config);
  std::string name() const override { return "k-amortized"; }
  void reset(int machine) override;
  TaskChoice choose(const QueueSnapshot& snap, int machine) override;
  void on_completed(int machine, const Task& task) override;

  std::uint64_t grouped_choices() const { return grouped_choices_; }
  std::uint64_t fallback_choices() const { return fallback_choices_; }
  const std::vector<std::pair<int, double>>& stack_of(int machine) const;

 private:
  struct Frame {
    int level = 0;     // size class this frame is assembling
    double acc = 0.0;  // load accumulated toward sizes[level]
  };
  struct State {
    std::vector<Frame> stack;
    bool leaf_pending = false;
    int leaf_level = -1;
    std::vector<std::pair<int, double>> stack_view;  // introspection copy
  };

  bool group_condition(const QueueSnapshot& snap, int level) const;
  TaskChoice descend(const QueueSnapshot& snap, int machine, int from_level);

  const SystemConfig* cfg_;
  std::vector<State> st_;
  std::uint64_t grouped_choices_ = 0;
  std::uint64_t fallback_choices_ = 0;
};

// Many-size-class policy: stages of c*k outer grouping calls against a
// candidate set of classes whose pending load clears c*k*l_top; groups fill
// with the smallest candidate class, re-extending candidates after every
// completion. The candidate index only decreases within a stage.
class MkAmortizedPolicy : public Policy {
 public:
  MkAmortizedPolicy(const SystemConfig& config, int c, bool adaptive_c);
  std::string name() const override { return "mk-amortized"; }
  void reset(int machine) override;
  TaskChoice choose(const QueueSnapshot& snap, int machine) override;
  void on_completed(int machine, const Task& task) override;

  std::uint64_t grouped_choices() const { return grouped_choices_; }
  std::uint64_t fallback_choices() const { return fallback_choices_; }
  // Per-machine event log for the uniform-size property: ('i', new i*) when
  // the appropriate size changes, ('c', class) on each grouped completion.
  const std::vector<std::pair<char, int>>& log_of(int machine) const;

 private:
  struct Frame {
    int level = 0;
    double acc = 0.0;
  };
  struct State {
    std::vector<Frame> stack;
    std::vector<bool> in_c;  // candidate classes
    int istar = -1;
    int stage_calls_left = 0;
    bool leaf_pending = false;
    int leaf_class = -1;
    double pending_add = 0.0;  // completed size awaiting candidate re-extension
    int c_cur = 0;
    double load_since_double = 0.0;
    std::vector<std::pair<char, int>> log;
  };

  void extend_candidates(State& s, const QueueSnapshot& snap, bool fresh) const;
  void settle_completion(State& s, const QueueSnapshot& snap);

  const SystemConfig* cfg_;
  int c0_;
  bool adaptive_;
  std::vector<State> st_;
  std::uint64_t grouped_choices_ = 0;
  std::uint64_t fallback_choices_ = 0;
};

// Longest-in-system with the m^2-threshold position rule over the unified
// pending queue ordered by (arrival, id).
class MLisPolicy : public Policy {
 public:
  explicit MLisPolicy(const SystemConfig& config);
  std::string name() const override { return "m-lis"; }
  void reset(int) override {}
  TaskChoice choose(const QueueSnapshot& snap, int machine) override;

 private:
  const SystemConfig* cfg_;
};

enum class GenericKind { Fifo, ShortestSize, LargestSize };

// Classic single-machine heuristics lifted to m machines. With grouplis
// enabled the head's size class is chosen by the position rule instead of
// always taking the head itself.
class GenericPolicy : public Policy {
 public:
  GenericPolicy(const SystemConfig& config, GenericKind kind, bool grouplis);
  std::string name() const override;
  void reset(int) override {}
  TaskChoice choose(const QueueSnapshot& snap, int machine) override;

 private:
  const SystemConfig* cfg_;
  GenericKind kind_;
  bool grouplis_;
};

struct PolicyOptions {
  bool grouplis = false;
  int c = 4;
  bool adaptive_c = false;
};

// Factory over the CLI policy ids: rho-m-preamble, k-amortized, mk-amortized,
// m-lis, fifo, ss, ls. Throws ConfigError for unknown ids or a config the
// policy cannot run on.
std::unique_ptr<Policy> make_policy(const std::string& id, const SystemConfig& config,
                                    const PolicyOptions& options = {});

}  // namespace faultline
