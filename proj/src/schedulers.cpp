#include "faultline/schedulers.hpp"

#include <algorithm>
#include <cmath>

namespace faultline {

namespace {

// The m^2-threshold position rule inside one queue: spread machines m
// positions apart when the queue is long enough to make that collision-free,
// wrap below the threshold.
TaskChoice positioned(const std::vector<Task>& q, int p, int m) {
  const std::size_t want = static_cast<std::size_t>(p) * static_cast<std::size_t>(m);
  const std::size_t mm = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  if (q.size() >= mm) return TaskChoice{q[want].id, ChoiceKind::Positioned, -1};
  return TaskChoice{q[want % q.size()].id, ChoiceKind::Modular, -1};
}

}  // namespace

double adequate_load_sum(const QueueSnapshot& snap, const SystemConfig& config) {
  const int k = config.k();
  const double mm = static_cast<double>(config.m) * config.m;
  const auto& top = snap.by_class.at(static_cast<std::size_t>(k - 1));
  double sum = config.sizes[static_cast<std::size_t>(k - 1)] *
               std::floor(static_cast<double>(top.size()) / mm);
  for (int i = 0; i + 1 < k; ++i) {
    const double denom = mm + config.m * config.step_ratio(i + 1);
    sum += config.sizes[static_cast<std::size_t>(i)] *
           std::floor(static_cast<double>(snap.by_class[static_cast<std::size_t>(i)].size()) /
                      denom);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// RhoMPreamblePolicy

RhoMPreamblePolicy::RhoMPreamblePolicy(const SystemConfig& config) : cfg_(&config) {
  config.validate();
  if (config.k() != 2) throw ConfigError("rho-m-preamble requires exactly two size classes");
  st_.resize(static_cast<std::size_t>(config.m));
}

void RhoMPreamblePolicy::reset(int machine) {
  st_.at(static_cast<std::size_t>(machine)) = State{};
}

int RhoMPreamblePolicy::preamble_remaining(int machine) const {
  const State& s = st_.at(static_cast<std::size_t>(machine));
  if (!s.armed_known || !s.preamble) return -1;
  return cfg_->rho_bar() - s.done;
}

TaskChoice RhoMPreamblePolicy::choose(const QueueSnapshot& snap, int machine) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  const auto& lo = snap.by_class.front();
  const auto& hi = snap.by_class.back();
  const std::size_t mm =
      static_cast<std::size_t>(cfg_->m) * static_cast<std::size_t>(cfg_->m);
  const int rb = cfg_->rho_bar();

  // The first decision after a restart is the machine's "awakening": the
  // preamble arms there iff the small queue already holds rho_bar * m^2 tasks.
  if (!s.armed_known) {
    s.armed_known = true;
    s.preamble = lo.size() >= static_cast<std::size_t>(rb) * mm;
    s.done = 0;
  }

  if (s.preamble && s.done < rb && !lo.empty()) {
    s.last_was_preamble = true;
    return positioned(lo, machine, cfg_->m);
  }
  s.last_was_preamble = false;
  if (hi.size() >= mm) return positioned(hi, machine, cfg_->m);
  if (lo.size() >= mm) return positioned(lo, machine, cfg_->m);
  if (!hi.empty()) return positioned(hi, machine, cfg_->m);
  return positioned(lo, machine, cfg_->m);
}

void RhoMPreamblePolicy::on_completed(int machine, const Task& task) {
  (void)task;
  State& s = st_.at(static_cast<std::size_t>(machine));
  if (s.last_was_preamble) {
    ++s.done;
    s.last_was_preamble = false;
  }
}

// ---------------------------------------------------------------------------
// KAmortizedPolicy

KAmortizedPolicy::KAmortizedPolicy(const SystemConfig& config) : cfg_(&config) {
  config.validate();
  if (!config.pairwise_divisible()) {
    throw ConfigError("k-amortized requires a pairwise-divisible size ladder");
  }
  st_.resize(static_cast<std::size_t>(config.m));
}

void KAmortizedPolicy::reset(int machine) {
  st_.at(static_cast<std::size_t>(machine)) = State{};
}

const std::vector<std::pair<int, double>>& KAmortizedPolicy::stack_of(int machine) const {
  return st_.at(static_cast<std::size_t>(machine)).stack_view;
}

// Entry condition of level `level`: the classes below it can commit enough
// full groups to cover one task of this level.
bool KAmortizedPolicy::group_condition(const QueueSnapshot& snap, int level) const {
  if (level <= 0) return false;
  const double mm = static_cast<double>(cfg_->m) * cfg_->m;
  double sum = 0.0;
  for (int i = 0; i < level; ++i) {
    const double denom = mm + cfg_->m * cfg_->step_ratio(i + 1);
    sum += cfg_->sizes[static_cast<std::size_t>(i)] *
           std::floor(static_cast<double>(snap.by_class[static_cast<std::size_t>(i)].size()) /
                      denom);
  }
  return sum >= cfg_->sizes[static_cast<std::size_t>(level)] - kTimeTol;
}

TaskChoice KAmortizedPolicy::descend(const QueueSnapshot& snap, int machine, int from_level) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  int j = from_level;
  while (group_condition(snap, j)) {
    s.stack.push_back(Frame{j, 0.0});
    --j;
  }
  // Leaf: a direct execution at level j.
  const auto& q = snap.by_class.at(static_cast<std::size_t>(j));
  const std::size_t mm =
      static_cast<std::size_t>(cfg_->m) * static_cast<std::size_t>(cfg_->m);
  if (q.size() < mm) {
    throw PolicyViolation("k-amortized: grouped choice at class " + std::to_string(j) +
                          " with only " + std::to_string(q.size()) + " pending (< m^2)");
  }
  // Bounded-pending-load monitor below the active level, in snapshot
  // arithmetic: sum_{i<j} l_i |L_i| <= sum_{i<j} (l_j + l_i)(m^2 + m r_{i+1}).
  {
    double lhs = 0.0, rhs = 0.0;
    const double mmf = static_cast<double>(mm);
    for (int i = 0; i < j; ++i) {
      lhs += cfg_->sizes[static_cast<std::size_t>(i)] *
             static_cast<double>(snap.by_class[static_cast<std::size_t>(i)].size());
      rhs += (cfg_->sizes[static_cast<std::size_t>(j)] +
              cfg_->sizes[static_cast<std::size_t>(i)]) *
             (mmf + cfg_->m * cfg_->step_ratio(i + 1));
    }
    if (lhs > rhs + kTimeTol) {
      throw PolicyViolation("k-amortized: pending load below class " + std::to_string(j) +
                            " exceeds its amortization bound");
    }
  }
  ++grouped_choices_;
  s.leaf_pending = true;
  s.leaf_level = j;
  s.stack_view.clear();
  for (const auto& f : s.stack) s.stack_view.emplace_back(f.level, f.acc);
  const std::size_t want = static_cast<std::size_t>(machine) * static_cast<std::size_t>(cfg_->m);
  return TaskChoice{q[want].id, ChoiceKind::GroupScheduled, j};
}

TaskChoice KAmortizedPolicy::choose(const QueueSnapshot& snap, int machine) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  const int top = cfg_->k() - 1;
  if (s.stack.empty()) {
    if (adequate_load_sum(snap, *cfg_) <
        cfg_->sizes[static_cast<std::size_t>(top)] - kTimeTol) {
      ++fallback_choices_;
      const auto q = snap.unified_by_size_then_arrival();
      const std::size_t idx = (static_cast<std::size_t>(machine) *
                               static_cast<std::size_t>(cfg_->m)) %
                              q.size();
      return TaskChoice{q[idx].id, ChoiceKind::Modular, -1};
    }
    return descend(snap, machine, top);
  }
  return descend(snap, machine, s.stack.back().level - 1);
}

void KAmortizedPolicy::on_completed(int machine, const Task& task) {
  (void)task;
  State& s = st_.at(static_cast<std::size_t>(machine));
  if (!s.leaf_pending) return;  // a fallback execution touches no frame
  s.leaf_pending = false;
  double add = cfg_->sizes[static_cast<std::size_t>(s.leaf_level)];
  while (!s.stack.empty()) {
    Frame& f = s.stack.back();
    f.acc += add;
    if (f.acc < cfg_->sizes[static_cast<std::size_t>(f.level)] - kTimeTol) break;
    add = cfg_->sizes[static_cast<std::size_t>(f.level)];
    s.stack.pop_back();
  }
  s.stack_view.clear();
  for (const auto& f : s.stack) s.stack_view.emplace_back(f.level, f.acc);
}

// ---------------------------------------------------------------------------
// MkAmortizedPolicy

MkAmortizedPolicy::MkAmortizedPolicy(const SystemConfig& config, int c, bool adaptive_c)
    : cfg_(&config), c0_(c), adaptive_(adaptive_c) {
  config.validate();
  if (config.k() < 2) throw ConfigError("mk-amortized requires at least two size classes");
  if (c < 1) throw ConfigError("mk-amortized requires c >= 1");
  st_.resize(static_cast<std::size_t>(config.m));
  for (auto& s : st_) s.c_cur = c0_;
}

void MkAmortizedPolicy::reset(int machine) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  s = State{};
  s.c_cur = c0_;
}

const std::vector<std::pair<char, int>>& MkAmortizedPolicy::log_of(int machine) const {
  return st_.at(static_cast<std::size_t>(machine)).log;
}

// Candidate classes: pending load committable in full m^2 groups reaches
// c*k*l_top. fresh=true rebuilds the set at a stage boundary; otherwise the
// set only grows and i* only decreases.
void MkAmortizedPolicy::extend_candidates(State& s, const QueueSnapshot& snap,
                                          bool fresh) const {
  const int k = cfg_->k();
  const double mm = static_cast<double>(cfg_->m) * cfg_->m;
  const double bar = static_cast<double>(s.c_cur) * k * cfg_->lmax();
  if (fresh || s.in_c.empty()) {
    s.in_c.assign(static_cast<std::size_t>(k), false);
    if (fresh) s.istar = -1;
  }
  for (int i = 0; i < k; ++i) {
    const double committable =
        cfg_->sizes[static_cast<std::size_t>(i)] *
        std::floor(static_cast<double>(snap.by_class[static_cast<std::size_t>(i)].size()) / mm);
    if (committable >= bar - kTimeTol) s.in_c[static_cast<std::size_t>(i)] = true;
  }
  int lowest = -1;
  for (int i = 0; i < k; ++i) {
    if (s.in_c[static_cast<std::size_t>(i)]) {
      lowest = i;
      break;
    }
  }
  if (lowest >= 0 && lowest != s.istar) {
    s.istar = lowest;
    s.log.emplace_back('i', lowest);
  }
}

// Apply a deferred completion: re-extend candidates on the current snapshot
// first (the appropriate size may drop), then bubble the completed load up
// the frame stack with frames returning their accumulated value.
void MkAmortizedPolicy::settle_completion(State& s, const QueueSnapshot& snap) {
  extend_candidates(s, snap, /*fresh=*/false);
  double add = s.pending_add;
  s.pending_add = 0.0;
  const double l_istar = cfg_->sizes[static_cast<std::size_t>(s.istar)];
  while (!s.stack.empty()) {
    Frame& f = s.stack.back();
    f.acc += add;
    if (f.acc <= cfg_->sizes[static_cast<std::size_t>(f.level)] - l_istar + kTimeTol) return;
    add = f.acc;
    s.stack.pop_back();
  }
  --s.stage_calls_left;  // an outer top-level grouping call finished
}

TaskChoice MkAmortizedPolicy::choose(const QueueSnapshot& snap, int machine) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  const int k = cfg_->k();
  const int top = k - 1;

  if (s.pending_add > 0.0) settle_completion(s, snap);

  if (s.stack.empty() && s.stage_calls_left <= 0) {
    // Stage boundary: rebuild the candidate set from scratch.
    extend_candidates(s, snap, /*fresh=*/true);
    if (s.istar < 0) {
      ++fallback_choices_;
      const auto q = snap.unified_by_size_then_arrival();
      const std::size_t idx = (static_cast<std::size_t>(machine) *
                               static_cast<std::size_t>(cfg_->m)) %
                              q.size();
      return TaskChoice{q[idx].id, ChoiceKind::Modular, -1};
    }
    s.stage_calls_left = s.c_cur * k;
  }

  int j = s.stack.empty() ? top : s.stack.back().level - 1;
  while (j > s.istar) {
    s.stack.push_back(Frame{j, 0.0});
    --j;
  }
  const auto& q = snap.by_class.at(static_cast<std::size_t>(s.istar));
  const std::size_t mm =
      static_cast<std::size_t>(cfg_->m) * static_cast<std::size_t>(cfg_->m);
  if (q.size() < mm) {
    throw PolicyViolation("mk-amortized: grouped choice at class " + std::to_string(s.istar) +
                          " with only " + std::to_string(q.size()) + " pending (< m^2)");
  }
  ++grouped_choices_;
  s.leaf_pending = true;
  s.leaf_class = s.istar;
  const std::size_t want = static_cast<std::size_t>(machine) * static_cast<std::size_t>(cfg_->m);
  return TaskChoice{q[want].id, ChoiceKind::GroupScheduled, s.istar};
}

void MkAmortizedPolicy::on_completed(int machine, const Task& task) {
  State& s = st_.at(static_cast<std::size_t>(machine));
  if (adaptive_) {
    s.load_since_double += task.size;
    const double bar = static_cast<double>(s.c_cur) * s.c_cur * cfg_->k() * cfg_->lmax();
    if (s.load_since_double > bar) {
      s.c_cur *= 2;
      s.load_since_double = 0.0;
    }
  }
  if (!s.leaf_pending) return;
  s.leaf_pending = false;
  s.log.emplace_back('c', s.leaf_class);
  // Candidate re-extension needs the post-completion queues, so the bubble is
  // deferred to the next decision instant (the same simulation instant).
  s.pending_add = cfg_->sizes[static_cast<std::size_t>(s.leaf_class)];
}

// ---------------------------------------------------------------------------
// MLisPolicy

MLisPolicy::MLisPolicy(const SystemConfig& config) : cfg_(&config) { config.validate(); }

TaskChoice MLisPolicy::choose(const QueueSnapshot& snap, int machine) {
  const auto q = snap.unified_by_arrival();
  return positioned(q, machine, cfg_->m);
}

// ---------------------------------------------------------------------------
// GenericPolicy

GenericPolicy::GenericPolicy(const SystemConfig& config, GenericKind kind, bool grouplis)
    : cfg_(&config), kind_(kind), grouplis_(grouplis) {
  config.validate();
}

std::string GenericPolicy::name() const {
  std::string base;
  switch (kind_) {
    case GenericKind::Fifo: base = "fifo"; break;
    case GenericKind::ShortestSize: base = "ss"; break;
    case GenericKind::LargestSize: base = "ls"; break;
  }
  return grouplis_ ? base + "+grouplis" : base;
}

TaskChoice GenericPolicy::choose(const QueueSnapshot& snap, int machine) {
  // Head by the heuristic's order.
  Task head;
  switch (kind_) {
    case GenericKind::Fifo: {
      head = snap.unified_by_arrival().front();
      break;
    }
    case GenericKind::ShortestSize: {
      for (const auto& q : snap.by_class) {
        if (!q.empty()) {
          head = q.front();
          break;
        }
      }
      break;
    }
    case GenericKind::LargestSize: {
      for (auto it = snap.by_class.rbegin(); it != snap.by_class.rend(); ++it) {
        if (!it->empty()) {
          head = it->front();
          break;
        }
      }
      break;
    }
  }
  if (!grouplis_) return TaskChoice{head.id, ChoiceKind::Modular, -1};
  const int cls = cfg_->size_class(head.size);
  return positioned(snap.by_class.at(static_cast<std::size_t>(cls)), machine, cfg_->m);
}

// ---------------------------------------------------------------------------

std::unique_ptr<Policy> make_policy(const std::string& id, const SystemConfig& config,
                                    const PolicyOptions& options) {
  if (id == "rho-m-preamble") return std::make_unique<RhoMPreamblePolicy>(config);
  if (id == "k-amortized") return std::make_unique<KAmortizedPolicy>(config);
  if (id == "mk-amortized") {
    return std::make_unique<MkAmortizedPolicy>(config, options.c, options.adaptive_c);
  }
  if (id == "m-lis") return std::make_unique<MLisPolicy>(config);
  if (id == "fifo") return std::make_unique<GenericPolicy>(config, GenericKind::Fifo, options.grouplis);
  if (id == "ss") {
    return std::make_unique<GenericPolicy>(config, GenericKind::ShortestSize, options.grouplis);
  }
  if (id == "ls") {
    return std::make_unique<GenericPolicy>(config, GenericKind::LargestSize, options.grouplis);
  }
  throw ConfigError("unknown policy id: " + id);
}

}  // namespace faultline
