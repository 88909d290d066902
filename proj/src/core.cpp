#include "faultline/core.hpp"

#include <algorithm>
#include <tuple>

namespace faultline {

bool SystemConfig::pairwise_divisible() const {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double r = sizes[i] / sizes[j];
      if (std::fabs(r - std::round(r)) > kTimeTol) return false;
    }
  }
  return true;
}

int SystemConfig::size_class(double size) const {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (std::fabs(sizes[i] - size) <= kTimeTol) return static_cast<int>(i);
  }
  return -1;
}

void SystemConfig::validate() const {
  if (m < 1) throw ConfigError("machine count must be at least 1");
  if (s < 1.0 - kTimeTol) throw ConfigError("speedup must be at least 1");
  if (sizes.empty()) throw ConfigError("size ladder must be nonempty");
  double prev = 0.0;
  for (double l : sizes) {
    if (l <= kTimeTol) throw ConfigError("task sizes must be positive");
    if (l <= prev + kTimeTol) throw ConfigError("size ladder must be strictly ascending");
    prev = l;
  }
}

void AdversarialPattern::sort_stable() {
  std::stable_sort(events.begin(), events.end(),
                   [](const PatternEvent& a, const PatternEvent& b) { return a.t < b.t; });
}

std::size_t AdversarialPattern::count_injections() const {
  std::size_t n = 0;
  for (const auto& e : events) n += (e.kind == PatternEventKind::Inject);
  return n;
}

std::size_t AdversarialPattern::count_error_events() const {
  return events.size() - count_injections();
}

bool QueueSnapshot::empty() const { return total() == 0; }

std::size_t QueueSnapshot::total() const {
  std::size_t n = 0;
  for (const auto& q : by_class) n += q.size();
  return n;
}

std::vector<Task> QueueSnapshot::unified_by_arrival() const {
  std::vector<Task> all;
  all.reserve(total());
  for (const auto& q : by_class) all.insert(all.end(), q.begin(), q.end());
  std::sort(all.begin(), all.end(), [](const Task& a, const Task& b) {
    return std::tie(a.arrival, a.id) < std::tie(b.arrival, b.id);
  });
  return all;
}

std::vector<Task> QueueSnapshot::unified_by_size_then_arrival() const {
  // Classes are already size-ascending and each queue is (arrival, id)-sorted.
  std::vector<Task> all;
  all.reserve(total());
  for (const auto& q : by_class) all.insert(all.end(), q.begin(), q.end());
  return all;
}

Repository::Repository(const SystemConfig& config) : config_(&config) {
  config.validate();
  queues_.resize(static_cast<std::size_t>(config.k()));
}

void Repository::inject(const Task& task) {
  if (task.id <= last_id_) {
    throw PatternError("task ids must be strictly increasing (got " +
                       std::to_string(task.id) + " after " + std::to_string(last_id_) + ")");
  }
  const int cls = config_->size_class(task.size);
  if (cls < 0) {
    throw PatternError("task size " + std::to_string(task.size) + " is not on the ladder");
  }
  last_id_ = task.id;
  known_.emplace(task.id, Entry{task, cls, false});
  auto& q = queues_[static_cast<std::size_t>(cls)];
  // Engine injections arrive in (arrival, id) order already; keep the queue
  // sorted regardless so direct library use stays safe.
  auto pos = std::upper_bound(q.begin(), q.end(), task, [](const Task& a, const Task& b) {
    return std::tie(a.arrival, a.id) < std::tie(b.arrival, b.id);
  });
  q.insert(pos, task);
  ++pending_;
}

QueueSnapshot Repository::get() const {
  QueueSnapshot snap;
  snap.by_class = queues_;
  return snap;
}

InformResult Repository::inform(TaskId id) {
  auto it = known_.find(id);
  if (it == known_.end()) throw FaultlineError("inform for unknown task id " + std::to_string(id));
  if (it->second.completed) return InformResult{InformResult::AlreadyDone};
  it->second.completed = true;
  auto& q = queues_[static_cast<std::size_t>(it->second.cls)];
  auto pos = std::find_if(q.begin(), q.end(), [&](const Task& t) { return t.id == id; });
  if (pos == q.end()) throw FaultlineError("pending task missing from its queue");
  q.erase(pos);
  --pending_;
  return InformResult{InformResult::Accepted};
}

std::vector<int> Repository::queue_sizes() const {
  std::vector<int> out;
  out.reserve(queues_.size());
  for (const auto& q : queues_) out.push_back(static_cast<int>(q.size()));
  return out;
}

bool Repository::is_pending(TaskId id) const {
  auto it = known_.find(id);
  return it != known_.end() && !it->second.completed;
}

bool Repository::is_completed(TaskId id) const {
  auto it = known_.find(id);
  return it != known_.end() && it->second.completed;
}

const Task& Repository::task_meta(TaskId id) const {
  auto it = known_.find(id);
  if (it == known_.end()) throw FaultlineError("unknown task id " + std::to_string(id));
  return it->second.task;
}

std::vector<SimEvent> order_simultaneous(std::vector<SimEvent> events,
                                         const std::vector<bool>& alive_before) {
  // Detect machines holding both a crash and a restart at this instant.
  auto has = [&](SimEventClass c, int q) {
    for (const auto& e : events)
      if (e.cls == c && e.machine == q) return true;
    return false;
  };
  struct Key {
    int slot;
    int machine;
    long sub;
    long seq;
  };
  auto key_of = [&](const SimEvent& e) -> Key {
    const int base = static_cast<int>(e.cls);
    if (e.cls == SimEventClass::Restart && e.machine >= 0 &&
        static_cast<std::size_t>(e.machine) < alive_before.size() && alive_before[e.machine] &&
        has(SimEventClass::Crash, e.machine)) {
      // Alive machine bouncing: its restart rides right behind its crash.
      return Key{static_cast<int>(SimEventClass::Crash), e.machine, 1, e.seq};
    }
    return Key{base, e.machine, 0, e.seq};
  };
  std::stable_sort(events.begin(), events.end(), [&](const SimEvent& a, const SimEvent& b) {
    const Key ka = key_of(a), kb = key_of(b);
    return std::tie(ka.slot, ka.machine, ka.sub, ka.seq) <
           std::tie(kb.slot, kb.machine, kb.sub, kb.seq);
  });
  return events;
}

}  // namespace faultline
