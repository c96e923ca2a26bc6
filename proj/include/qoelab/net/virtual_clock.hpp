#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "qoelab/common/types.hpp"

namespace qoelab::net {

// Discrete-event clock. Events fire in (time, insertion order); time never
// moves backwards.
class VirtualClock {
 public:
  using Action = std::function<void()>;

  Seconds now() const { return now_; }

  // Throws std::logic_error if `at` lies in the past.
  void schedule(Seconds at, Action action);

  // Fires the earliest event. Returns false when the queue is empty.
  bool run_next();

  bool empty() const { return queue_.empty(); }
  std::size_t pending() const { return queue_.size(); }
  std::uint64_t fired() const { return fired_; }

 private:
  struct Event {
    Seconds at;
    std::uint64_t ordinal;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.ordinal > b.ordinal;
    }
  };

  Seconds now_ = 0;
  std::uint64_t next_ordinal_ = 0;
  std::uint64_t fired_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace qoelab::net
