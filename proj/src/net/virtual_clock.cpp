#include "qoelab/net/virtual_clock.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace qoelab::net {

void VirtualClock::schedule(Seconds at, Action action) {
  if (at < now_) {
    throw std::logic_error(fmt::format("virtual clock: event at {} precedes now {}", at, now_));
  }
  queue_.push(Event{at, next_ordinal_++, std::move(action)});
}

bool VirtualClock::run_next() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.at;
  ++fired_;
  ev.action();
  return true;
}

}  // namespace qoelab::net
