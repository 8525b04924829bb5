#include "pillbox/clock.hpp"

#include "pillbox/error.hpp"

namespace pillbox {

TimerId VirtualClock::arm(Seconds delay, TimerTag tag) {
  if (delay < Seconds::zero()) throw Error(ErrorCode::kPrecondition, "negative timer delay");
  const TimerId id = next_id_++;
  const WallTime at = now_ + delay;
  queue_.emplace(at.epoch_seconds(), id);
  entries_.emplace(id, std::make_pair(at, tag));
  ++armed_;
  return id;
}

bool VirtualClock::cancel(TimerId id) {
  const auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  queue_.erase({it->second.first.epoch_seconds(), id});
  entries_.erase(it);
  ++cancelled_;
  return true;
}

void VirtualClock::fire_until(WallTime limit, bool inclusive, const FireHandler& on_fire) {
  while (!queue_.empty()) {
    const auto [at_s, id] = *queue_.begin();
    const auto at = WallTime::from_epoch_seconds(at_s);
    if (inclusive ? at > limit : at >= limit) break;
    queue_.erase(queue_.begin());
    const auto node = entries_.extract(id);
    ++fired_;
    if (at > now_) now_ = at;
    if (on_fire) on_fire(Firing{at, id, node.mapped().second});
  }
}

void VirtualClock::advance(Seconds dt, const FireHandler& on_fire) {
  if (dt < Seconds::zero()) throw Error(ErrorCode::kPrecondition, "negative advance");
  const WallTime target = now_ + dt;
  fire_until(target, true, on_fire);
  now_ = target;
}

std::vector<Firing> VirtualClock::advance(Seconds dt) {
  std::vector<Firing> out;
  advance(dt, [&](const Firing& f) { out.push_back(f); });
  return out;
}

TimeSet VirtualClock::set_time(WallTime t, const FireHandler& on_fire) {
  const TimeSet change{now_, t};
  if (t > now_) fire_until(t, false, on_fire);
  now_ = t;
  return change;
}

std::optional<WallTime> VirtualClock::next_deadline() const {
  if (queue_.empty()) return std::nullopt;
  return WallTime::from_epoch_seconds(queue_.begin()->first);
}

TimerAudit VirtualClock::audit() const {
  return TimerAudit{armed_, fired_, cancelled_, entries_.size()};
}

}  // namespace pillbox
