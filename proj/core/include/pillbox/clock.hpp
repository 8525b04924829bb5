#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pillbox/wall_time.hpp"

namespace pillbox {

using TimerId = std::uint64_t;

enum class TimerKind : std::uint8_t { kDose, kStage, kDebounce, kSmsTimeout, kUser };

struct TimerTag {
  TimerKind kind = TimerKind::kUser;
  int arg = 0;  // compartment index for kDebounce

  bool operator==(const TimerTag&) const = default;
};

struct Firing {
  WallTime at;
  TimerId id = 0;
  TimerTag tag;

  bool operator==(const Firing&) const = default;
};

struct TimeSet {
  WallTime old_time;
  WallTime new_time;
};

// One-shot timers on the device wall clock. Deadlines are absolute.
class TimerService {
 public:
  virtual ~TimerService() = default;
  virtual WallTime now() const = 0;
  virtual TimerId arm(Seconds delay, TimerTag tag) = 0;
  // False when the timer already fired or was cancelled.
  virtual bool cancel(TimerId id) = 0;
};

struct TimerAudit {
  std::size_t armed = 0;
  std::size_t fired = 0;
  std::size_t cancelled = 0;
  std::size_t pending = 0;

  // Each armed timer is accounted for exactly once.
  bool balanced() const { return armed == fired + cancelled + pending; }
};

// Deterministic simulated RTC. Timers fire in (fire_at, arm order).
class VirtualClock final : public TimerService {
 public:
  using FireHandler = std::function<void(const Firing&)>;

  explicit VirtualClock(WallTime start) : now_(start) {}

  WallTime now() const override { return now_; }
  TimerId arm(Seconds delay, TimerTag tag) override;
  bool cancel(TimerId id) override;

  // Moves time forward by dt, firing every due timer with `now` set to its
  // deadline before the handler runs. Timers armed by the handler that fall
  // inside the window fire in the same call.
  void advance(Seconds dt, const FireHandler& on_fire);
  std::vector<Firing> advance(Seconds dt);

  // Jumps the wall clock. On a forward jump timers with deadlines strictly
  // before `t` fire first, stamped at their own deadlines. A backward jump
  // fires nothing; pending deadlines are kept as they are.
  TimeSet set_time(WallTime t, const FireHandler& on_fire);

  bool is_pending(TimerId id) const { return entries_.count(id) != 0; }
  std::size_t pending_count() const { return entries_.size(); }
  std::optional<WallTime> next_deadline() const;
  TimerAudit audit() const;

 private:
  void fire_until(WallTime limit, bool inclusive, const FireHandler& on_fire);

  WallTime now_;
  TimerId next_id_ = 1;
  std::set<std::pair<std::int64_t, TimerId>> queue_;
  std::map<TimerId, std::pair<WallTime, TimerTag>> entries_;
  std::size_t armed_ = 0;
  std::size_t fired_ = 0;
  std::size_t cancelled_ = 0;
};

}  // namespace pillbox
