#pragma once

#include <optional>
#include <vector>

#include "pillbox/clock.hpp"
#include "pillbox/domain.hpp"

namespace pillbox {

struct NextDue {
  DoseInstance instance;
  DoseSlot dose;
  Seconds seconds_until{0};

  bool operator==(const NextDue&) const = default;
};

// Earliest dose with due_at >= now; a dose due exactly now has
// seconds_until == 0. Throws Error(kInvalidSchedule).
std::optional<NextDue> next_due(const Schedule& schedule, WallTime now);

// Every dose with from <= due_at < to, ascending. Throws
// Error(kInvalidRange) if from > to, Error(kInvalidSchedule) on a bad schedule.
std::vector<DoseInstance> due_instances(const Schedule& schedule, WallTime from, WallTime to);

// Owns the single pending dose timer.
class DoseTimer {
 public:
  explicit DoseTimer(TimerService& timers) : timers_(&timers) {}

  // Arms a timer at next_due(schedule, now).due_at, cancelling any dose timer
  // that is still pending. Returns nullopt (and arms nothing) for an empty
  // schedule.
  std::optional<TimerId> arm_next(const Schedule& schedule, WallTime now);
  void disarm();

  // The instance the fired timer stood for; nullopt for a stale id.
  std::optional<NextDue> take_fired(TimerId id);

  const std::optional<NextDue>& pending() const { return pending_; }
  std::optional<TimerId> timer() const { return timer_; }

 private:
  TimerService* timers_;
  std::optional<TimerId> timer_;
  std::optional<NextDue> pending_;
};

}  // namespace pillbox
