#include "pillbox/scheduler.hpp"

#include <algorithm>

#include "pillbox/error.hpp"

namespace pillbox {

namespace {

void require_valid(const Schedule& schedule) {
  const auto violations = validate_schedule(schedule);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvalidSchedule, std::string(to_string(violations.front().code)) + ": " +
                                                 violations.front().message);
  }
}

std::vector<const DoseSlot*> by_time(const Schedule& schedule) {
  std::vector<const DoseSlot*> out;
  for (const auto& s : schedule.slots) out.push_back(&s);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->time < b->time; });
  return out;
}

DoseInstance instance_on(WallTime day_start, const DoseSlot& slot) {
  const WallTime due = day_start + Seconds(slot.time.seconds());
  return DoseInstance{due.date(), slot.slot, due};
}

}  // namespace

std::optional<NextDue> next_due(const Schedule& schedule, WallTime now) {
  require_valid(schedule);
  if (schedule.empty()) return std::nullopt;
  const auto slots = by_time(schedule);
  for (int day = 0; day < 2; ++day) {
    const WallTime day_start = now.start_of_day() + Seconds(day * kSecondsPerDay);
    for (const auto* slot : slots) {
      const auto inst = instance_on(day_start, *slot);
      if (inst.due_at >= now) return NextDue{inst, *slot, inst.due_at - now};
    }
  }
  return std::nullopt;  // unreachable for a non-empty schedule
}

std::vector<DoseInstance> due_instances(const Schedule& schedule, WallTime from, WallTime to) {
  if (from > to) throw Error(ErrorCode::kInvalidRange, "from is after to");
  require_valid(schedule);
  std::vector<DoseInstance> out;
  if (schedule.empty()) return out;
  const auto slots = by_time(schedule);
  for (WallTime day = from.start_of_day(); day < to; day += Seconds(kSecondsPerDay)) {
    for (const auto* slot : slots) {
      const auto inst = instance_on(day, *slot);
      if (inst.due_at >= from && inst.due_at < to) out.push_back(inst);
    }
  }
  return out;
}

std::optional<TimerId> DoseTimer::arm_next(const Schedule& schedule, WallTime now) {
  auto next = next_due(schedule, now);
  disarm();
  if (!next) return std::nullopt;
  const WallTime clock_now = timers_->now();
  const Seconds delay = next->instance.due_at > clock_now ? next->instance.due_at - clock_now : Seconds{0};
  timer_ = timers_->arm(delay, TimerTag{TimerKind::kDose, 0});
  pending_ = std::move(next);
  return timer_;
}

void DoseTimer::disarm() {
  if (timer_) timers_->cancel(*timer_);
  timer_.reset();
  pending_.reset();
}

std::optional<NextDue> DoseTimer::take_fired(TimerId id) {
  if (timer_ != id) return std::nullopt;
  timer_.reset();
  auto out = std::move(pending_);
  pending_.reset();
  return out;
}

}  // namespace pillbox
