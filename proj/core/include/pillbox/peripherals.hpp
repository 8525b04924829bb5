#pragma once

#include <optional>

#include "pillbox/adherence_log.hpp"
#include "pillbox/clock.hpp"
#include "pillbox/escalation.hpp"
#include "pillbox/gsm.hpp"
#include "pillbox/lid_sensors.hpp"

namespace pillbox {

enum class ScreenMode : std::uint8_t { kIdle, kAlarm };

struct DisplayState {
  ScreenMode mode = ScreenMode::kIdle;
  std::optional<SlotId> alarm_slot;

  bool operator==(const DisplayState&) const = default;
};

// Output side of the HAL: interprets FSM actions against the indicators,
// display, modem driver, adherence log and the stage timer.
class Peripherals {
 public:
  Peripherals(TimerService& timers, AdherenceLog& log, SmsDriver& sms, const EscalationPolicy& policy)
      : timers_(&timers), log_(&log), sms_(&sms), policy_(&policy) {}

  void apply(const Action& action);

  const IndicatorState& indicators() const { return indicators_; }
  const DisplayState& display() const { return display_; }
  std::optional<TimerId> stage_timer() const { return stage_timer_; }
  // Consumes the stage timer id when it fires; false for stale ids.
  bool take_stage_timer(TimerId id);

 private:
  TimerService* timers_;
  AdherenceLog* log_;
  SmsDriver* sms_;
  const EscalationPolicy* policy_;
  IndicatorState indicators_;
  DisplayState display_;
  std::optional<TimerId> stage_timer_;
};

}  // namespace pillbox
