#include "pillbox/escalation.hpp"

#include <algorithm>
#include <cctype>

#include "pillbox/gsm.hpp"

namespace pillbox {

namespace {

LogRecord dose_record(LogKind kind, WallTime now, const ActiveDose& a) {
  LogRecord r;
  r.at = now;
  r.kind = kind;
  r.slot = a.dose.slot;
  r.compartment = a.dose.compartment;
  return r;
}

action::Log log_of(LogRecord r) { return action::Log{std::move(r)}; }

// Moves `a` into `stage` for `duration`, recording the new deadline.
EscalationState enter(Stage stage, ActiveDose a, WallTime now, Seconds duration) {
  a.stage_entered = now;
  a.stage_deadline = now + duration;
  return EscalationState{stage, std::move(a)};
}

struct Stepper {
  const EscalationState& state;
  const EscalationPolicy& policy;
  WallTime now;

  StepResult operator()(const event::DoseDue& ev) const {
    LogRecord due;
    due.at = now;
    due.kind = LogKind::kDoseDue;
    due.slot = ev.dose.slot;
    due.compartment = ev.dose.compartment;
    due.due = ev.instance.due_at;

    if (state.stage != Stage::kIdle) {
      LogRecord dropped = due;
      dropped.kind = LogKind::kDoseDropped;
      dropped.due.reset();
      return {state, {log_of(due), log_of(dropped)}, StepError::kIllegalEvent};
    }

    ActiveDose a{ev.instance, ev.dose, now, now};
    auto next = enter(Stage::kRing1, a, now, policy.ring);
    return {next,
            {action::BuzzerOn{}, action::LedBlink{ev.dose.compartment}, action::ShowAlarmScreen{ev.dose.slot},
             action::ArmStageTimer{policy.ring}, log_of(due),
             log_of(dose_record(LogKind::kRingStart, now, *next.active))},
            std::nullopt};
  }

  StepResult operator()(const event::LidOpened& ev) const {
    if (state.stage == Stage::kIdle) {
      LogRecord r;
      r.at = now;
      r.kind = LogKind::kUnscheduledOpen;
      r.compartment = ev.compartment;
      return {state, {log_of(r)}, std::nullopt};
    }
    const auto& a = *state.active;
    if (ev.compartment != a.dose.compartment) {
      auto r = dose_record(LogKind::kWrongCompartment, now, a);
      r.compartment = ev.compartment;
      return {state, {log_of(r)}, std::nullopt};
    }
    return {EscalationState{},
            {action::BuzzerOff{}, action::LedOff{a.dose.compartment}, action::ShowIdleScreen{},
             action::CancelStageTimer{}, log_of(dose_record(LogKind::kTaken, now, a))},
            std::nullopt};
  }

  StepResult operator()(const event::LidClosed& ev) const {
    LogRecord r;
    r.at = now;
    r.kind = LogKind::kLidClose;
    r.compartment = ev.compartment;
    return {state, {log_of(r)}, std::nullopt};
  }

  StepResult operator()(const event::StageTimerFired&) const {
    if (state.stage == Stage::kIdle) return {state, {}, std::nullopt};
    const auto& a = *state.active;
    switch (state.stage) {
      case Stage::kRing1:
        return {enter(Stage::kSnoozed, a, now, policy.snooze),
                {action::BuzzerOff{}, action::ArmStageTimer{policy.snooze},
                 log_of(dose_record(LogKind::kSnoozeStart, now, a))},
                std::nullopt};
      case Stage::kSnoozed:
        return {enter(Stage::kRing2, a, now, policy.ring),
                {action::BuzzerOn{}, action::ArmStageTimer{policy.ring},
                 log_of(dose_record(LogKind::kRingStart, now, a))},
                std::nullopt};
      case Stage::kRing2: {
        auto r = dose_record(LogKind::kSmsRequested, now, a);
        r.recipient = Recipient::kPatient;
        return {enter(Stage::kWaitPatient, a, now, policy.wait_patient),
                {action::BuzzerOff{},
                 action::SendSms{Recipient::kPatient, format_patient_sms(a.dose, a.instance.due_at)},
                 action::ArmStageTimer{policy.wait_patient}, log_of(r)},
                std::nullopt};
      }
      case Stage::kWaitPatient: {
        auto r = dose_record(LogKind::kSmsRequested, now, a);
        r.recipient = Recipient::kFamily;
        return {enter(Stage::kWaitFamily, a, now, policy.wait_family),
                {action::SendSms{Recipient::kFamily,
                                 format_family_sms(policy.patient_name, a.dose, a.instance.due_at)},
                 action::ArmStageTimer{policy.wait_family}, log_of(r)},
                std::nullopt};
      }
      case Stage::kWaitFamily:
        return {EscalationState{},
                {action::LedOff{a.dose.compartment}, action::ShowIdleScreen{},
                 log_of(dose_record(LogKind::kMissed, now, a))},
                std::nullopt};
      case Stage::kIdle:
        break;
    }
    return {state, {}, std::nullopt};
  }

  StepResult operator()(const event::TimeSet& ev) const {
    LogRecord r;
    r.at = now;
    r.kind = LogKind::kTimeSet;
    r.old_time = ev.old_time;
    r.new_time = ev.new_time;
    return {state, {log_of(r)}, std::nullopt};
  }
};

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kIdle: return "IDLE";
    case Stage::kRing1: return "RING1";
    case Stage::kSnoozed: return "SNOOZED";
    case Stage::kRing2: return "RING2";
    case Stage::kWaitPatient: return "WAIT_PATIENT";
    case Stage::kWaitFamily: return "WAIT_FAMILY";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view text) {
  std::string u(text);
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto s : kAllStages) {
    if (to_string(s) == u) return s;
  }
  return std::nullopt;
}

std::string_view event_name(const DeviceEvent& ev) {
  constexpr std::array<std::string_view, 5> kNames{"DOSE_DUE", "LID_OPENED", "LID_CLOSED", "STAGE_TIMER_FIRED",
                                                   "TIME_SET"};
  return kNames[ev.index()];
}

std::string describe(const Action& a) {
  struct V {
    std::string operator()(const action::BuzzerOn&) const { return "BUZZER_ON"; }
    std::string operator()(const action::BuzzerOff&) const { return "BUZZER_OFF"; }
    std::string operator()(const action::LedBlink& x) const {
      return "LED_BLINK(" + std::to_string(x.compartment.index()) + ")";
    }
    std::string operator()(const action::LedOff& x) const {
      return "LED_OFF(" + std::to_string(x.compartment.index()) + ")";
    }
    std::string operator()(const action::ShowAlarmScreen& x) const {
      return "SHOW_ALARM_SCREEN(" + std::string(to_string(x.slot)) + ")";
    }
    std::string operator()(const action::ShowIdleScreen&) const { return "SHOW_IDLE_SCREEN"; }
    std::string operator()(const action::SendSms& x) const {
      return "SEND_SMS(" + std::string(to_string(x.recipient)) + ")";
    }
    std::string operator()(const action::Log& x) const {
      return "LOG(" + std::string(to_string(x.record.kind)) + ")";
    }
    std::string operator()(const action::ArmStageTimer& x) const {
      return "ARM_STAGE_TIMER(" + std::to_string(x.delay.count()) + ")";
    }
    std::string operator()(const action::CancelStageTimer&) const { return "CANCEL_STAGE_TIMER"; }
  };
  return std::visit(V{}, a);
}

StepResult step(const EscalationState& state, const DeviceEvent& event, const EscalationPolicy& policy,
                WallTime now) {
  return std::visit(Stepper{state, policy, now}, event);
}

}  // namespace pillbox
