#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pillbox/domain.hpp"
#include "pillbox/log_record.hpp"

namespace pillbox {

enum class Stage : std::uint8_t { kIdle, kRing1, kSnoozed, kRing2, kWaitPatient, kWaitFamily };

inline constexpr std::array<Stage, 6> kAllStages{Stage::kIdle,  Stage::kRing1,       Stage::kSnoozed,
                                                  Stage::kRing2, Stage::kWaitPatient, Stage::kWaitFamily};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);  // case-insensitive

struct ActiveDose {
  DoseInstance instance;
  DoseSlot dose;
  WallTime stage_entered;
  WallTime stage_deadline;

  bool operator==(const ActiveDose&) const = default;
};

// IDLE carries no dose; every other stage carries exactly one.
struct EscalationState {
  Stage stage = Stage::kIdle;
  std::optional<ActiveDose> active;

  bool well_formed() const { return (stage == Stage::kIdle) == !active.has_value(); }
  bool operator==(const EscalationState&) const = default;
};

namespace event {
struct DoseDue {
  DoseInstance instance;
  DoseSlot dose;
};
struct LidOpened {
  CompartmentId compartment;
};
struct LidClosed {
  CompartmentId compartment;
};
struct StageTimerFired {};
struct TimeSet {
  WallTime old_time;
  WallTime new_time;
};
}  // namespace event

using DeviceEvent =
    std::variant<event::DoseDue, event::LidOpened, event::LidClosed, event::StageTimerFired, event::TimeSet>;

std::string_view event_name(const DeviceEvent& ev);

namespace action {
struct BuzzerOn {
  bool operator==(const BuzzerOn&) const = default;
};
struct BuzzerOff {
  bool operator==(const BuzzerOff&) const = default;
};
struct LedBlink {
  CompartmentId compartment;
  bool operator==(const LedBlink&) const = default;
};
struct LedOff {
  CompartmentId compartment;
  bool operator==(const LedOff&) const = default;
};
struct ShowAlarmScreen {
  SlotId slot;
  bool operator==(const ShowAlarmScreen&) const = default;
};
struct ShowIdleScreen {
  bool operator==(const ShowIdleScreen&) const = default;
};
struct SendSms {
  Recipient recipient;
  std::string body;
  bool operator==(const SendSms&) const = default;
};
// Record to append; seq is left for the store.
struct Log {
  LogRecord record;
  bool operator==(const Log&) const = default;
};
struct ArmStageTimer {
  Seconds delay;
  bool operator==(const ArmStageTimer&) const = default;
};
struct CancelStageTimer {
  bool operator==(const CancelStageTimer&) const = default;
};
}  // namespace action

using Action = std::variant<action::BuzzerOn, action::BuzzerOff, action::LedBlink, action::LedOff,
                            action::ShowAlarmScreen, action::ShowIdleScreen, action::SendSms, action::Log,
                            action::ArmStageTimer, action::CancelStageTimer>;

std::string describe(const Action& a);

enum class StepError : std::uint8_t {
  kIllegalEvent,  // DOSE_DUE while a dose is still unresolved
};

struct StepResult {
  EscalationState state;
  std::vector<Action> actions;
  std::optional<StepError> error;
};

// The alarm escalation transition function. Pure and total: every
// (stage, event) pair yields a state and an ordered action list.
StepResult step(const EscalationState& state, const DeviceEvent& event, const EscalationPolicy& policy,
                WallTime now);

}  // namespace pillbox
