#pragma once

#include <array>
#include <optional>

#include "pillbox/clock.hpp"
#include "pillbox/domain.hpp"

namespace pillbox {

// The sensor debounce is 50 ms; on a 1 Hz clock that means the raw value
// must survive to the next tick.
inline constexpr Seconds kDebounceWindow{1};

struct LidEvent {
  CompartmentId compartment;
  bool open = false;
  WallTime at;
};

struct LidState {
  bool raw_open = false;
  bool debounced_open = false;
  WallTime last_change;
};

// Debounced IR lid sensors. Promotions run as kDebounce timers on the
// shared clock so they interleave with every other timer deterministically.
class LidSensors {
 public:
  explicit LidSensors(TimerService& timers) : timers_(&timers) {}

  // Raw edge at the clock's current time. No-op if the value is unchanged.
  void set_raw(CompartmentId box, bool open);

  // Handles a kDebounce firing; yields an event when the stable raw value
  // differs from the debounced one.
  std::optional<LidEvent> on_debounce(const Firing& firing);

  const LidState& state(CompartmentId box) const { return lids_[box.offset()]; }

 private:
  TimerService* timers_;
  std::array<LidState, kCompartmentCount> lids_{};
  std::array<std::optional<TimerId>, kCompartmentCount> pending_{};
};

enum class LedState : std::uint8_t { kOff, kBlinking };

struct IndicatorState {
  bool buzzer_on = false;
  std::array<LedState, kCompartmentCount> leds{LedState::kOff, LedState::kOff, LedState::kOff};

  bool operator==(const IndicatorState&) const = default;
};

}  // namespace pillbox
