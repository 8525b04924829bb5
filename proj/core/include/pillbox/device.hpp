#pragma once

#include <cstdint>
#include <optional>

#include "pillbox/adherence_log.hpp"
#include "pillbox/clock.hpp"
#include "pillbox/config.hpp"
#include "pillbox/escalation.hpp"
#include "pillbox/gsm.hpp"
#include "pillbox/lcd.hpp"
#include "pillbox/lid_sensors.hpp"
#include "pillbox/peripherals.hpp"
#include "pillbox/scheduler.hpp"

namespace pillbox {

// The simulated pillbox: one event loop owning the virtual clock, sensors,
// escalation state, modem and adherence log. All mutation goes through the
// methods below, which callers must serialize.
class Device {
 public:
  // Throws Error(kInvalidSchedule / kInvalidPolicy) for a bad config.
  Device(DeviceConfig config, WallTime start, AdherenceLog log = {});
  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  void advance(Seconds dt);
  // Runs the clock up to `t` if it is later; time never runs backwards here.
  void advance_to(WallTime t);
  void set_time(WallTime t);
  // Raw lid edge now; the debounced event follows one tick later.
  void set_lid(CompartmentId box, bool open);
  void set_schedule(Schedule schedule);
  void set_policy(EscalationPolicy policy);
  void set_modem_fault(ModemFaultPlan plan) { modem_.set_plan(plan); }

  WallTime now() const { return clock_.now(); }
  const DeviceConfig& config() const { return config_; }
  const EscalationState& state() const { return state_; }
  const IndicatorState& indicators() const { return peripherals_.indicators(); }
  const LidState& lid(CompartmentId box) const { return sensors_.state(box); }
  LcdFrame lcd() const;
  std::optional<NextDue> upcoming() const;
  const AdherenceLog& log() const { return log_; }
  const SimModem& modem() const { return modem_; }
  const ModemLink& link() const { return link_; }
  const VirtualClock& clock() const { return clock_; }
  std::uint64_t events_processed() const { return events_processed_; }

 private:
  void on_fire(const Firing& f);
  void feed(const DeviceEvent& ev);
  void rearm();

  DeviceConfig config_;
  VirtualClock clock_;
  AdherenceLog log_;
  ModemLink link_;
  SimModem modem_;
  SmsDriver driver_;
  LidSensors sensors_;
  DoseTimer dose_timer_;
  Peripherals peripherals_;
  EscalationState state_;
  std::optional<WallTime> last_fired_due_;
  bool in_jump_ = false;
  std::uint64_t events_processed_ = 0;
};

}  // namespace pillbox
