#include "pillbox/peripherals.hpp"

namespace pillbox {

void Peripherals::apply(const Action& a) {
  struct V {
    Peripherals& p;
    void operator()(const action::BuzzerOn&) const { p.indicators_.buzzer_on = true; }
    void operator()(const action::BuzzerOff&) const { p.indicators_.buzzer_on = false; }
    void operator()(const action::LedBlink& x) const {
      p.indicators_.leds[x.compartment.offset()] = LedState::kBlinking;
    }
    void operator()(const action::LedOff& x) const { p.indicators_.leds[x.compartment.offset()] = LedState::kOff; }
    void operator()(const action::ShowAlarmScreen& x) const { p.display_ = {ScreenMode::kAlarm, x.slot}; }
    void operator()(const action::ShowIdleScreen&) const { p.display_ = {}; }
    void operator()(const action::SendSms& x) const {
      const auto& number =
          x.recipient == Recipient::kPatient ? p.policy_->patient_number : p.policy_->family_number;
      p.sms_->submit(SmsJob{x.recipient, SmsMessage{number, x.body}});
    }
    void operator()(const action::Log& x) const { p.log_->append(x.record); }
    void operator()(const action::ArmStageTimer& x) const {
      if (p.stage_timer_) p.timers_->cancel(*p.stage_timer_);
      p.stage_timer_ = p.timers_->arm(x.delay, TimerTag{TimerKind::kStage, 0});
    }
    void operator()(const action::CancelStageTimer&) const {
      if (p.stage_timer_) p.timers_->cancel(*p.stage_timer_);
      p.stage_timer_.reset();
    }
  };
  std::visit(V{*this}, a);
}

bool Peripherals::take_stage_timer(TimerId id) {
  if (stage_timer_ != id) return false;
  stage_timer_.reset();
  return true;
}

}  // namespace pillbox
