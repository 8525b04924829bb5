#include "pillbox/device.hpp"

#include "pillbox/error.hpp"

namespace pillbox {

namespace {

void require_valid(const Schedule& s) {
  if (auto v = validate_schedule(s); !v.empty()) {
    throw Error(ErrorCode::kInvalidSchedule, std::string(to_string(v.front().code)) + ": " + v.front().message);
  }
}

void require_valid(const EscalationPolicy& p) {
  if (auto v = validate_policy(p); !v.empty()) throw Error(ErrorCode::kInvalidPolicy, v.front());
}

}  // namespace

Device::Device(DeviceConfig config, WallTime start, AdherenceLog log)
    : config_(std::move(config)),
      clock_(start),
      log_(std::move(log)),
      driver_(link_, clock_,
              [this](const SmsAttemptReport& r) {
                LogRecord rec;
                rec.at = clock_.now();
                rec.recipient = r.job.recipient;
                rec.attempt = r.attempt;
                if (const auto* sent = std::get_if<SmsSent>(&r.outcome)) {
                  rec.kind = LogKind::kSmsSent;
                  rec.sms_ref = sent->ref;
                } else {
                  rec.kind = LogKind::kSmsFailed;
                  rec.reason = std::get<SmsFailed>(r.outcome).reason;
                  rec.final_attempt = r.final;
                }
                log_.append(std::move(rec));
              }),
      sensors_(clock_),
      dose_timer_(clock_),
      peripherals_(clock_, log_, driver_, config_.policy) {
  require_valid(config_.schedule);
  require_valid(config_.policy);
  driver_.set_retries(config_.policy.sms_retries);
  rearm();
}

void Device::advance(Seconds dt) {
  clock_.advance(dt, [this](const Firing& f) { on_fire(f); });
}

void Device::advance_to(WallTime t) {
  if (t > clock_.now()) advance(t - clock_.now());
}

void Device::set_time(WallTime t) {
  in_jump_ = true;
  const auto change = clock_.set_time(t, [this](const Firing& f) { on_fire(f); });
  in_jump_ = false;
  feed(event::TimeSet{change.old_time, change.new_time});
  rearm();
}

void Device::set_lid(CompartmentId box, bool open) { sensors_.set_raw(box, open); }

void Device::set_schedule(Schedule schedule) {
  require_valid(schedule);
  config_.schedule = std::move(schedule);
  rearm();
}

void Device::set_policy(EscalationPolicy policy) {
  require_valid(policy);
  config_.policy = std::move(policy);
  driver_.set_retries(config_.policy.sms_retries);
}

std::optional<NextDue> Device::upcoming() const {
  auto next = dose_timer_.pending();
  if (next) next->seconds_until = next->instance.due_at > now() ? next->instance.due_at - now() : Seconds{0};
  return next;
}

LcdFrame Device::lcd() const {
  if (peripherals_.display().mode == ScreenMode::kAlarm && state_.active) {
    return render_alarm(state_.active->dose, state_.stage);
  }
  return render_idle(now(), upcoming());
}

void Device::rearm() {
  // A dose instance fires at most once, even if the clock is set back past it.
  WallTime from = clock_.now();
  if (last_fired_due_ && *last_fired_due_ >= from) from = *last_fired_due_ + Seconds{1};
  dose_timer_.arm_next(config_.schedule, from);
}

void Device::on_fire(const Firing& f) {
  switch (f.tag.kind) {
    case TimerKind::kDose: {
      auto fired = dose_timer_.take_fired(f.id);
      if (!fired) return;
      last_fired_due_ = fired->instance.due_at;
      rearm();
      // Doses jumped over by a manual forward clock set are skipped, not
      // rung late.
      if (in_jump_) return;
      feed(event::DoseDue{fired->instance, fired->dose});
      return;
    }
    case TimerKind::kStage:
      if (peripherals_.take_stage_timer(f.id)) feed(event::StageTimerFired{});
      return;
    case TimerKind::kDebounce:
      if (auto ev = sensors_.on_debounce(f)) {
        if (ev->open) {
          LogRecord rec;
          rec.at = clock_.now();
          rec.kind = LogKind::kLidOpen;
          rec.compartment = ev->compartment;
          log_.append(std::move(rec));
          feed(event::LidOpened{ev->compartment});
        } else {
          feed(event::LidClosed{ev->compartment});
        }
      }
      return;
    case TimerKind::kSmsTimeout:
      driver_.on_timeout(f.id);
      pump(link_, modem_, driver_);
      return;
    case TimerKind::kUser:
      return;
  }
}

void Device::feed(const DeviceEvent& ev) {
  auto result = step(state_, ev, config_.policy, clock_.now());
  state_ = std::move(result.state);
  for (const auto& a : result.actions) peripherals_.apply(a);
  pump(link_, modem_, driver_);
  ++events_processed_;
}

}  // namespace pillbox
