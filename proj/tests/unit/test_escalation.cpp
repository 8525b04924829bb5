#include <doctest.h>

#include <map>
#include <random>

#include "pillbox/escalation.hpp"
#include "pillbox/gsm.hpp"

using namespace pillbox;

namespace {

const EscalationPolicy kPolicy{};
const DoseSlot kDose{SlotId::kMorning, TimeOfDay::hm(8, 0), CompartmentId(1), "PARACETAMOL", 2};
const WallTime kDue = WallTime::from_civil(2017, 3, 1, 8, 0, 0);

event::DoseDue due_event(WallTime due = kDue, const DoseSlot& dose = kDose) {
  return event::DoseDue{DoseInstance{due.date(), dose.slot, due}, dose};
}

std::vector<std::string> names(const std::vector<Action>& actions) {
  std::vector<std::string> out;
  for (const auto& a : actions) out.push_back(describe(a));
  return out;
}

// State reached by driving the FSM from IDLE through `fires` stage timeouts.
std::pair<EscalationState, WallTime> advance_to_stage(int fires) {
  auto r = step(EscalationState{}, due_event(), kPolicy, kDue);
  auto now = kDue;
  for (int i = 0; i < fires; ++i) {
    now = r.state.active->stage_deadline;
    r = step(r.state, event::StageTimerFired{}, kPolicy, now);
  }
  return {r.state, now};
}

EscalationState in_stage(Stage s) {
  for (int i = 0; i < 5; ++i) {
    auto [state, now] = advance_to_stage(i);
    if (state.stage == s) return state;
  }
  return EscalationState{};
}

}  // namespace

TEST_CASE("idle plus dose due starts ringing") {
  const auto r = step(EscalationState{}, due_event(), kPolicy, kDue);
  CHECK(r.state.stage == Stage::kRing1);
  CHECK_FALSE(r.error);
  CHECK(names(r.actions) == std::vector<std::string>{"BUZZER_ON", "LED_BLINK(1)", "SHOW_ALARM_SCREEN(MORNING)",
                                                     "ARM_STAGE_TIMER(60)", "LOG(DOSE_DUE)", "LOG(RING_START)"});
  CHECK(r.state.active->stage_deadline == kDue + Seconds{60});
}

TEST_CASE("correct lid during ring one is a take") {
  const auto ring = in_stage(Stage::kRing1);
  const auto r = step(ring, event::LidOpened{CompartmentId(1)}, kPolicy, kDue + Seconds{31});
  CHECK(r.state == EscalationState{});
  CHECK(names(r.actions) ==
        std::vector<std::string>{"BUZZER_OFF", "LED_OFF(1)", "SHOW_IDLE_SCREEN", "CANCEL_STAGE_TIMER", "LOG(TAKEN)"});
}

TEST_CASE("ring one timeout snoozes with the led still blinking") {
  const auto r = step(in_stage(Stage::kRing1), event::StageTimerFired{}, kPolicy, kDue + Seconds{60});
  CHECK(r.state.stage == Stage::kSnoozed);
  CHECK(names(r.actions) == std::vector<std::string>{"BUZZER_OFF", "ARM_STAGE_TIMER(300)", "LOG(SNOOZE_START)"});
}

TEST_CASE("snooze timeout rings again") {
  const auto r = step(in_stage(Stage::kSnoozed), event::StageTimerFired{}, kPolicy, kDue + Seconds{360});
  CHECK(r.state.stage == Stage::kRing2);
  CHECK(names(r.actions) == std::vector<std::string>{"BUZZER_ON", "ARM_STAGE_TIMER(60)", "LOG(RING_START)"});
}

TEST_CASE("second ring timeout messages the patient") {
  const auto r = step(in_stage(Stage::kRing2), event::StageTimerFired{}, kPolicy, kDue + Seconds{420});
  CHECK(r.state.stage == Stage::kWaitPatient);
  CHECK(names(r.actions) ==
        std::vector<std::string>{"BUZZER_OFF", "SEND_SMS(PATIENT)", "ARM_STAGE_TIMER(300)", "LOG(SMS_REQUESTED)"});
  const auto& sms = std::get<action::SendSms>(r.actions[1]);
  CHECK(sms.body == "MISSED DOSE: PARACETAMOL x2 at 08:00 01-03-2017. PLEASE TAKE IT NOW.");
  CHECK(std::get<action::Log>(r.actions[3]).record.recipient == Recipient::kPatient);
}

TEST_CASE("patient wait timeout messages the family") {
  const auto r = step(in_stage(Stage::kWaitPatient), event::StageTimerFired{}, kPolicy, kDue + Seconds{720});
  CHECK(r.state.stage == Stage::kWaitFamily);
  CHECK(names(r.actions) == std::vector<std::string>{"SEND_SMS(FAMILY)", "ARM_STAGE_TIMER(300)", "LOG(SMS_REQUESTED)"});
  CHECK(std::get<action::SendSms>(r.actions[0]).body == "ALERT: PATIENT MISSED PARACETAMOL x2 at 08:00 01-03-2017.");
}

TEST_CASE("family wait timeout is a miss") {
  const auto r = step(in_stage(Stage::kWaitFamily), event::StageTimerFired{}, kPolicy, kDue + Seconds{1020});
  CHECK(r.state == EscalationState{});
  CHECK(names(r.actions) == std::vector<std::string>{"LED_OFF(1)", "SHOW_IDLE_SCREEN", "LOG(MISSED)"});
}

TEST_CASE("no interaction with the default policy misses at plus 1020 seconds") {
  auto [state, now] = advance_to_stage(5);
  CHECK(state.stage == Stage::kIdle);
  CHECK(now == WallTime::from_civil(2017, 3, 1, 8, 17, 0));
}

TEST_CASE("wrong lid, unscheduled open, lid close and time set keep the state") {
  for (auto s : kAllStages) {
    const auto st = in_stage(s);
    const auto close = step(st, event::LidClosed{CompartmentId(2)}, kPolicy, kDue);
    CHECK(close.state == st);
    CHECK(names(close.actions) == std::vector<std::string>{"LOG(LID_CLOSE)"});
    const auto ts = step(st, event::TimeSet{kDue, kDue + Seconds{5}}, kPolicy, kDue + Seconds{5});
    CHECK(ts.state == st);
    CHECK(names(ts.actions) == std::vector<std::string>{"LOG(TIME_SET)"});
    const auto open = step(st, event::LidOpened{CompartmentId(2)}, kPolicy, kDue);
    CHECK(open.state == st);
    CHECK(names(open.actions) ==
          std::vector<std::string>{s == Stage::kIdle ? "LOG(UNSCHEDULED_OPEN)" : "LOG(WRONG_COMPARTMENT)"});
  }
}

TEST_CASE("late take in every non-idle stage") {
  for (auto s : kAllStages) {
    if (s == Stage::kIdle) continue;
    const auto r = step(in_stage(s), event::LidOpened{CompartmentId(1)}, kPolicy, kDue + Seconds{1});
    CHECK(r.state.stage == Stage::kIdle);
    CHECK(names(r.actions).back() == "LOG(TAKEN)");
  }
}

TEST_CASE("dose due while busy is dropped") {
  const auto busy = in_stage(Stage::kSnoozed);
  const auto r = step(busy, due_event(kDue + Seconds{300}), kPolicy, kDue + Seconds{300});
  CHECK(r.error == StepError::kIllegalEvent);
  CHECK(r.state == busy);
  CHECK(names(r.actions) == std::vector<std::string>{"LOG(DOSE_DUE)", "LOG(DOSE_DROPPED)"});
}

TEST_CASE("machine is total over all stage and event pairs") {
  const std::vector<DeviceEvent> events{due_event(), event::LidOpened{CompartmentId(1)},
                                        event::LidClosed{CompartmentId(1)}, event::StageTimerFired{},
                                        event::TimeSet{kDue, kDue}};
  std::map<std::pair<Stage, std::size_t>, bool> seen;
  for (auto s : kAllStages) {
    const auto st = in_stage(s);
    REQUIRE(st.stage == s);
    for (const auto& ev : events) {
      const auto r = step(st, ev, kPolicy, kDue + Seconds{1});
      CHECK(r.state.well_formed());
      seen[{s, ev.index()}] = true;
    }
  }
  CHECK(seen.size() == 30);
}

TEST_CASE("stage deadlines equal entry time plus the policy duration") {
  EscalationPolicy p;
  p.ring = Seconds{7};
  p.snooze = Seconds{11};
  p.wait_patient = Seconds{13};
  p.wait_family = Seconds{17};
  auto r = step(EscalationState{}, due_event(), p, kDue);
  const std::map<Stage, Seconds> expected{{Stage::kRing1, p.ring},
                                          {Stage::kSnoozed, p.snooze},
                                          {Stage::kRing2, p.ring},
                                          {Stage::kWaitPatient, p.wait_patient},
                                          {Stage::kWaitFamily, p.wait_family}};
  while (r.state.stage != Stage::kIdle) {
    const auto& a = *r.state.active;
    CHECK(a.stage_deadline - a.stage_entered == expected.at(r.state.stage));
    r = step(r.state, event::StageTimerFired{}, p, a.stage_deadline);
  }
}

namespace {

struct Fold {
  bool buzzer = false;
  int terminals = 0;
  int patient_sms = 0;
  int family_sms = 0;
  bool family_before_patient = false;
  bool buzzer_on_outside_ring = false;
  bool buzzer_on_in_idle = false;
  bool overlong_body = false;
};

}  // namespace

TEST_CASE("random event streams keep the escalation invariants") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_int_distribution<int> box(1, 3);
  for (int run = 0; run < 400; ++run) {
    EscalationState st;
    WallTime now = kDue;
    Fold f;
    std::vector<std::string> stream;
    std::vector<DeviceEvent> events;
    for (int i = 0; i < 200; ++i) {
      DeviceEvent ev;
      const int k = pick(rng);
      if (k < 2) {
        ev = due_event(now);
      } else if (k < 4) {
        ev = event::LidOpened{CompartmentId(box(rng))};
      } else if (k < 5) {
        ev = event::LidClosed{CompartmentId(box(rng))};
      } else if (k < 9) {
        if (st.active) now = st.active->stage_deadline;
        ev = event::StageTimerFired{};
      } else {
        ev = event::TimeSet{now, now};
      }
      events.push_back(ev);
      const Stage before = st.stage;
      auto r = step(st, ev, kPolicy, now);
      for (const auto& a : r.actions) {
        stream.push_back(describe(a));
        if (std::holds_alternative<action::BuzzerOn>(a)) {
          f.buzzer = true;
          if (r.state.stage != Stage::kRing1 && r.state.stage != Stage::kRing2) f.buzzer_on_outside_ring = true;
        }
        if (std::holds_alternative<action::BuzzerOff>(a)) f.buzzer = false;
        if (const auto* s = std::get_if<action::SendSms>(&a)) {
          if (s->body.size() > kMaxSmsLength) f.overlong_body = true;
          if (s->recipient == Recipient::kPatient) ++f.patient_sms;
          if (s->recipient == Recipient::kFamily) {
            if (f.patient_sms == 0) f.family_before_patient = true;
            ++f.family_sms;
          }
        }
        if (const auto* l = std::get_if<action::Log>(&a)) {
          if (is_terminal_outcome(l->record.kind)) ++f.terminals;
        }
      }
      if (before != Stage::kIdle && r.state.stage == Stage::kIdle) {
        CHECK(f.terminals == 1);
        CHECK(f.patient_sms <= 1);
        CHECK(f.family_sms <= 1);
        CHECK_FALSE(f.family_before_patient);
        CHECK_FALSE(f.buzzer_on_outside_ring);
        CHECK_FALSE(f.buzzer_on_in_idle);
        CHECK_FALSE(f.overlong_body);
        f = Fold{f.buzzer};
      }
      st = r.state;
      REQUIRE(st.well_formed());
      if (st.stage == Stage::kIdle && f.buzzer) f.buzzer_on_in_idle = true;
    }
    CHECK_FALSE(f.family_before_patient);
    CHECK_FALSE(f.buzzer_on_outside_ring);
    CHECK_FALSE(f.buzzer_on_in_idle);
    CHECK_FALSE(f.overlong_body);

    // Same events from IDLE give the same action stream.
    EscalationState again;
    WallTime t = kDue;
    std::vector<std::string> replay;
    for (const auto& ev : events) {
      if (std::holds_alternative<event::StageTimerFired>(ev) && again.active) t = again.active->stage_deadline;
      auto r = step(again, ev, kPolicy, std::holds_alternative<event::DoseDue>(ev)
                                            ? std::get<event::DoseDue>(ev).instance.due_at
                                            : t);
      for (const auto& a : r.actions) replay.push_back(describe(a));
      again = r.state;
    }
    CHECK(replay == stream);
  }
}

TEST_CASE("terminal outcome kinds") {
  CHECK(is_terminal_outcome(LogKind::kTaken));
  CHECK(is_terminal_outcome(LogKind::kMissed));
  CHECK_FALSE(is_terminal_outcome(LogKind::kSnoozeStart));
  CHECK_FALSE(is_terminal_outcome(LogKind::kDoseDropped));
}

TEST_CASE("stage names round trip") {
  for (auto s : kAllStages) CHECK(parse_stage(to_string(s)) == s);
  CHECK(parse_stage("ring1") == Stage::kRing1);
  CHECK_FALSE(parse_stage("RING3"));
}
