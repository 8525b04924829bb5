#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pillbox/device.hpp"
#include "pillbox/error.hpp"

using namespace pillbox;

namespace {

WallTime at(int h, int m, int s = 0, int day = 1) { return WallTime::from_civil(2017, 3, day, h, m, s); }

DeviceConfig config(Schedule s = default_schedule(), EscalationPolicy p = {}) {
  return DeviceConfig{std::move(s), std::move(p), std::nullopt};
}

std::vector<std::string> kinds(const Device& d) {
  std::vector<std::string> out;
  for (const auto& r : d.log().records()) out.emplace_back(to_string(r.kind));
  return out;
}

std::size_t count(const Device& d, LogKind k) {
  const auto r = d.log().records();
  return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [&](const LogRecord& x) { return x.kind == k; }));
}

// Stage-change records and their timestamps, ignoring SMS outcome records.
std::vector<std::pair<LogKind, WallTime>> timeline(const Device& d) {
  std::vector<std::pair<LogKind, WallTime>> out;
  for (const auto& r : d.log().records()) {
    if (r.kind != LogKind::kSmsSent && r.kind != LogKind::kSmsFailed) out.emplace_back(r.kind, r.at);
  }
  return out;
}

}  // namespace

TEST_CASE("invalid configs are refused") {
  Schedule bad = default_schedule();
  bad.slots[2].time = TimeOfDay::hm(12, 0);
  CHECK_THROWS_AS(Device(config(bad), at(7, 0)), Error);
  EscalationPolicy p;
  p.patient_number = "123";
  CHECK_THROWS_AS(Device(config(default_schedule(), p), at(7, 0)), Error);
}

TEST_CASE("idle screen always shows the next dose") {
  Device d(config(), at(7, 59));
  CHECK(d.lcd().rows[0] == "TIME 07:59:00   ");
  CHECK(d.lcd().rows[1] == "NEXT 08:00 MORN ");
  d.advance(Seconds{60});
  CHECK(d.lcd().rows[0] == "TAKE BOX 1      ");
  d.set_lid(CompartmentId(1), true);
  d.advance(Seconds{1});
  CHECK(d.state().stage == Stage::kIdle);
  CHECK(d.lcd().rows[1] == "NEXT 13:00 NOON ");
  CHECK(d.upcoming()->seconds_until == at(13, 0) - at(8, 0, 1));
}

TEST_CASE("empty schedule shows no doses") {
  Device d(config(Schedule{}), at(7, 59));
  CHECK(d.lcd().rows[1] == "NO DOSES SET    ");
  d.advance(Seconds{3 * kSecondsPerDay});
  CHECK(d.log().size() == 0);
}

TEST_CASE("indicators follow the alarm") {
  Device d(config(), at(7, 59, 59));
  d.advance(Seconds{1});
  CHECK(d.indicators().buzzer_on);
  CHECK(d.indicators().leds[0] == LedState::kBlinking);
  d.advance(Seconds{60});
  CHECK_FALSE(d.indicators().buzzer_on);
  CHECK(d.indicators().leds[0] == LedState::kBlinking);
  CHECK(d.lcd().rows[2] == "SNOOZED         ");
  d.advance(Seconds{300});
  CHECK(d.indicators().buzzer_on);
  d.advance(Seconds{60});
  CHECK(d.lcd().rows[2] == "SMS SENT        ");
  d.advance(Seconds{600});
  CHECK(d.state().stage == Stage::kIdle);
  CHECK(d.indicators() == IndicatorState{});
  CHECK(d.modem().sent_box().size() == 2);
}

TEST_CASE("a lid left open at the due time needs a fresh open") {
  Device d(config(), at(7, 59));
  d.set_lid(CompartmentId(1), true);
  d.advance(Seconds{2});
  CHECK(count(d, LogKind::kUnscheduledOpen) == 1);
  d.advance_to(at(8, 0, 10));
  CHECK(d.state().stage == Stage::kRing1);
  d.set_lid(CompartmentId(1), false);
  d.advance(Seconds{1});
  d.set_lid(CompartmentId(1), true);
  d.advance(Seconds{1});
  CHECK(d.state().stage == Stage::kIdle);
  CHECK(d.log().records().back().kind == LogKind::kTaken);
  CHECK(d.log().records().back().at == at(8, 0, 12));
}

TEST_CASE("overlapping doses are dropped and logged") {
  Schedule s{{DoseSlot{SlotId::kMorning, TimeOfDay::hm(8, 0), CompartmentId(1), "A", 1},
              DoseSlot{SlotId::kNoon, TimeOfDay::hm(8, 10), CompartmentId(2), "B", 1}}};
  Device d(config(s), at(7, 59));
  d.advance(Seconds{3600});
  CHECK(kinds(d)[0] == "DOSE_DUE");
  CHECK(count(d, LogKind::kDoseDue) == 2);
  CHECK(count(d, LogKind::kDoseDropped) == 1);
  CHECK(count(d, LogKind::kMissed) == 1);
  const auto recs = d.log().records();
  const auto dropped = std::find_if(recs.begin(), recs.end(), [](const LogRecord& r) {
    return r.kind == LogKind::kDoseDropped;
  });
  REQUIRE(dropped != recs.end());
  CHECK(dropped->at == at(8, 10));
  CHECK(dropped->slot == SlotId::kNoon);
  CHECK((dropped - 1)->kind == LogKind::kDoseDue);
}

TEST_CASE("setting the clock forward past a dose skips it") {
  Device d(config(), at(7, 0));
  d.set_time(at(9, 0));
  CHECK(kinds(d) == std::vector<std::string>{"TIME_SET"});
  CHECK(d.state().stage == Stage::kIdle);
  CHECK(d.upcoming()->instance.due_at == at(13, 0));
}

TEST_CASE("setting the clock forward during an alarm runs the stage timers") {
  Device d(config(), at(8, 0));
  d.advance(Seconds{0});
  CHECK(d.state().stage == Stage::kRing1);
  d.set_time(at(8, 3));
  CHECK(d.state().stage == Stage::kSnoozed);
  const auto recs = d.log().records();
  CHECK(recs[recs.size() - 2].kind == LogKind::kSnoozeStart);
  CHECK(recs[recs.size() - 2].at == at(8, 1));
  CHECK(recs.back().kind == LogKind::kTimeSet);
  CHECK(recs.back().at == at(8, 3));
}

TEST_CASE("setting the clock back never rings a dose twice") {
  Device d(config(), at(7, 59));
  d.advance(Seconds{61});
  d.set_lid(CompartmentId(1), true);
  d.advance(Seconds{1});
  d.set_lid(CompartmentId(1), false);
  d.advance(Seconds{1});
  d.set_time(at(7, 0));
  d.advance_to(at(12, 0));
  CHECK(count(d, LogKind::kDoseDue) == 1);
  d.advance_to(at(13, 0));
  CHECK(count(d, LogKind::kDoseDue) == 2);
  CHECK_FALSE(verify_records(d.log().records()));
}

TEST_CASE("set to the current time only logs") {
  Device d(config(), at(7, 0));
  d.set_time(at(7, 0));
  REQUIRE(d.log().size() == 1);
  const auto& r = d.log().records()[0];
  CHECK(r.kind == LogKind::kTimeSet);
  CHECK(r.old_time == r.new_time);
}

TEST_CASE("sms faults do not move the escalation timeline") {
  std::vector<std::vector<std::pair<LogKind, WallTime>>> timelines;
  for (const auto& plan : {ModemFaultPlan::normal(), ModemFaultPlan::silent(), ModemFaultPlan::error_on_cmgs(),
                           ModemFaultPlan::error_then_ok(2)}) {
    Device d(config(), at(7, 55));
    d.set_modem_fault(plan);
    d.advance(Seconds{3600});
    timelines.push_back(timeline(d));
  }
  for (std::size_t i = 1; i < timelines.size(); ++i) CHECK(timelines[i] == timelines[0]);
}

TEST_CASE("policy changes take effect for the next stage") {
  Device d(config(), at(7, 59));
  EscalationPolicy p;
  p.ring = Seconds{5};
  d.set_policy(p);
  d.advance(Seconds{66});
  CHECK(count(d, LogKind::kSnoozeStart) == 1);
  CHECK(d.log().records().back().at == at(8, 0, 5));
}

TEST_CASE("schedule changes re-arm the dose timer") {
  Device d(config(), at(7, 0));
  Schedule s{{DoseSlot{SlotId::kMorning, TimeOfDay::hm(7, 30), CompartmentId(1), "A", 1}}};
  d.set_schedule(s);
  CHECK(d.upcoming()->instance.due_at == at(7, 30));
  d.advance(Seconds{1800});
  CHECK(d.state().stage == Stage::kRing1);
  CHECK(d.clock().audit().balanced());
}

TEST_CASE("random multi-day use keeps the log sound") {
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 10; ++run) {
    const auto s = oracle::random_schedule(rng, 1);
    Device d(config(s), at(0, 0));
    for (int i = 0; i < 3000; ++i) {
      const int box = std::uniform_int_distribution<int>(1, 3)(rng);
      const int r = std::uniform_int_distribution<int>(0, 20)(rng);
      if (r == 0) {
        d.set_time(d.now() + Seconds{std::uniform_int_distribution<int>(-7200, 7200)(rng)});
      } else if (r < 8) {
        d.set_lid(CompartmentId(box), std::uniform_int_distribution<int>(0, 1)(rng) == 1);
      }
      d.advance(Seconds{std::uniform_int_distribution<int>(0, 600)(rng)});
      CHECK(d.state().well_formed());
      if (d.state().stage == Stage::kIdle) CHECK_FALSE(d.indicators().buzzer_on);
    }
    CHECK_FALSE(verify_records(d.log().records()));
    CHECK(d.clock().audit().balanced());
  }
}
