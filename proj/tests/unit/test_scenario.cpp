#include <doctest.h>

#include <fstream>
#include <sstream>

#include "pillbox/error.hpp"
#include "pillbox/scenario.hpp"
#include "temp_dir.hpp"

using namespace pillbox;
using testing_support::TempDir;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scenario_dir() { return std::filesystem::path(PILLBOX_TEST_DATA) / "scenarios"; }

Scenario parse_ok(std::string_view text) {
  auto p = parse_scenario(text);
  for (const auto& e : p.errors) MESSAGE(e.line << ":" << e.column << ": " << e.message);
  REQUIRE(p.ok());
  return *p.scenario;
}

const char* kHappy =
    "set-time 2017-03-01T07:55:00\n"
    "schedule MORNING 08:00 1 \"PARACETAMOL\" 2\n"
    "advance 5m\n"
    "expect-state RING1\n"
    "advance 30s\n"
    "open 1\n"
    "advance 1s\n"
    "expect-log TAKEN at=08:00:31\n";

}  // namespace

TEST_CASE("three step scenario parses") {
  const auto s = parse_ok("set-time 2017-03-01T07:55:00\nschedule MORNING 08:00 1 \"PARACETAMOL\" 2\nadvance 5m");
  REQUIRE(s.steps.size() == 3);
  CHECK(std::get<op::SetTime>(s.steps[0].command).time == *WallTime::parse_iso("2017-03-01T07:55:00"));
  const auto& sched = std::get<op::Schedule>(s.steps[1].command);
  CHECK(sched.slot.pill_name == "PARACETAMOL");
  CHECK(sched.slot.pill_count == 2);
  CHECK(std::get<op::Advance>(s.steps[2].command).duration == Seconds{300});
  CHECK(s.steps[2].line == 3);
}

TEST_CASE("advance before set-time is rejected") {
  const auto p = parse_scenario("advance 5m\n");
  REQUIRE(p.errors.size() == 1);
  CHECK(p.errors[0].line == 1);
  CHECK(p.errors[0].message == "time not set");
}

TEST_CASE("compartment out of range") {
  const auto p = parse_scenario("set-time 2017-03-01T07:55:00\nopen 4\n");
  REQUIRE(p.errors.size() == 1);
  CHECK(p.errors[0].line == 2);
  CHECK(p.errors[0].column == 6);
  CHECK(p.errors[0].message == "compartment out of range");
}

TEST_CASE("parse errors are collected with positions") {
  const auto p = parse_scenario(
      "set-time 2017-03-01T07:55:00\n"
      "schedule LUNCH 08:00 1 \"X\"\n"
      "advance 5 minutes\n"
      "advance 5x\n"
      "expect-log TAKEN bogus=1\n"
      "expect-state DANCING\n"
      "frobnicate\n"
      "schedule MORNING 08:00 1 \"unterminated\n"
      "policy ring_s 0\n");
  CHECK_FALSE(p.scenario);
  REQUIRE(p.errors.size() == 8);
  for (std::size_t i = 0; i < p.errors.size(); ++i) CHECK(p.errors[i].line == static_cast<int>(i) + 2);
}

TEST_CASE("schedule invariants are checked as the script builds the schedule") {
  const auto p = parse_scenario(
      "set-time 2017-03-01T07:55:00\n"
      "schedule MORNING 08:00 1 \"A\"\n"
      "schedule NOON 13:00 1 \"B\"\n");
  REQUIRE(p.errors.size() == 1);
  CHECK(p.errors[0].line == 3);
  CHECK(p.errors[0].message.rfind("DUPLICATE_COMPARTMENT", 0) == 0);
}

TEST_CASE("keywords are case-insensitive and comments are ignored") {
  const auto s = parse_ok("SET-TIME 2017-03-01T07:55:00  # start\n\n  Advance 2H\nexpect-state ring1\n");
  CHECK(s.steps.size() == 3);
  CHECK(std::get<op::Advance>(s.steps[1].command).duration == Seconds{7200});
}

TEST_CASE("durations") {
  CHECK(parse_duration("0s") == Seconds{0});
  CHECK(parse_duration("90s") == Seconds{90});
  CHECK(parse_duration("5m") == Seconds{300});
  CHECK(parse_duration("1h") == Seconds{3600});
  CHECK_FALSE(parse_duration("-1s"));
  CHECK_FALSE(parse_duration("s"));
  CHECK_FALSE(parse_duration("5"));
  CHECK_FALSE(parse_duration("5d"));
}

TEST_CASE("happy path run passes with no sms") {
  TempDir dir;
  const auto report = run_scenario(parse_ok(kHappy), dir.path());
  CHECK(report.passed);
  const auto log = read_file(dir / std::string(kLogFileName));
  CHECK(log.find("\"TAKEN\"") != std::string::npos);
  CHECK(log.find("SMS_") == std::string::npos);
  CHECK(read_file(dir / std::string(kTranscriptFileName)).empty());
}

TEST_CASE("a failed expectation names its line") {
  TempDir dir;
  const auto report = run_scenario(parse_ok("set-time 2017-03-01T07:55:00\n"
                                            "schedule MORNING 08:00 1 \"P\"\n"
                                            "advance 5m\n"
                                            "expect-state SNOOZED\n"
                                            "expect-log MISSED\n"),
                                   dir.path());
  CHECK_FALSE(report.passed);
  REQUIRE(report.failed_expectations.size() == 2);
  CHECK(report.failed_expectations[0].line == 4);
  CHECK(report.failed_expectations[1].line == 5);
}

TEST_CASE("expect-log reads forward from the last match") {
  TempDir dir;
  const auto ok = run_scenario(parse_ok("set-time 2017-03-01T07:55:00\n"
                                        "schedule MORNING 08:00 1 \"P\"\n"
                                        "advance 12m\n"
                                        "expect-log RING_START at=08:00:00\n"
                                        "expect-log RING_START at=08:06:00\n"),
                               dir.path());
  CHECK(ok.passed);
  const auto backwards = run_scenario(parse_ok("set-time 2017-03-01T07:55:00\n"
                                               "schedule MORNING 08:00 1 \"P\"\n"
                                               "advance 10m\n"
                                               "expect-log SNOOZE_START\n"
                                               "expect-log DOSE_DUE\n"),
                                      dir.path());
  CHECK_FALSE(backwards.passed);
}

TEST_CASE("policy and modem fault steps apply") {
  TempDir dir;
  const auto r = run_scenario(parse_ok("policy ring_s 10\n"
                                       "set-time 2017-03-01T07:55:00\n"
                                       "schedule MORNING 08:00 1 \"P\"\n"
                                       "advance 5m\n"
                                       "expect-log RING_START at=08:00:00\n"
                                       "advance 10s\n"
                                       "expect-log SNOOZE_START at=08:00:10\n"),
                              dir.path());
  CHECK(r.passed);
}

TEST_CASE("expect-state right after the due time") {
  TempDir dir;
  const auto r = run_scenario(parse_ok("set-time 2017-03-01T07:59:59\n"
                                       "schedule MORNING 08:00 1 \"P\"\n"
                                       "advance 1s\n"
                                       "expect-state RING1\n"),
                              dir.path());
  CHECK(r.passed);
}

TEST_CASE("no-interaction run sends both messages and misses") {
  TempDir dir;
  const auto r = run_scenario(parse_ok("set-time 2017-03-01T07:55:00\n"
                                       "schedule MORNING 08:00 1 \"PARACETAMOL\" 2\n"
                                       "advance 30m\n"
                                       "expect-log SMS_SENT recipient=PATIENT at=08:07:00\n"
                                       "expect-log SMS_SENT recipient=FAMILY at=08:12:00\n"
                                       "expect-log MISSED at=08:17:00\n"),
                              dir.path());
  CHECK(r.passed);
}

TEST_CASE("every bundled scenario is reproducible") {
  for (const auto& entry : std::filesystem::directory_iterator(scenario_dir())) {
    if (entry.path().extension() != ".scn") continue;
    CAPTURE(entry.path().filename().string());
    const auto scn = parse_ok(read_file(entry.path()));
    TempDir a;
    TempDir b;
    run_scenario(scn, a.path());
    run_scenario(scn, b.path());
    for (auto name : {kLogFileName, kTranscriptFileName}) {
      CHECK(read_file(a / std::string(name)) == read_file(b / std::string(name)));
    }
    CHECK(replay_check(scn, a.path()).identical);
  }
}

TEST_CASE("replay matches the stored reference") {
  const auto scn = parse_ok(read_file(scenario_dir() / "full_escalation.scn"));
  const auto r = replay_check(scn, std::filesystem::path(PILLBOX_TEST_DATA) / "golden" / "full_escalation");
  CHECK(r.identical);
}

TEST_CASE("replay reports the first diverging line") {
  const auto scn = parse_ok(read_file(scenario_dir() / "full_escalation.scn"));
  TempDir ref;
  run_scenario(scn, ref.path());
  auto log = read_file(ref / std::string(kLogFileName));
  int line = 1;
  std::size_t pos = 0;
  for (; line < 6; ++line) pos = log.find('\n', pos) + 1;
  const auto digit = log.find("08:", pos) + 4;
  log[digit] = log[digit] == '9' ? '8' : '9';
  {
    std::ofstream out(ref / std::string(kLogFileName), std::ios::binary | std::ios::trunc);
    out << log;
  }
  const auto r = replay_check(scn, ref.path());
  CHECK_FALSE(r.identical);
  CHECK(r.file == kLogFileName);
  CHECK(r.line == 6);
  CHECK(r.expected != r.actual);
}

TEST_CASE("replay against a missing reference") {
  const auto scn = parse_ok(kHappy);
  TempDir empty;
  CHECK_FALSE(replay_check(scn, empty.path()).identical);
}

TEST_CASE("unwritable output directory is a storage failure") {
  CHECK_THROWS_AS(run_scenario(parse_ok(kHappy), "/proc/pillbox-cannot-exist"), Error);
}
