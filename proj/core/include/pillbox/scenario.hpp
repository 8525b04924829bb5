#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pillbox/config.hpp"
#include "pillbox/escalation.hpp"
#include "pillbox/gsm.hpp"

namespace pillbox {

namespace op {
struct SetTime {
  WallTime time;
};
struct Schedule {
  DoseSlot slot;
};
struct Policy {
  std::string key;
  std::string value;
};
struct Open {
  CompartmentId box;
};
struct Close {
  CompartmentId box;
};
struct Advance {
  Seconds duration;
};
struct ModemFault {
  ModemFaultPlan plan;
};
struct ExpectLog {
  LogKind kind;
  std::vector<std::pair<std::string, std::string>> fields;
};
struct ExpectState {
  Stage stage;
};
}  // namespace op

using StepOp = std::variant<op::SetTime, op::Schedule, op::Policy, op::Open, op::Close, op::Advance,
                            op::ModemFault, op::ExpectLog, op::ExpectState>;

struct ScenarioStep {
  int line = 0;
  StepOp command;
};

struct Scenario {
  std::vector<ScenarioStep> steps;
};

struct ScenarioError {
  int line = 0;
  int column = 0;
  std::string message;
};

struct ScenarioParse {
  std::optional<Scenario> scenario;
  std::vector<ScenarioError> errors;

  bool ok() const { return errors.empty(); }
};

// Line-oriented script, one step per line; `#` comments, case-insensitive
// keywords:
//
//   set-time 2017-03-01T07:55:00
//   schedule MORNING 08:00 1 "PARACETAMOL" 2
//   policy ring_s 60
//   modem-fault ERROR_THEN_OK 1
//   advance 5m
//   open 1
//   close 1
//   expect-log TAKEN slot=MORNING at=08:00:31
//   expect-state IDLE
ScenarioParse parse_scenario(std::string_view text);

// `<n>s`, `<n>m` or `<n>h`.
std::optional<Seconds> parse_duration(std::string_view text);

struct FailedExpectation {
  int line = 0;
  std::string message;
};

struct RunReport {
  bool passed = true;
  std::vector<FailedExpectation> failed_expectations;
  std::filesystem::path log_path;
  std::filesystem::path transcript_path;
  std::size_t records = 0;
};

inline constexpr std::string_view kLogFileName = "adherence.jsonl";
inline constexpr std::string_view kTranscriptFileName = "modem.transcript";

// Runs against a fresh device in virtual time, writing the adherence log
// and the modem transcript into out_dir. Throws Error(kStorageFailure) when
// the outputs cannot be written.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

struct ReplayResult {
  bool identical = true;
  std::string file;  // which output diverged
  std::size_t line = 0;
  std::string expected;
  std::string actual;
};

// Re-runs the scenario and compares its outputs with those in reference_dir.
ReplayResult replay_check(const Scenario& scenario, const std::filesystem::path& reference_dir);

// First differing line between two files (1-based); nullopt when identical.
std::optional<ReplayResult> compare_files(const std::filesystem::path& expected,
                                          const std::filesystem::path& actual);

}  // namespace pillbox
