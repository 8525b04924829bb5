#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pillbox/domain.hpp"

namespace pillbox {

enum class LogKind : std::uint8_t {
  kDoseDue,
  kRingStart,
  kSnoozeStart,
  kSmsRequested,
  kSmsSent,
  kSmsFailed,
  kTaken,
  kMissed,
  kLidOpen,
  kLidClose,
  kUnscheduledOpen,
  kWrongCompartment,
  kDoseDropped,
  kTimeSet,
};

inline constexpr int kLogKindCount = 14;

std::string_view to_string(LogKind kind);
std::optional<LogKind> parse_log_kind(std::string_view text);  // case-insensitive

bool is_terminal_outcome(LogKind kind);  // TAKEN or MISSED

enum class Recipient : std::uint8_t { kPatient, kFamily };

std::string_view to_string(Recipient r);
std::optional<Recipient> parse_recipient(std::string_view text);

enum class SmsFailure : std::uint8_t { kModemError, kTimeout };

std::string_view to_string(SmsFailure f);

// One adherence/device event. `seq` is assigned by the store on append; the
// optional fields are kind-specific.
struct LogRecord {
  std::uint64_t seq = 0;
  WallTime at;
  LogKind kind = LogKind::kDoseDue;

  std::optional<SlotId> slot;
  std::optional<CompartmentId> compartment;
  std::optional<Recipient> recipient;
  std::optional<WallTime> due;
  std::optional<int> sms_ref;
  std::optional<int> attempt;
  std::optional<SmsFailure> reason;
  std::optional<bool> final_attempt;
  std::optional<WallTime> old_time;
  std::optional<WallTime> new_time;

  bool operator==(const LogRecord&) const = default;
};

// Name of the first required field missing for rec.kind, if any.
std::optional<std::string_view> missing_required_field(const LogRecord& rec);

// True when rec may legitimately carry an earlier timestamp than its
// predecessor: a TIME_SET stamped at its own new_time.
bool resets_time_baseline(const LogRecord& rec);

}  // namespace pillbox
