#include "pillbox/log_record.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace pillbox {

namespace {

constexpr std::array<std::string_view, kLogKindCount> kKindNames{
    "DOSE_DUE",  "RING_START", "SNOOZE_START",     "SMS_REQUESTED",     "SMS_SENT",
    "SMS_FAILED", "TAKEN",      "MISSED",           "LID_OPEN",          "LID_CLOSE",
    "UNSCHEDULED_OPEN", "WRONG_COMPARTMENT", "DOSE_DROPPED", "TIME_SET",
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

}  // namespace

std::string_view to_string(LogKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<LogKind> parse_log_kind(std::string_view text) {
  const auto u = upper(text);
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == u) return static_cast<LogKind>(i);
  }
  return std::nullopt;
}

bool is_terminal_outcome(LogKind kind) { return kind == LogKind::kTaken || kind == LogKind::kMissed; }

std::string_view to_string(Recipient r) { return r == Recipient::kPatient ? "PATIENT" : "FAMILY"; }

std::optional<Recipient> parse_recipient(std::string_view text) {
  const auto u = upper(text);
  if (u == "PATIENT") return Recipient::kPatient;
  if (u == "FAMILY") return Recipient::kFamily;
  return std::nullopt;
}

std::string_view to_string(SmsFailure f) { return f == SmsFailure::kModemError ? "MODEM_ERROR" : "TIMEOUT"; }

std::optional<std::string_view> missing_required_field(const LogRecord& r) {
  const bool slot = r.slot.has_value();
  const bool box = r.compartment.has_value();
  switch (r.kind) {
    case LogKind::kDoseDue:
      if (!slot) return "slot";
      if (!box) return "compartment";
      if (!r.due) return "due";
      return std::nullopt;
    case LogKind::kRingStart:
    case LogKind::kSnoozeStart:
    case LogKind::kTaken:
    case LogKind::kMissed:
    case LogKind::kWrongCompartment:
    case LogKind::kDoseDropped:
      if (!slot) return "slot";
      if (!box) return "compartment";
      return std::nullopt;
    case LogKind::kSmsRequested:
      if (!slot) return "slot";
      if (!r.recipient) return "recipient";
      return std::nullopt;
    case LogKind::kSmsSent:
      if (!r.recipient) return "recipient";
      if (!r.sms_ref) return "sms_ref";
      if (!r.attempt) return "attempt";
      return std::nullopt;
    case LogKind::kSmsFailed:
      if (!r.recipient) return "recipient";
      if (!r.reason) return "reason";
      if (!r.attempt) return "attempt";
      if (!r.final_attempt) return "final";
      return std::nullopt;
    case LogKind::kLidOpen:
    case LogKind::kLidClose:
    case LogKind::kUnscheduledOpen:
      if (!box) return "compartment";
      return std::nullopt;
    case LogKind::kTimeSet:
      if (!r.old_time) return "old";
      if (!r.new_time) return "new";
      return std::nullopt;
  }
  return std::nullopt;
}

bool resets_time_baseline(const LogRecord& rec) {
  return rec.kind == LogKind::kTimeSet && rec.new_time && rec.old_time && *rec.new_time == rec.at;
}

}  // namespace pillbox
