#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pillbox/wall_time.hpp"

namespace pillbox {

inline constexpr int kCompartmentCount = 3;
inline constexpr std::size_t kMaxPillNameLength = 16;
inline constexpr std::size_t kMaxPatientNameLength = 24;

// One of the three lidded sub-boxes, numbered 1..3.
class CompartmentId {
 public:
  // Throws Error(kUnknownCompartment) outside 1..3.
  explicit CompartmentId(int index);
  static std::optional<CompartmentId> from_index(int index);

  int index() const { return index_; }
  std::size_t offset() const { return static_cast<std::size_t>(index_ - 1); }

  auto operator<=>(const CompartmentId&) const = default;

 private:
  struct Unchecked {};
  constexpr CompartmentId(int index, Unchecked) : index_(index) {}
  int index_;
};

enum class SlotId : std::uint8_t { kMorning = 0, kNoon = 1, kEvening = 2 };

inline constexpr std::array<SlotId, 3> kAllSlots{SlotId::kMorning, SlotId::kNoon, SlotId::kEvening};

std::string_view to_string(SlotId slot);  // MORNING / NOON / EVENING
std::string_view slot_code(SlotId slot);  // MORN / NOON / EVEN
std::optional<SlotId> parse_slot(std::string_view text);  // case-insensitive

class TimeOfDay {
 public:
  constexpr TimeOfDay() = default;
  constexpr explicit TimeOfDay(int minutes) : minutes_(minutes) {}
  static constexpr TimeOfDay hm(int hour, int minute) { return TimeOfDay(hour * 60 + minute); }
  // Strict `HH:MM`, 00:00..23:59.
  static std::optional<TimeOfDay> parse(std::string_view text);

  constexpr int minutes() const { return minutes_; }
  constexpr int seconds() const { return minutes_ * 60; }
  constexpr bool valid() const { return minutes_ >= 0 && minutes_ < 1440; }
  std::string str() const;

  constexpr auto operator<=>(const TimeOfDay&) const = default;

 private:
  int minutes_ = 0;
};

struct DoseSlot {
  SlotId slot = SlotId::kMorning;
  TimeOfDay time;
  CompartmentId compartment{1};
  std::string pill_name;
  int pill_count = 1;

  bool operator==(const DoseSlot&) const = default;
};

struct Schedule {
  std::vector<DoseSlot> slots;

  const DoseSlot* find(SlotId slot) const;
  bool empty() const { return slots.empty(); }
  bool operator==(const Schedule&) const = default;
};

Schedule default_schedule();  // 08:00 / 13:00 / 20:00 in boxes 1 / 2 / 3

enum class ViolationCode {
  kTooManySlots,
  kDuplicateSlot,
  kDuplicateCompartment,
  kDuplicateTime,
  kSlotOrder,
  kTimeOutOfRange,
  kBadPillName,
  kBadPillCount,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::optional<SlotId> slot;
  std::string message;

  bool operator==(const Violation&) const = default;
};

// Every violated Schedule invariant; empty means the schedule is valid.
std::vector<Violation> validate_schedule(const Schedule& schedule);

bool is_printable_ascii(std::string_view text);
bool is_e164(std::string_view number);  // '+' followed by 8..15 digits

struct EscalationPolicy {
  Seconds ring{60};
  Seconds snooze{300};
  Seconds wait_patient{300};
  Seconds wait_family{300};
  int sms_retries = 2;
  std::string patient_number = "+919876543210";
  std::string family_number = "+919876543211";
  std::string patient_name = "PATIENT";

  bool operator==(const EscalationPolicy&) const = default;
};

// Empty when the policy is usable; otherwise one message per problem.
std::vector<std::string> validate_policy(const EscalationPolicy& policy);

// Time from dose-due to MISSED when nobody touches the box.
Seconds policy_total_window(const EscalationPolicy& policy);

struct DoseInstance {
  CivilDate date;
  SlotId slot = SlotId::kMorning;
  WallTime due_at;

  bool operator==(const DoseInstance&) const = default;
};

}  // namespace pillbox
