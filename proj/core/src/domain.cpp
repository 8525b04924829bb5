#include "pillbox/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "pillbox/error.hpp"

namespace pillbox {

CompartmentId::CompartmentId(int index) : index_(index) {
  if (index < 1 || index > kCompartmentCount) {
    throw Error(ErrorCode::kUnknownCompartment, "compartment " + std::to_string(index));
  }
}

std::optional<CompartmentId> CompartmentId::from_index(int index) {
  if (index < 1 || index > kCompartmentCount) return std::nullopt;
  return CompartmentId(index, Unchecked{});
}

std::string_view to_string(SlotId slot) {
  switch (slot) {
    case SlotId::kMorning: return "MORNING";
    case SlotId::kNoon: return "NOON";
    case SlotId::kEvening: return "EVENING";
  }
  return "?";
}

std::string_view slot_code(SlotId slot) {
  switch (slot) {
    case SlotId::kMorning: return "MORN";
    case SlotId::kNoon: return "NOON";
    case SlotId::kEvening: return "EVEN";
  }
  return "?";
}

std::optional<SlotId> parse_slot(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto slot : kAllSlots) {
    if (upper == to_string(slot)) return slot;
  }
  return std::nullopt;
}

std::optional<TimeOfDay> TimeOfDay::parse(std::string_view text) {
  if (text.size() != 5 || text[2] != ':') return std::nullopt;
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!digit(text[0]) || !digit(text[1]) || !digit(text[3]) || !digit(text[4])) return std::nullopt;
  const int h = (text[0] - '0') * 10 + (text[1] - '0');
  const int m = (text[3] - '0') * 10 + (text[4] - '0');
  if (h > 23 || m > 59) return std::nullopt;
  return hm(h, m);
}

std::string TimeOfDay::str() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes_ / 60 % 100, minutes_ % 60);
  return buf;
}

const DoseSlot* Schedule::find(SlotId slot) const {
  for (const auto& s : slots) {
    if (s.slot == slot) return &s;
  }
  return nullptr;
}

Schedule default_schedule() {
  return Schedule{{
      {SlotId::kMorning, TimeOfDay::hm(8, 0), CompartmentId(1), "MORNING PILL", 1},
      {SlotId::kNoon, TimeOfDay::hm(13, 0), CompartmentId(2), "NOON PILL", 1},
      {SlotId::kEvening, TimeOfDay::hm(20, 0), CompartmentId(3), "EVENING PILL", 1},
  }};
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kTooManySlots: return "TOO_MANY_SLOTS";
    case ViolationCode::kDuplicateSlot: return "DUPLICATE_SLOT";
    case ViolationCode::kDuplicateCompartment: return "DUPLICATE_COMPARTMENT";
    case ViolationCode::kDuplicateTime: return "DUPLICATE_TIME";
    case ViolationCode::kSlotOrder: return "SLOT_ORDER";
    case ViolationCode::kTimeOutOfRange: return "TIME_OUT_OF_RANGE";
    case ViolationCode::kBadPillName: return "BAD_PILL_NAME";
    case ViolationCode::kBadPillCount: return "BAD_PILL_COUNT";
  }
  return "?";
}

bool is_printable_ascii(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) { return c >= 0x20 && c <= 0x7e; });
}

bool is_e164(std::string_view number) {
  if (number.size() < 9 || number.size() > 16 || number.front() != '+') return false;
  return std::all_of(number.begin() + 1, number.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<Violation> validate_schedule(const Schedule& schedule) {
  std::vector<Violation> out;
  auto add = [&](ViolationCode code, std::optional<SlotId> slot, std::string msg) {
    out.push_back(Violation{code, slot, std::move(msg)});
  };

  if (schedule.slots.size() > kAllSlots.size()) {
    add(ViolationCode::kTooManySlots, std::nullopt,
        std::to_string(schedule.slots.size()) + " slots, at most 3 allowed");
  }

  std::set<SlotId> seen_slots;
  std::set<int> seen_boxes;
  std::set<int> seen_times;
  for (const auto& s : schedule.slots) {
    if (!s.time.valid()) {
      add(ViolationCode::kTimeOutOfRange, s.slot, "time_of_day outside 00:00..23:59");
    }
    if (s.pill_name.empty() || s.pill_name.size() > kMaxPillNameLength ||
        !is_printable_ascii(s.pill_name)) {
      add(ViolationCode::kBadPillName, s.slot, "pill_name must be 1..16 printable characters");
    }
    if (s.pill_count < 1) {
      add(ViolationCode::kBadPillCount, s.slot, "pill_count must be at least 1");
    }
    if (!seen_slots.insert(s.slot).second) {
      add(ViolationCode::kDuplicateSlot, s.slot, "slot defined more than once");
    }
    if (!seen_boxes.insert(s.compartment.index()).second) {
      add(ViolationCode::kDuplicateCompartment, s.slot,
          "compartment " + std::to_string(s.compartment.index()) + " bound twice");
    }
    if (!seen_times.insert(s.time.minutes()).second) {
      add(ViolationCode::kDuplicateTime, s.slot, "time " + s.time.str() + " used twice");
    }
  }

  for (const auto& a : schedule.slots) {
    for (const auto& b : schedule.slots) {
      if (a.slot < b.slot && a.time > b.time) {
        add(ViolationCode::kSlotOrder, b.slot,
            std::string(to_string(b.slot)) + " must come after " + std::string(to_string(a.slot)));
      }
    }
  }
  return out;
}

std::vector<std::string> validate_policy(const EscalationPolicy& p) {
  std::vector<std::string> out;
  if (p.ring <= Seconds::zero()) out.emplace_back("ring_s must be positive");
  if (p.snooze <= Seconds::zero()) out.emplace_back("snooze_s must be positive");
  if (p.wait_patient <= Seconds::zero()) out.emplace_back("wait_patient_s must be positive");
  if (p.wait_family <= Seconds::zero()) out.emplace_back("wait_family_s must be positive");
  if (p.sms_retries < 0) out.emplace_back("sms_retries must be >= 0");
  if (!is_e164(p.patient_number)) out.emplace_back("patient_number is not E.164");
  if (!is_e164(p.family_number)) out.emplace_back("family_number is not E.164");
  if (p.patient_name.empty() || p.patient_name.size() > kMaxPatientNameLength ||
      !is_printable_ascii(p.patient_name)) {
    out.emplace_back("patient_name must be 1..24 printable characters");
  }
  return out;
}

Seconds policy_total_window(const EscalationPolicy& p) {
  return p.ring + p.snooze + p.ring + p.wait_patient + p.wait_family;
}

}  // namespace pillbox
