#include "pillbox/lcd.hpp"

#include <algorithm>

#include "pillbox/error.hpp"
#include "pillbox/escalation.hpp"

namespace pillbox {

namespace {

std::string pill_line(const DoseSlot& dose) {
  return dose.pill_name + " x" + std::to_string(dose.pill_count);
}

std::string_view stage_word(Stage stage) {
  switch (stage) {
    case Stage::kRing1:
    case Stage::kRing2:
      return "RINGING";
    case Stage::kSnoozed:
      return "SNOOZED";
    case Stage::kWaitPatient:
    case Stage::kWaitFamily:
      return "SMS SENT";
    case Stage::kIdle:
      break;
  }
  return "";
}

}  // namespace

bool LcdFrame::valid() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const std::string& r) { return r.size() == kLcdCols && is_printable_ascii(r); });
}

std::string LcdFrame::text() const {
  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

std::string fit16(std::string_view text) {
  std::string out(text.substr(0, std::min(text.size(), kLcdCols)));
  for (auto& c : out) {
    if (c < 0x20 || c > 0x7e) c = '?';
  }
  out.resize(kLcdCols, ' ');
  return out;
}

LcdFrame render_idle(WallTime now, const std::optional<NextDue>& next) {
  LcdFrame f;
  f.rows[0] = fit16("TIME " + now.hh_mm_ss());
  if (next) {
    f.rows[1] = fit16("NEXT " + next->instance.due_at.hh_mm() + " " + std::string(slot_code(next->instance.slot)));
    f.rows[2] = fit16(pill_line(next->dose));
  } else {
    f.rows[1] = fit16("NO DOSES SET");
    f.rows[2] = fit16("");
  }
  f.rows[3] = fit16("");
  return f;
}

LcdFrame render_alarm(const DoseSlot& slot, Stage stage) {
  if (stage == Stage::kIdle) throw Error(ErrorCode::kPrecondition, "alarm screen needs an active stage");
  LcdFrame f;
  f.rows[0] = fit16("TAKE BOX " + std::to_string(slot.compartment.index()));
  f.rows[1] = fit16(pill_line(slot));
  f.rows[2] = fit16(stage_word(stage));
  f.rows[3] = fit16("");
  return f;
}

}  // namespace pillbox
