#pragma once

#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pillbox/escalation.hpp"
#include "pillbox/lcd.hpp"
#include "pillbox/scheduler.hpp"

namespace fixtures {

struct LcdCase {
  std::string golden;  // file under golden/lcd
  std::function<pillbox::LcdFrame()> render;
};

inline pillbox::NextDue next(pillbox::SlotId slot, int h, int m, int box, const char* pill, int count,
                             pillbox::WallTime now) {
  using namespace pillbox;
  const DoseSlot dose{slot, TimeOfDay::hm(h, m), CompartmentId(box), pill, count};
  const auto due = WallTime::from_date(now.date(), dose.time.seconds());
  return NextDue{DoseInstance{now.date(), slot, due}, dose, due - now};
}

inline std::vector<LcdCase> lcd_cases() {
  using namespace pillbox;
  const auto t1 = WallTime::from_civil(2017, 3, 1, 7, 59, 0);
  const auto t2 = WallTime::from_civil(2017, 3, 1, 12, 34, 56);
  const auto t3 = WallTime::from_civil(2017, 3, 1, 13, 0, 1);
  return {
      {"idle_next_morning.txt",
       [=] { return render_idle(t1, next(SlotId::kMorning, 8, 0, 1, "PARACETAMOL", 2, t1)); }},
      {"idle_no_doses.txt", [=] { return render_idle(t2, std::nullopt); }},
      {"idle_next_evening.txt",
       [=] { return render_idle(t3, next(SlotId::kEvening, 20, 0, 3, "ATORVASTATIN 20", 1, t3)); }},
      {"alarm_ring1.txt",
       [] {
         return render_alarm(DoseSlot{SlotId::kMorning, TimeOfDay::hm(8, 0), CompartmentId(1), "PARACETAMOL", 2},
                             Stage::kRing1);
       }},
      {"alarm_wait_patient.txt",
       [] {
         return render_alarm(DoseSlot{SlotId::kNoon, TimeOfDay::hm(13, 0), CompartmentId(2), "METFORMIN", 1},
                             Stage::kWaitPatient);
       }},
      {"alarm_snoozed.txt",
       [] {
         return render_alarm(DoseSlot{SlotId::kEvening, TimeOfDay::hm(20, 0), CompartmentId(3), "VITAMIN D3", 4},
                             Stage::kSnoozed);
       }},
  };
}

// Golden rows are stored between `|` markers so trailing spaces survive.
inline std::optional<pillbox::LcdFrame> load_golden(const std::string& name) {
  std::ifstream in(std::string(PILLBOX_TEST_DATA) + "/golden/lcd/" + name, std::ios::binary);
  if (!in) return std::nullopt;
  pillbox::LcdFrame f;
  std::string line;
  for (auto& row : f.rows) {
    if (!std::getline(in, line) || line.size() < 2 || line.front() != '|' || line.back() != '|') return std::nullopt;
    row = line.substr(1, line.size() - 2);
  }
  return f;
}

}  // namespace fixtures
