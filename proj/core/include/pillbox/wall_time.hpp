#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace pillbox {

using Seconds = std::chrono::seconds;

struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  auto operator<=>(const CivilDate&) const = default;
};

// Naive local calendar time at one-second resolution, the granularity of the
// device RTC. No timezone, no leap seconds.
class WallTime {
 public:
  constexpr WallTime() = default;

  // Throws Error(kInvalidTime) for an impossible calendar date or time.
  static WallTime from_civil(int year, int month, int day, int hour = 0, int minute = 0,
                             int second = 0);
  static WallTime from_date(const CivilDate& date, int seconds_of_day = 0);
  static constexpr WallTime from_epoch_seconds(std::int64_t s) { return WallTime(s); }

  // Accepts `YYYY-MM-DDTHH:MM:SS` (a space is also accepted as separator).
  static std::optional<WallTime> parse_iso(std::string_view text);

  constexpr std::int64_t epoch_seconds() const { return s_; }
  CivilDate date() const;
  int seconds_of_day() const;
  int hour() const { return seconds_of_day() / 3600; }
  int minute() const { return seconds_of_day() / 60 % 60; }
  int second() const { return seconds_of_day() % 60; }

  WallTime start_of_day() const { return WallTime(s_ - seconds_of_day()); }

  std::string iso() const;       // 2017-03-01T08:00:00
  std::string hh_mm() const;     // 08:00
  std::string hh_mm_ss() const;  // 08:00:00
  std::string dd_mm_yyyy() const;

  constexpr auto operator<=>(const WallTime&) const = default;

  friend constexpr WallTime operator+(WallTime t, Seconds d) { return WallTime(t.s_ + d.count()); }
  friend constexpr WallTime operator-(WallTime t, Seconds d) { return WallTime(t.s_ - d.count()); }
  friend constexpr Seconds operator-(WallTime a, WallTime b) { return Seconds(a.s_ - b.s_); }
  WallTime& operator+=(Seconds d) {
    s_ += d.count();
    return *this;
  }

 private:
  constexpr explicit WallTime(std::int64_t s) : s_(s) {}
  std::int64_t s_ = 0;
};

inline constexpr int kSecondsPerDay = 86400;

}  // namespace pillbox
