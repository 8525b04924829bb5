#include "pillbox/wall_time.hpp"

#include <charconv>
#include <cstdio>

#include "pillbox/error.hpp"

namespace pillbox {

namespace {

namespace chr = std::chrono;

std::int64_t days_from_civil(const CivilDate& d) {
  const chr::year_month_day ymd{chr::year{d.year}, chr::month{static_cast<unsigned>(d.month)},
                                chr::day{static_cast<unsigned>(d.day)}};
  return chr::sys_days{ymd}.time_since_epoch().count();
}

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return ec == std::errc{};
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

WallTime WallTime::from_civil(int year, int month, int day, int hour, int minute, int second) {
  const chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                                chr::day{static_cast<unsigned>(day)}};
  if (month < 1 || month > 12 || day < 1 || day > 31 || !ymd.ok()) {
    throw Error(ErrorCode::kInvalidTime, "invalid calendar date");
  }
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59) {
    throw Error(ErrorCode::kInvalidTime, "invalid time of day");
  }
  return from_date(CivilDate{year, month, day}, hour * 3600 + minute * 60 + second);
}

WallTime WallTime::from_date(const CivilDate& date, int seconds_of_day) {
  return WallTime(days_from_civil(date) * kSecondsPerDay + seconds_of_day);
}

std::optional<WallTime> WallTime::parse_iso(std::string_view text) {
  if (text.size() != 19) return std::nullopt;
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_fixed(text, 0, 4, y) || !parse_fixed(text, 5, 2, mo) || !parse_fixed(text, 8, 2, d) ||
      !parse_fixed(text, 11, 2, h) || !parse_fixed(text, 14, 2, mi) ||
      !parse_fixed(text, 17, 2, s)) {
    return std::nullopt;
  }
  try {
    return from_civil(y, mo, d, h, mi, s);
  } catch (const Error&) {
    return std::nullopt;
  }
}

CivilDate WallTime::date() const {
  const auto days = floor_div(s_, kSecondsPerDay);
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  return CivilDate{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                   static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

int WallTime::seconds_of_day() const {
  return static_cast<int>(s_ - floor_div(s_, kSecondsPerDay) * kSecondsPerDay);
}

std::string WallTime::iso() const {
  const auto d = date();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d", d.year, d.month, d.day, hour(),
                minute(), second());
  return buf;
}

std::string WallTime::hh_mm() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", hour(), minute());
  return buf;
}

std::string WallTime::hh_mm_ss() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", hour(), minute(), second());
  return buf;
}

std::string WallTime::dd_mm_yyyy() const {
  const auto d = date();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d-%02d-%04d", d.day, d.month, d.year);
  return buf;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSchedule: return "INVALID_SCHEDULE";
    case ErrorCode::kInvalidPolicy: return "INVALID_POLICY";
    case ErrorCode::kInvalidRange: return "INVALID_RANGE";
    case ErrorCode::kInvalidTime: return "INVALID_TIME";
    case ErrorCode::kUnknownCompartment: return "UNKNOWN_COMPARTMENT";
    case ErrorCode::kTimeRegression: return "TIME_REGRESSION";
    case ErrorCode::kStorageFailure: return "STORAGE_FAILURE";
    case ErrorCode::kInvalidMessage: return "INVALID_MESSAGE";
    case ErrorCode::kConfig: return "CONFIG";
    case ErrorCode::kPrecondition: return "PRECONDITION";
  }
  return "UNKNOWN";
}

}  // namespace pillbox
