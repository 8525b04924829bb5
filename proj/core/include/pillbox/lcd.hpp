#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "pillbox/domain.hpp"
#include "pillbox/scheduler.hpp"

namespace pillbox {

enum class Stage : std::uint8_t;

inline constexpr std::size_t kLcdRows = 4;
inline constexpr std::size_t kLcdCols = 16;

// The 16x4 character display contents, rows space-padded to 16.
struct LcdFrame {
  std::array<std::string, kLcdRows> rows;

  bool valid() const;              // 4 rows x 16 printable characters
  std::string text() const;        // rows joined with '\n', trailing '\n'
  bool operator==(const LcdFrame&) const = default;
};

// Left-aligned, space-padded, hard-truncated to 16. Non-printable bytes are
// shown as '?'.
std::string fit16(std::string_view text);

// TIME HH:MM:SS / NEXT HH:MM <SLOT> / <pill> x<count> / blank
LcdFrame render_idle(WallTime now, const std::optional<NextDue>& next);

// TAKE BOX <k> / <pill> x<count> / RINGING|SNOOZED|SMS SENT / blank.
// Throws Error(kPrecondition) for Stage::kIdle.
LcdFrame render_alarm(const DoseSlot& slot, Stage stage);

}  // namespace pillbox
