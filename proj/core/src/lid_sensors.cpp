#include "pillbox/lid_sensors.hpp"

namespace pillbox {

void LidSensors::set_raw(CompartmentId box, bool open) {
  auto& lid = lids_[box.offset()];
  if (lid.raw_open == open) return;
  lid.raw_open = open;
  lid.last_change = timers_->now();
  auto& pending = pending_[box.offset()];
  if (pending) timers_->cancel(*pending);
  pending = timers_->arm(kDebounceWindow, TimerTag{TimerKind::kDebounce, box.index()});
}

std::optional<LidEvent> LidSensors::on_debounce(const Firing& firing) {
  const auto box = CompartmentId::from_index(firing.tag.arg);
  if (!box) return std::nullopt;
  auto& pending = pending_[box->offset()];
  if (pending != firing.id) return std::nullopt;
  pending.reset();
  auto& lid = lids_[box->offset()];
  if (lid.raw_open == lid.debounced_open) return std::nullopt;
  lid.debounced_open = lid.raw_open;
  return LidEvent{*box, lid.debounced_open, firing.at};
}

}  // namespace pillbox
