#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "pillbox/device.hpp"

namespace pillbox {

inline constexpr int kBridgeSchemaVersion = 1;
inline constexpr std::size_t kRecentLogSize = 20;

namespace cmd {
struct OpenLid {
  CompartmentId box;
};
struct CloseLid {
  CompartmentId box;
};
struct Advance {
  Seconds seconds;
};
struct SetSpeed {
  double factor = 1.0;
};
struct SetTime {
  WallTime time;
};
}  // namespace cmd

using BridgeCommand = std::variant<cmd::OpenLid, cmd::CloseLid, cmd::Advance, cmd::SetSpeed, cmd::SetTime>;

struct CommandParse {
  std::optional<BridgeCommand> command;
  std::string error;
};

// One JSON object per message, e.g. {"v":1,"cmd":"open_lid","box":1}.
// `v` is optional on input but must equal 1 when present.
CommandParse parse_command(std::string_view text);

// {"v":1,"type":"snapshot","seq":..,"time":..,"state":..,"lcd":[4],
//  "leds":[3],"buzzer":..,"recent_log":[..],"sms_sentbox":{"PATIENT":n,"FAMILY":n}}
std::string snapshot_json(const Device& device, std::uint64_t seq);
std::string error_json(std::string_view message);

inline constexpr double kMaxSpeed = 3600.0;

// Transport-independent bridge state: the device, its pacing, and the
// snapshot counter. Every mutation goes through this object, which the
// server drives from a single thread.
class BridgeSession {
 public:
  explicit BridgeSession(std::unique_ptr<Device> device, double speed = 1.0);

  // Applies one command message. Returns an error message to send back,
  // or nullopt when the command was applied.
  std::optional<std::string> handle(std::string_view message);
  void apply(const BridgeCommand& command);

  // Real time elapsed since the previous tick; advances virtual time by
  // speed * elapsed, carrying fractional seconds over.
  void tick(std::chrono::nanoseconds real_elapsed);

  // Next snapshot; each call takes a fresh sequence number.
  std::string next_snapshot();

  const Device& device() const { return *device_; }
  double speed() const { return speed_; }
  std::uint64_t last_seq() const { return seq_; }

 private:
  std::unique_ptr<Device> device_;
  double speed_;
  double carry_ = 0.0;
  std::uint64_t seq_ = 0;
};

}  // namespace pillbox
