#include "pillbox/bridge_protocol.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "pillbox/error.hpp"

namespace pillbox {

using Json = nlohmann::ordered_json;

namespace {

std::optional<CompartmentId> box_field(const Json& j, std::string& error) {
  if (!j.contains("box") || !j["box"].is_number_integer()) {
    error = "`box` must be an integer";
    return std::nullopt;
  }
  auto box = CompartmentId::from_index(j["box"].get<int>());
  if (!box) error = "compartment out of range";
  return box;
}

}  // namespace

CommandParse parse_command(std::string_view text) {
  CommandParse out;
  const Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    out.error = "message is not a JSON object";
    return out;
  }
  if (j.contains("v") && j["v"] != kBridgeSchemaVersion) {
    out.error = "unsupported schema version";
    return out;
  }
  if (!j.contains("cmd") || !j["cmd"].is_string()) {
    out.error = "`cmd` missing";
    return out;
  }
  const auto name = j["cmd"].get<std::string>();
  if (name == "open_lid" || name == "close_lid") {
    if (auto box = box_field(j, out.error)) {
      if (name == "open_lid") {
        out.command = cmd::OpenLid{*box};
      } else {
        out.command = cmd::CloseLid{*box};
      }
    }
  } else if (name == "advance") {
    if (!j.contains("seconds") || !j["seconds"].is_number_integer() || j["seconds"].get<std::int64_t>() < 0 ||
        j["seconds"].get<std::int64_t>() > 366 * kSecondsPerDay) {
      out.error = "`seconds` must be an integer in 0..31622400";
    } else {
      out.command = cmd::Advance{Seconds(j["seconds"].get<std::int64_t>())};
    }
  } else if (name == "set_speed") {
    if (!j.contains("factor") || !j["factor"].is_number() || !std::isfinite(j["factor"].get<double>()) ||
        j["factor"].get<double>() < 0 || j["factor"].get<double>() > kMaxSpeed) {
      out.error = "`factor` must be a number in 0..3600";
    } else {
      out.command = cmd::SetSpeed{j["factor"].get<double>()};
    }
  } else if (name == "set_time") {
    std::optional<WallTime> t;
    if (j.contains("time") && j["time"].is_string()) t = WallTime::parse_iso(j["time"].get<std::string>());
    if (!t) {
      out.error = "`time` must be YYYY-MM-DDTHH:MM:SS";
    } else {
      out.command = cmd::SetTime{*t};
    }
  } else {
    out.error = "unknown cmd `" + name + "`";
  }
  return out;
}

std::string snapshot_json(const Device& device, std::uint64_t seq) {
  Json j;
  j["v"] = kBridgeSchemaVersion;
  j["type"] = "snapshot";
  j["seq"] = seq;
  j["time"] = device.now().iso();
  j["state"] = to_string(device.state().stage);
  j["lcd"] = device.lcd().rows;
  Json leds = Json::array();
  for (auto led : device.indicators().leds) leds.push_back(led == LedState::kBlinking);
  j["leds"] = leds;
  j["buzzer"] = device.indicators().buzzer_on;

  const auto records = device.log().records();
  const auto first = records.size() > kRecentLogSize ? records.size() - kRecentLogSize : 0;
  Json recent = Json::array();
  for (auto i = first; i < records.size(); ++i) recent.push_back(Json::parse(to_json_line(records[i])));
  j["recent_log"] = recent;

  int patient = 0;
  int family = 0;
  const auto& policy = device.config().policy;
  for (const auto& m : device.modem().sent_box()) {
    if (m.recipient_number == policy.patient_number) ++patient;
    if (m.recipient_number == policy.family_number) ++family;
  }
  j["sms_sentbox"] = {{"PATIENT", patient}, {"FAMILY", family}};
  return j.dump();
}

std::string error_json(std::string_view message) {
  Json j;
  j["v"] = kBridgeSchemaVersion;
  j["type"] = "error";
  j["message"] = message;
  return j.dump();
}

BridgeSession::BridgeSession(std::unique_ptr<Device> device, double speed)
    : device_(std::move(device)), speed_(speed) {
  if (!device_) throw Error(ErrorCode::kPrecondition, "bridge session needs a device");
  if (!(speed >= 0 && speed <= kMaxSpeed)) throw Error(ErrorCode::kPrecondition, "speed must be in 0..3600");
}

std::optional<std::string> BridgeSession::handle(std::string_view message) {
  auto parsed = parse_command(message);
  if (!parsed.command) return parsed.error;
  try {
    apply(*parsed.command);
  } catch (const Error& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

void BridgeSession::apply(const BridgeCommand& command) {
  std::visit(
      [this](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cmd::OpenLid>) {
          device_->set_lid(c.box, true);
        } else if constexpr (std::is_same_v<T, cmd::CloseLid>) {
          device_->set_lid(c.box, false);
        } else if constexpr (std::is_same_v<T, cmd::Advance>) {
          device_->advance(c.seconds);
        } else if constexpr (std::is_same_v<T, cmd::SetSpeed>) {
          speed_ = c.factor;
          carry_ = 0.0;
        } else {
          device_->set_time(c.time);
          carry_ = 0.0;
        }
      },
      command);
}

void BridgeSession::tick(std::chrono::nanoseconds real_elapsed) {
  carry_ += speed_ * std::chrono::duration<double>(real_elapsed).count();
  const auto whole = static_cast<std::int64_t>(std::floor(carry_));
  if (whole <= 0) return;
  carry_ -= static_cast<double>(whole);
  device_->advance(Seconds(whole));
}

std::string BridgeSession::next_snapshot() { return snapshot_json(*device_, ++seq_); }

}  // namespace pillbox
