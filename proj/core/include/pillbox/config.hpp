#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pillbox/domain.hpp"

namespace pillbox {

struct DeviceConfig {
  Schedule schedule;
  EscalationPolicy policy;
  std::optional<WallTime> start_time;

  bool operator==(const DeviceConfig&) const = default;
};

struct ConfigError {
  int line = 0;
  std::string message;
};

struct ConfigParse {
  std::optional<DeviceConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return errors.empty(); }
};

// Key/value config, one `key = value` per line, `#` comments:
//
//   slot.MORNING.time  = 08:00
//   slot.MORNING.box   = 1
//   slot.MORNING.pill  = "PARACETAMOL"
//   slot.MORNING.count = 2
//   policy.ring_s = 60
//   policy.patient_number = +919876543210
//   device.start_time = 2017-03-01T07:55:00
//
// Syntax and per-field checks only; schedule invariants are left to
// validate_schedule so an invalid schedule still loads for diagnosis.
ConfigParse parse_config(std::string_view text);

// Sets one `policy.<field>` value; returns a problem description on failure.
std::optional<std::string> apply_policy_setting(EscalationPolicy& policy, std::string_view field,
                                                std::string_view value);
ConfigParse load_config(const std::filesystem::path& path);

std::string to_config_text(const DeviceConfig& config);

}  // namespace pillbox
