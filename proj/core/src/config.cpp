#include "pillbox/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace pillbox {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return std::string(v.substr(1, v.size() - 2));
  return std::string(v);
}

// A `#` inside a quoted value is part of the value.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

struct PartialSlot {
  std::optional<TimeOfDay> time;
  std::optional<int> box;
  std::optional<std::string> pill;
  int count = 1;
  int first_line = 0;
  bool field_error = false;
};

}  // namespace

std::optional<std::string> apply_policy_setting(EscalationPolicy& p, std::string_view field,
                                                std::string_view raw_value) {
  const auto value = trim(raw_value);
  auto seconds = [&](Seconds& out) -> std::optional<std::string> {
    auto v = parse_int(value);
    if (!v || *v < 1 || *v > 86400) return "expects seconds in 1..86400";
    out = Seconds(*v);
    return std::nullopt;
  };
  if (field == "ring_s") return seconds(p.ring);
  if (field == "snooze_s") return seconds(p.snooze);
  if (field == "wait_patient_s") return seconds(p.wait_patient);
  if (field == "wait_family_s") return seconds(p.wait_family);
  if (field == "sms_retries") {
    auto v = parse_int(value);
    if (!v || *v < 0 || *v > 100) return "expects an integer in 0..100";
    p.sms_retries = static_cast<int>(*v);
    return std::nullopt;
  }
  if (field == "patient_number" || field == "family_number") {
    auto number = unquote(value);
    if (!is_e164(number)) return "is not an E.164 number";
    (field == "patient_number" ? p.patient_number : p.family_number) = std::move(number);
    return std::nullopt;
  }
  if (field == "patient_name") {
    auto name = unquote(value);
    if (name.empty() || name.size() > kMaxPatientNameLength || !is_printable_ascii(name)) {
      return "must be 1..24 printable characters";
    }
    p.patient_name = std::move(name);
    return std::nullopt;
  }
  return "is not a policy key";
}

ConfigParse parse_config(std::string_view text) {
  ConfigParse result;
  DeviceConfig cfg;
  std::map<SlotId, PartialSlot> partial;
  std::map<std::string, int> seen_keys;

  auto error = [&](int line, std::string msg) { result.errors.push_back({line, std::move(msg)}); };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      error(line_no, "expected `key = value`");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (auto [it, inserted] = seen_keys.emplace(key, line_no); !inserted) {
      error(line_no, "duplicate key `" + key + "` (first on line " + std::to_string(it->second) + ")");
      continue;
    }

    auto int_value = [&](long long lo, long long hi) -> std::optional<long long> {
      auto v = parse_int(value);
      if (!v || *v < lo || *v > hi) {
        error(line_no, "`" + key + "` expects an integer in " + std::to_string(lo) + ".." +
                           std::to_string(hi));
        return std::nullopt;
      }
      return v;
    };

    if (key.rfind("slot.", 0) == 0) {
      const auto dot = key.find('.', 5);
      const auto slot = dot == std::string::npos ? std::nullopt : parse_slot(key.substr(5, dot - 5));
      if (!slot) {
        error(line_no, "unknown key `" + key + "`");
        continue;
      }
      auto& ps = partial[*slot];
      if (ps.first_line == 0) ps.first_line = line_no;
      const auto errors_before = result.errors.size();
      const auto field = key.substr(dot + 1);
      if (field == "time") {
        ps.time = TimeOfDay::parse(value);
        if (!ps.time) error(line_no, "`" + key + "` expects HH:MM");
      } else if (field == "box") {
        if (auto v = int_value(1, kCompartmentCount)) ps.box = static_cast<int>(*v);
      } else if (field == "pill") {
        ps.pill = unquote(value);
      } else if (field == "count") {
        if (auto v = int_value(-999999, 999999)) ps.count = static_cast<int>(*v);
      } else {
        error(line_no, "unknown key `" + key + "`");
      }
      if (result.errors.size() != errors_before) ps.field_error = true;
    } else if (key.rfind("policy.", 0) == 0) {
      if (auto problem = apply_policy_setting(cfg.policy, key.substr(7), value)) {
        error(line_no, "`" + key + "` " + *problem);
      }
    } else if (key == "device.start_time") {
      cfg.start_time = WallTime::parse_iso(value);
      if (!cfg.start_time) error(line_no, "`device.start_time` expects YYYY-MM-DDTHH:MM:SS");
    } else {
      error(line_no, "unknown key `" + key + "`");
    }
  }

  for (const auto& [slot, ps] : partial) {
    if (!ps.time || !ps.box || !ps.pill) {
      // A malformed field was already reported on its own line.
      if (!ps.field_error) {
        error(ps.first_line, "slot " + std::string(to_string(slot)) + " needs time, box and pill");
      }
      continue;
    }
    cfg.schedule.slots.push_back(DoseSlot{slot, *ps.time, CompartmentId(*ps.box), *ps.pill, ps.count});
  }

  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

ConfigParse load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigParse r;
    r.errors.push_back({0, "cannot open " + path.string()});
    return r;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const DeviceConfig& cfg) {
  std::ostringstream out;
  for (const auto& s : cfg.schedule.slots) {
    const std::string prefix = "slot." + std::string(to_string(s.slot)) + ".";
    out << prefix << "time = " << s.time.str() << '\n'
        << prefix << "box = " << s.compartment.index() << '\n'
        << prefix << "pill = \"" << s.pill_name << "\"\n"
        << prefix << "count = " << s.pill_count << '\n';
  }
  const auto& p = cfg.policy;
  out << "policy.ring_s = " << p.ring.count() << '\n'
      << "policy.snooze_s = " << p.snooze.count() << '\n'
      << "policy.wait_patient_s = " << p.wait_patient.count() << '\n'
      << "policy.wait_family_s = " << p.wait_family.count() << '\n'
      << "policy.sms_retries = " << p.sms_retries << '\n'
      << "policy.patient_number = " << p.patient_number << '\n'
      << "policy.family_number = " << p.family_number << '\n'
      << "policy.patient_name = \"" << p.patient_name << "\"\n";
  if (cfg.start_time) out << "device.start_time = " << cfg.start_time->iso() << '\n';
  return out.str();
}

}  // namespace pillbox
