#include "pillbox/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "pillbox/device.hpp"
#include "pillbox/error.hpp"

namespace pillbox {

namespace {

struct Token {
  std::string text;
  int column = 0;
  bool quoted = false;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Whitespace-separated words; double quotes group, `#` outside quotes ends
// the line. Returns an error message for an unterminated quote.
std::optional<std::string> tokenize(std::string_view line, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') break;
    Token t;
    t.column = static_cast<int>(i) + 1;
    if (c == '"') {
      const auto close = line.find('"', i + 1);
      if (close == std::string_view::npos) return "unterminated quote";
      t.text = std::string(line.substr(i + 1, close - i - 1));
      t.quoted = true;
      i = close + 1;
    } else {
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') t.text += line[i++];
    }
    out.push_back(std::move(t));
  }
  return std::nullopt;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

const std::vector<std::string> kExpectFields{"slot",    "compartment", "recipient", "due",  "sms_ref",
                                             "attempt", "reason",      "final",     "old",  "new",
                                             "at",      "seq"};

}  // namespace

std::optional<Seconds> parse_duration(std::string_view text) {
  if (text.size() < 2) return std::nullopt;
  const char unit = static_cast<char>(std::tolower(static_cast<unsigned char>(text.back())));
  const auto n = parse_int(text.substr(0, text.size() - 1));
  if (!n || *n < 0 || !std::isdigit(static_cast<unsigned char>(text.front()))) return std::nullopt;
  switch (unit) {
    case 's': return Seconds(*n);
    case 'm': return Seconds(static_cast<std::int64_t>(*n) * 60);
    case 'h': return Seconds(static_cast<std::int64_t>(*n) * 3600);
    default: return std::nullopt;
  }
}

ScenarioParse parse_scenario(std::string_view text) {
  ScenarioParse result;
  Scenario scn;
  Schedule schedule;
  bool time_set = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto error = [&](int column, std::string msg) {
      result.errors.push_back({line_no, column, std::move(msg)});
    };

    std::vector<Token> tok;
    if (auto problem = tokenize(line, tok)) {
      error(1, *problem);
      continue;
    }
    if (tok.empty()) continue;

    const auto keyword = lower(tok[0].text);
    const auto argc = tok.size() - 1;
    auto need = [&](std::size_t lo, std::size_t hi, const char* usage) {
      if (argc < lo || argc > hi) {
        error(tok[0].column, std::string("usage: ") + usage);
        return false;
      }
      return true;
    };
    auto box_arg = [&](const Token& t) -> std::optional<CompartmentId> {
      const auto n = parse_int(t.text);
      if (!n) {
        error(t.column, "compartment must be a number");
        return std::nullopt;
      }
      auto box = CompartmentId::from_index(*n);
      if (!box) error(t.column, "compartment out of range");
      return box;
    };
    auto require_time = [&] {
      if (!time_set) {
        error(tok[0].column, "time not set");
        return false;
      }
      return true;
    };

    if (keyword == "set-time") {
      if (!need(1, 1, "set-time YYYY-MM-DDTHH:MM:SS")) continue;
      const auto t = WallTime::parse_iso(tok[1].text);
      if (!t) {
        error(tok[1].column, "bad timestamp");
        continue;
      }
      time_set = true;
      scn.steps.push_back({line_no, op::SetTime{*t}});
    } else if (keyword == "schedule") {
      if (!need(4, 5, "schedule SLOT HH:MM BOX \"PILL\" [COUNT]")) continue;
      const auto slot = parse_slot(tok[1].text);
      if (!slot) {
        error(tok[1].column, "unknown slot `" + tok[1].text + "`");
        continue;
      }
      const auto tod = TimeOfDay::parse(tok[2].text);
      if (!tod) {
        error(tok[2].column, "time must be HH:MM");
        continue;
      }
      const auto box = box_arg(tok[3]);
      if (!box) continue;
      int count = 1;
      if (argc == 5) {
        const auto n = parse_int(tok[5].text);
        if (!n || *n < 1) {
          error(tok[5].column, "count must be a positive integer");
          continue;
        }
        count = *n;
      }
      DoseSlot dose{*slot, *tod, *box, tok[4].text, count};
      Schedule candidate = schedule;
      std::erase_if(candidate.slots, [&](const DoseSlot& d) { return d.slot == dose.slot; });
      candidate.slots.push_back(dose);
      std::sort(candidate.slots.begin(), candidate.slots.end(),
                [](const DoseSlot& a, const DoseSlot& b) { return a.slot < b.slot; });
      if (auto v = validate_schedule(candidate); !v.empty()) {
        error(tok[1].column, std::string(to_string(v.front().code)) + ": " + v.front().message);
        continue;
      }
      schedule = std::move(candidate);
      scn.steps.push_back({line_no, op::Schedule{std::move(dose)}});
    } else if (keyword == "policy") {
      if (!need(2, 2, "policy KEY VALUE")) continue;
      EscalationPolicy probe;
      if (auto problem = apply_policy_setting(probe, lower(tok[1].text), tok[2].text)) {
        error(tok[1].column, "policy " + tok[1].text + " " + *problem);
        continue;
      }
      scn.steps.push_back({line_no, op::Policy{lower(tok[1].text), tok[2].text}});
    } else if (keyword == "open" || keyword == "close") {
      if (!need(1, 1, "open|close BOX")) continue;
      const auto box = box_arg(tok[1]);
      if (!box || !require_time()) continue;
      if (keyword == "open") {
        scn.steps.push_back({line_no, op::Open{*box}});
      } else {
        scn.steps.push_back({line_no, op::Close{*box}});
      }
    } else if (keyword == "advance") {
      if (!need(1, 1, "advance <n>s|<n>m|<n>h")) continue;
      const auto d = parse_duration(tok[1].text);
      if (!d) {
        error(tok[1].column, "duration must be <n>s, <n>m or <n>h");
        continue;
      }
      if (!require_time()) continue;
      scn.steps.push_back({line_no, op::Advance{*d}});
    } else if (keyword == "modem-fault") {
      if (!need(1, 2, "modem-fault NORMAL|ERROR_ON_CMGS|SILENT|ERROR_THEN_OK N")) continue;
      std::string plan_text = tok[1].text;
      if (argc == 2) plan_text += " " + tok[2].text;
      const auto plan = parse_fault_plan(plan_text);
      if (!plan) {
        error(tok[1].column, "unknown fault plan `" + plan_text + "`");
        continue;
      }
      scn.steps.push_back({line_no, op::ModemFault{*plan}});
    } else if (keyword == "expect-log") {
      if (argc < 1) {
        error(tok[0].column, "usage: expect-log KIND [field=value]...");
        continue;
      }
      const auto kind = parse_log_kind(tok[1].text);
      if (!kind) {
        error(tok[1].column, "unknown record kind `" + tok[1].text + "`");
        continue;
      }
      op::ExpectLog ex{*kind, {}};
      bool bad = false;
      for (std::size_t i = 2; i < tok.size(); ++i) {
        const auto eq = tok[i].text.find('=');
        const auto field = lower(tok[i].text.substr(0, eq == std::string::npos ? 0 : eq));
        if (eq == std::string::npos ||
            std::find(kExpectFields.begin(), kExpectFields.end(), field) == kExpectFields.end()) {
          error(tok[i].column, "expected field=value with a known field");
          bad = true;
          break;
        }
        ex.fields.emplace_back(field, tok[i].text.substr(eq + 1));
      }
      if (!bad) scn.steps.push_back({line_no, std::move(ex)});
    } else if (keyword == "expect-state") {
      if (!need(1, 1, "expect-state STATE")) continue;
      const auto stage = parse_stage(tok[1].text);
      if (!stage) {
        error(tok[1].column, "unknown state `" + tok[1].text + "`");
        continue;
      }
      scn.steps.push_back({line_no, op::ExpectState{*stage}});
    } else {
      error(tok[0].column, "unknown step `" + tok[0].text + "`");
    }
  }

  if (result.errors.empty()) result.scenario = std::move(scn);
  return result;
}

namespace {

bool field_matches(const nlohmann::ordered_json& rec, const std::string& field, const std::string& want) {
  if (!rec.contains(field)) return false;
  const auto& v = rec[field];
  std::string have = v.is_string() ? v.get<std::string>() : v.dump();
  if ((field == "at" || field == "due" || field == "old" || field == "new") && want.size() == 8 &&
      have.size() == 19) {
    have = have.substr(11);
  }
  return lower(have) == lower(want);
}

std::string describe_expectation(const op::ExpectLog& ex) {
  std::string out(to_string(ex.kind));
  for (const auto& [k, v] : ex.fields) out += " " + k + "=" + v;
  return out;
}

class Runner {
 public:
  explicit Runner(const std::filesystem::path& out_dir)
      : log_path_(out_dir / kLogFileName), transcript_path_(out_dir / kTranscriptFileName) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::filesystem::remove(log_path_, ec);
  }

  RunReport run(const Scenario& scn) {
    for (const auto& s : scn.steps) {
      try {
        std::visit([&](const auto& o) { exec(s.line, o); }, s.command);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kStorageFailure) throw;
        fail(s.line, e.what());
        break;
      }
    }
    write_transcript();
    report_.passed = report_.failed_expectations.empty();
    report_.log_path = log_path_;
    report_.transcript_path = transcript_path_;
    report_.records = device_ ? device_->log().size() : 0;
    return report_;
  }

 private:
  void fail(int line, std::string msg) { report_.failed_expectations.push_back({line, std::move(msg)}); }

  void exec(int, const op::SetTime& o) {
    if (!device_) {
      device_ = std::make_unique<Device>(pending_, o.time, AdherenceLog::open(log_path_, Durability::kFlush));
      device_->set_modem_fault(fault_);
    } else {
      device_->set_time(o.time);
    }
  }

  void exec(int, const op::Schedule& o) {
    Schedule s = device_ ? device_->config().schedule : pending_.schedule;
    std::erase_if(s.slots, [&](const DoseSlot& d) { return d.slot == o.slot.slot; });
    s.slots.push_back(o.slot);
    std::sort(s.slots.begin(), s.slots.end(), [](const DoseSlot& a, const DoseSlot& b) { return a.slot < b.slot; });
    if (device_) {
      device_->set_schedule(std::move(s));
    } else {
      pending_.schedule = std::move(s);
    }
  }

  void exec(int line, const op::Policy& o) {
    EscalationPolicy p = device_ ? device_->config().policy : pending_.policy;
    if (auto problem = apply_policy_setting(p, o.key, o.value)) {
      fail(line, "policy " + o.key + " " + *problem);
      return;
    }
    if (device_) {
      device_->set_policy(std::move(p));
    } else {
      pending_.policy = std::move(p);
    }
  }

  void exec(int, const op::Open& o) { device_->set_lid(o.box, true); }
  void exec(int, const op::Close& o) { device_->set_lid(o.box, false); }
  void exec(int, const op::Advance& o) { device_->advance(o.duration); }

  void exec(int, const op::ModemFault& o) {
    fault_ = o.plan;
    if (device_) device_->set_modem_fault(o.plan);
  }

  void exec(int line, const op::ExpectLog& o) {
    const auto records = device_ ? device_->log().records() : std::span<const LogRecord>{};
    for (std::size_t i = cursor_; i < records.size(); ++i) {
      if (records[i].kind != o.kind) continue;
      const auto j = nlohmann::ordered_json::parse(to_json_line(records[i]));
      const bool all = std::all_of(o.fields.begin(), o.fields.end(),
                                   [&](const auto& f) { return field_matches(j, f.first, f.second); });
      if (all) {
        cursor_ = i + 1;
        return;
      }
    }
    fail(line, "expect-log " + describe_expectation(o) + ": no matching record after seq " + std::to_string(cursor_));
  }

  void exec(int line, const op::ExpectState& o) {
    const Stage have = device_ ? device_->state().stage : Stage::kIdle;
    if (have != o.stage) {
      fail(line, "expect-state " + std::string(to_string(o.stage)) + ": device is " + std::string(to_string(have)));
    }
  }

  void write_transcript() {
    const std::string text = device_ ? format_transcript(device_->link().transcript()) : std::string{};
    std::ofstream out(transcript_path_, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error(ErrorCode::kStorageFailure, "cannot write " + transcript_path_.string());
    if (!device_) {
      std::ofstream touch(log_path_, std::ios::binary | std::ios::trunc);
      if (!touch) throw Error(ErrorCode::kStorageFailure, "cannot write " + log_path_.string());
    }
  }

  std::filesystem::path log_path_;
  std::filesystem::path transcript_path_;
  DeviceConfig pending_{Schedule{}, EscalationPolicy{}, std::nullopt};
  ModemFaultPlan fault_;
  std::unique_ptr<Device> device_;
  std::size_t cursor_ = 0;
  RunReport report_;
};

std::vector<std::string> read_lines(const std::filesystem::path& p, bool& ok) {
  std::ifstream in(p, std::ios::binary);
  ok = static_cast<bool>(in);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  return Runner(out_dir).run(scenario);
}

std::optional<ReplayResult> compare_files(const std::filesystem::path& expected,
                                          const std::filesystem::path& actual) {
  bool ok_expected = false;
  bool ok_actual = false;
  const auto a = read_lines(expected, ok_expected);
  const auto b = read_lines(actual, ok_actual);
  const auto name = expected.filename().string();
  if (!ok_expected) return ReplayResult{false, name, 0, "<missing " + expected.string() + ">", ""};
  if (!ok_actual) return ReplayResult{false, name, 0, "", "<missing " + actual.string() + ">"};
  const auto n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string ea = i < a.size() ? a[i] : "<end of file>";
    const std::string eb = i < b.size() ? b[i] : "<end of file>";
    if (ea != eb) return ReplayResult{false, name, i + 1, ea, eb};
  }
  // Same lines but different bytes can only mean a trailing-newline change.
  if (std::filesystem::file_size(expected) != std::filesystem::file_size(actual)) {
    return ReplayResult{false, name, n, "<trailing newline differs>", ""};
  }
  return std::nullopt;
}

ReplayResult replay_check(const Scenario& scenario, const std::filesystem::path& reference_dir) {
  std::random_device rd;
  const auto scratch = std::filesystem::temp_directory_path() /
                       ("pillsim-replay-" + std::to_string(rd()) + std::to_string(rd()));
  const auto report = run_scenario(scenario, scratch);
  ReplayResult result;
  for (const auto* name : {kLogFileName.data(), kTranscriptFileName.data()}) {
    if (auto diff = compare_files(reference_dir / name, scratch / name)) {
      result = *diff;
      break;
    }
  }
  (void)report;
  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);
  return result;
}

}  // namespace pillbox
