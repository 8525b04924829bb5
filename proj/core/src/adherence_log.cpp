#include "pillbox/adherence_log.hpp"

#include <unistd.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pillbox/error.hpp"

namespace pillbox {

namespace {

using ordered_json = nlohmann::ordered_json;

std::optional<WallTime> time_field(const ordered_json& j, const char* key, bool& ok) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_string()) {
    ok = false;
    return std::nullopt;
  }
  auto t = WallTime::parse_iso(j[key].get<std::string>());
  if (!t) ok = false;
  return t;
}

std::optional<int> int_field(const ordered_json& j, const char* key, bool& ok) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number_integer()) {
    ok = false;
    return std::nullopt;
  }
  return j[key].get<int>();
}

const std::set<std::string> kKnownKeys{"seq",     "at",     "kind",   "slot", "compartment",
                                       "recipient", "due",  "sms_ref", "attempt", "reason",
                                       "final",   "old",    "new"};

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string detail_of(const LogRecord& r) {
  std::vector<std::string> parts;
  if (r.due) parts.push_back("due=" + r.due->iso());
  if (r.sms_ref) parts.push_back("sms_ref=" + std::to_string(*r.sms_ref));
  if (r.attempt) parts.push_back("attempt=" + std::to_string(*r.attempt));
  if (r.reason) parts.push_back("reason=" + std::string(to_string(*r.reason)));
  if (r.final_attempt) parts.push_back(std::string("final=") + (*r.final_attempt ? "true" : "false"));
  if (r.old_time) parts.push_back("old=" + r.old_time->iso());
  if (r.new_time) parts.push_back("new=" + r.new_time->iso());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string to_json_line(const LogRecord& r) {
  ordered_json j;
  j["seq"] = r.seq;
  j["at"] = r.at.iso();
  j["kind"] = to_string(r.kind);
  if (r.slot) j["slot"] = to_string(*r.slot);
  if (r.compartment) j["compartment"] = r.compartment->index();
  if (r.recipient) j["recipient"] = to_string(*r.recipient);
  if (r.due) j["due"] = r.due->iso();
  if (r.sms_ref) j["sms_ref"] = *r.sms_ref;
  if (r.attempt) j["attempt"] = *r.attempt;
  if (r.reason) j["reason"] = to_string(*r.reason);
  if (r.final_attempt) j["final"] = *r.final_attempt;
  if (r.old_time) j["old"] = r.old_time->iso();
  if (r.new_time) j["new"] = r.new_time->iso();
  return j.dump();
}

std::optional<LogRecord> parse_json_line(std::string_view line) {
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  for (const auto& [key, _] : j.items()) {
    if (!kKnownKeys.count(key)) return std::nullopt;
  }
  if (!j.contains("seq") || !j["seq"].is_number_unsigned() || !j.contains("at") ||
      !j.contains("kind") || !j["kind"].is_string()) {
    return std::nullopt;
  }

  bool ok = true;
  LogRecord r;
  r.seq = j["seq"].get<std::uint64_t>();
  const auto at = time_field(j, "at", ok);
  const auto kind = parse_log_kind(j["kind"].get<std::string>());
  if (!at || !kind) return std::nullopt;
  r.at = *at;
  r.kind = *kind;

  if (j.contains("slot")) {
    r.slot = j["slot"].is_string() ? parse_slot(j["slot"].get<std::string>()) : std::nullopt;
    if (!r.slot) ok = false;
  }
  if (auto box = int_field(j, "compartment", ok)) {
    r.compartment = CompartmentId::from_index(*box);
    if (!r.compartment) ok = false;
  }
  if (j.contains("recipient")) {
    r.recipient = j["recipient"].is_string() ? parse_recipient(j["recipient"].get<std::string>()) : std::nullopt;
    if (!r.recipient) ok = false;
  }
  r.due = time_field(j, "due", ok);
  r.sms_ref = int_field(j, "sms_ref", ok);
  r.attempt = int_field(j, "attempt", ok);
  if (j.contains("reason")) {
    const auto s = j["reason"].is_string() ? j["reason"].get<std::string>() : "";
    if (s == "MODEM_ERROR") {
      r.reason = SmsFailure::kModemError;
    } else if (s == "TIMEOUT") {
      r.reason = SmsFailure::kTimeout;
    } else {
      ok = false;
    }
  }
  if (j.contains("final")) {
    if (!j["final"].is_boolean()) return std::nullopt;
    r.final_attempt = j["final"].get<bool>();
  }
  r.old_time = time_field(j, "old", ok);
  r.new_time = time_field(j, "new", ok);
  if (!ok || missing_required_field(r)) return std::nullopt;
  return r;
}

bool matches(const LogRecord& rec, const LogFilter& f) {
  if (f.kinds && !f.kinds->count(rec.kind)) return false;
  if (f.slot && rec.slot != f.slot) return false;
  if (f.from && rec.at < *f.from) return false;
  if (f.to && !(rec.at < *f.to)) return false;
  return true;
}

void AdherenceLog::FileCloser::operator()(std::FILE* f) const {
  if (f) std::fclose(f);
}

AdherenceLog::AdherenceLog() = default;
AdherenceLog::AdherenceLog(AdherenceLog&&) noexcept = default;
AdherenceLog& AdherenceLog::operator=(AdherenceLog&&) noexcept = default;
AdherenceLog::~AdherenceLog() = default;

std::vector<LogRecord> read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kStorageFailure, "cannot open " + path.string());
  std::vector<LogRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto rec = parse_json_line(line);
    if (!rec) {
      throw Error(ErrorCode::kStorageFailure, path.string() + ":" + std::to_string(line_no) + ": unreadable record");
    }
    records.push_back(std::move(*rec));
  }
  return records;
}

AdherenceLog AdherenceLog::open(const std::filesystem::path& path, Durability durability) {
  AdherenceLog log;
  log.durability_ = durability;
  if (std::filesystem::exists(path)) {
    log.records_ = read_log_file(path);
    if (auto v = verify_records(log.records_)) {
      throw Error(ErrorCode::kStorageFailure, path.string() + ": " + v->message);
    }
  }
  log.file_.reset(std::fopen(path.c_str(), "ab"));
  if (!log.file_) throw Error(ErrorCode::kStorageFailure, "cannot open " + path.string());
  log.path_ = path;
  return log;
}

std::uint64_t AdherenceLog::append(LogRecord rec) {
  if (!records_.empty() && rec.at < records_.back().at && !resets_time_baseline(rec)) {
    throw Error(ErrorCode::kTimeRegression,
                rec.at.iso() + " is before last record at " + records_.back().at.iso());
  }
  rec.seq = records_.size() + 1;
  if (file_) {
    const auto line = to_json_line(rec) + "\n";
    if (std::fwrite(line.data(), 1, line.size(), file_.get()) != line.size() ||
        std::fflush(file_.get()) != 0) {
      throw Error(ErrorCode::kStorageFailure, "write failed");
    }
    if (durability_ == Durability::kFsync && ::fsync(::fileno(file_.get())) != 0) {
      throw Error(ErrorCode::kStorageFailure, "fsync failed");
    }
  }
  records_.push_back(std::move(rec));
  return records_.back().seq;
}

std::vector<LogRecord> AdherenceLog::query(const LogFilter& filter) const {
  std::vector<LogRecord> out;
  for (const auto& r : records_) {
    if (matches(r, filter)) out.push_back(r);
  }
  return out;
}

std::string export_csv(std::span<const LogRecord> records, std::optional<WallTime> from,
                       std::optional<WallTime> to) {
  std::string out(kCsvHeader);
  out += "\r\n";
  for (const auto& r : records) {
    if (from && r.at < *from) continue;
    if (to && !(r.at < *to)) continue;
    const CsvRow row{
        std::to_string(r.seq),
        r.at.iso(),
        std::string(to_string(r.kind)),
        r.slot ? std::string(to_string(*r.slot)) : "",
        r.compartment ? std::to_string(r.compartment->index()) : "",
        r.recipient ? std::string(to_string(*r.recipient)) : "",
        detail_of(r),
    };
    out += write_csv({row});
  }
  return out;
}

std::string write_csv(const std::vector<CsvRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote_csv(row[i]);
    }
    out += "\r\n";
  }
  return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\r' && text[i] != '\n') {
          throw Error(ErrorCode::kInvalidMessage, "characters after closing quote");
        }
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_field();
      rows.push_back(std::move(row));
      row.clear();
      i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
    } else {
      field += c;
      field_started = true;
      ++i;
    }
  }
  if (quoted) throw Error(ErrorCode::kInvalidMessage, "unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) {
    end_field();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<LogViolation> verify_records(std::span<const LogRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.seq != i + 1) {
      return LogViolation{i + 1, r.seq,
                          "seq " + std::to_string(r.seq) + " where " + std::to_string(i + 1) + " expected"};
    }
    if (i > 0 && r.at < records[i - 1].at && !resets_time_baseline(r)) {
      return LogViolation{i + 1, r.seq, "timestamp " + r.at.iso() + " precedes " + records[i - 1].at.iso()};
    }
    if (auto missing = missing_required_field(r)) {
      return LogViolation{i + 1, r.seq,
                          std::string(to_string(r.kind)) + " lacks required field " + std::string(*missing)};
    }
  }
  return std::nullopt;
}

std::optional<LogViolation> verify_log_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return LogViolation{0, 0, "cannot open " + path.string()};
  std::vector<LogRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto rec = parse_json_line(line);
    if (!rec) return LogViolation{line_no, records.size() + 1, "unparseable record"};
    records.push_back(std::move(*rec));
  }
  // One record per line, so record index and line number coincide.
  return verify_records(records);
}

}  // namespace pillbox
