#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pillbox/log_record.hpp"

namespace pillbox {

// One JSON object per line: seq, at, kind, then kind-specific keys.
std::string to_json_line(const LogRecord& rec);
std::optional<LogRecord> parse_json_line(std::string_view line);

enum class Durability {
  kFsync,  // flush + fsync before append returns
  kFlush,  // flush to the OS only
};

struct LogFilter {
  std::optional<std::set<LogKind>> kinds;
  std::optional<SlotId> slot;
  std::optional<WallTime> from;  // inclusive
  std::optional<WallTime> to;    // exclusive
};

bool matches(const LogRecord& rec, const LogFilter& filter);

// Append-only adherence store. Records are kept in memory and, when opened
// on a file, written through one line per record.
class AdherenceLog {
 public:
  AdherenceLog();  // in-memory only
  // Opens or creates a log file, loading any existing records. Throws
  // Error(kStorageFailure) if the file cannot be opened or does not parse.
  static AdherenceLog open(const std::filesystem::path& path, Durability durability = Durability::kFsync);

  AdherenceLog(AdherenceLog&&) noexcept;
  AdherenceLog& operator=(AdherenceLog&&) noexcept;
  ~AdherenceLog();

  // Assigns the next seq. Throws Error(kTimeRegression) if rec.at is earlier
  // than the previous record (unless rec resets the baseline), and
  // Error(kStorageFailure) on I/O failure.
  std::uint64_t append(LogRecord rec);

  std::vector<LogRecord> query(const LogFilter& filter) const;
  std::span<const LogRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  struct FileCloser {
    void operator()(std::FILE* f) const;
  };

  std::vector<LogRecord> records_;
  std::optional<std::filesystem::path> path_;
  std::unique_ptr<std::FILE, FileCloser> file_;
  Durability durability_ = Durability::kFsync;
};

inline constexpr std::string_view kCsvHeader = "seq,at,kind,slot,compartment,recipient,detail";

// RFC-4180 export with a fixed column order. `from`/`to` bound `at`
// (inclusive/exclusive) when given.
std::string export_csv(std::span<const LogRecord> records, std::optional<WallTime> from = std::nullopt,
                       std::optional<WallTime> to = std::nullopt);

using CsvRow = std::vector<std::string>;
// Throws Error(kInvalidMessage) on malformed quoting.
std::vector<CsvRow> parse_csv(std::string_view text);
std::string write_csv(const std::vector<CsvRow>& rows);

struct LogViolation {
  std::size_t line = 0;
  std::uint64_t seq = 0;
  std::string message;
};

// Re-checks seq contiguity from 1, timestamp monotonicity and required
// per-kind fields. nullopt means the log is sound.
std::optional<LogViolation> verify_records(std::span<const LogRecord> records);
std::optional<LogViolation> verify_log_file(const std::filesystem::path& path);

// Parses every record without checking ordering. Throws Error(kStorageFailure).
std::vector<LogRecord> read_log_file(const std::filesystem::path& path);

}  // namespace pillbox
