#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pillbox/clock.hpp"
#include "pillbox/domain.hpp"
#include "pillbox/log_record.hpp"

namespace pillbox {

inline constexpr std::size_t kMaxSmsLength = 160;
inline constexpr char kCtrlZ = 0x1A;
inline constexpr char kEsc = 0x1B;
inline constexpr Seconds kModemResponseTimeout{10};

// Characters of the GSM 03.38 basic table that are also 7-bit ASCII. Each
// costs one septet, so the 160-character limit is exact.
bool is_gsm7_basic(char c);

struct SmsMessage {
  std::string recipient_number;
  std::string body;

  bool operator==(const SmsMessage&) const = default;
};

// Empty when the message can be submitted in text mode.
std::optional<std::string> sms_problem(const SmsMessage& msg);

// `MISSED DOSE: <pill> x<count> at <HH:MM> <DD-MM-YYYY>. PLEASE TAKE IT NOW.`
std::string format_patient_sms(const DoseSlot& slot, WallTime due);
// `ALERT: <patient> MISSED <pill> x<count> at <HH:MM> <DD-MM-YYYY>.`
std::string format_family_sms(std::string_view patient_name, const DoseSlot& slot, WallTime due);

// --- response codec ---------------------------------------------------------

struct AtOk {
  bool operator==(const AtOk&) const = default;
};
struct AtError {
  bool operator==(const AtError&) const = default;
};
struct AtPrompt {
  bool operator==(const AtPrompt&) const = default;
};
struct AtCmgsRef {
  int ref = 0;
  bool operator==(const AtCmgsRef&) const = default;
};
struct AtUnknownLine {
  std::string text;
  bool operator==(const AtUnknownLine&) const = default;
};

using AtToken = std::variant<AtOk, AtError, AtPrompt, AtCmgsRef, AtUnknownLine>;

std::string describe(const AtToken& token);

// Incremental parser for modem-to-host bytes. A token is emitted when its
// CRLF completes, or when `> ` appears at the start of a line. Splitting the
// input differently never changes the token stream.
class AtResponseParser {
 public:
  static constexpr std::size_t kMaxLine = 256;

  std::vector<AtToken> feed(std::string_view bytes);
  void reset() { buffer_.clear(); }
  bool idle() const { return buffer_.empty(); }

 private:
  void push(char c, std::vector<AtToken>& out);
  std::string buffer_;
};

// --- link -------------------------------------------------------------------

enum class Direction : std::uint8_t { kToModem, kFromModem };

struct AtExchange {
  Direction direction = Direction::kToModem;
  std::string bytes;

  bool operator==(const AtExchange&) const = default;
};

// `> 41540D` / `< 0D0A4F4B0D0A`, one exchange per line.
std::string format_transcript(const std::vector<AtExchange>& exchanges);
std::optional<std::vector<AtExchange>> parse_transcript(std::string_view text);
std::string to_hex(std::string_view bytes);

// In-memory duplex byte pipe between host and modem. Each write is captured
// as one transcript exchange.
class ModemLink {
 public:
  void host_write(std::string_view bytes);
  void modem_write(std::string_view bytes);
  std::string take_for_modem();
  std::string take_for_host();
  bool quiet() const { return to_modem_.empty() && to_host_.empty(); }

  const std::vector<AtExchange>& transcript() const { return transcript_; }

 private:
  std::string to_modem_;
  std::string to_host_;
  std::vector<AtExchange> transcript_;
};

// --- simulated SIM800L ------------------------------------------------------

struct ModemFaultPlan {
  enum class Mode : std::uint8_t { kNormal, kErrorOnCmgs, kSilent, kErrorThenOk };
  Mode mode = Mode::kNormal;
  int fail_first = 0;  // kErrorThenOk only, >= 1

  static ModemFaultPlan normal() { return {}; }
  static ModemFaultPlan error_on_cmgs() { return {Mode::kErrorOnCmgs, 0}; }
  static ModemFaultPlan silent() { return {Mode::kSilent, 0}; }
  static ModemFaultPlan error_then_ok(int n) { return {Mode::kErrorThenOk, n}; }

  bool valid() const { return mode != Mode::kErrorThenOk || fail_first >= 1; }
  bool operator==(const ModemFaultPlan&) const = default;
};

std::string describe(const ModemFaultPlan& plan);
// NORMAL | ERROR_ON_CMGS | SILENT | ERROR_THEN_OK <n> (case-insensitive)
std::optional<ModemFaultPlan> parse_fault_plan(std::string_view text);

// Modem side of the text-mode dialogue. Never echoes.
class SimModem {
 public:
  explicit SimModem(ModemFaultPlan plan = {}) : plan_(plan) {}

  std::string step(std::string_view incoming);

  void set_plan(ModemFaultPlan plan) { plan_ = plan; }
  const ModemFaultPlan& plan() const { return plan_; }
  const std::vector<SmsMessage>& sent_box() const { return sent_box_; }

 private:
  std::string command(std::string_view line);
  std::string finish_body();

  ModemFaultPlan plan_;
  std::string line_;
  bool text_mode_ = false;
  bool in_body_ = false;
  std::string body_;
  std::string body_number_;
  int cmgs_seen_ = 0;
  int next_ref_ = 1;
  std::vector<SmsMessage> sent_box_;
};

// --- host driver ------------------------------------------------------------

struct SmsJob {
  Recipient recipient = Recipient::kPatient;
  SmsMessage message;
};

struct SmsSent {
  int ref = 0;
  bool operator==(const SmsSent&) const = default;
};
struct SmsFailed {
  SmsFailure reason = SmsFailure::kModemError;
  bool operator==(const SmsFailed&) const = default;
};
using SendOutcome = std::variant<SmsSent, SmsFailed>;

struct SmsAttemptReport {
  SmsJob job;
  int attempt = 1;
  SendOutcome outcome;
  bool final = true;  // no further attempt follows
};

// Runs `AT` / `AT+CMGF=1` / `AT+CMGS="<n>"` / body+SUB as a sub-state
// machine advanced by modem bytes and timeouts, retrying the whole dialogue
// up to `retries` more times. Jobs queue FIFO; one is in flight at a time.
class SmsDriver {
 public:
  using Reporter = std::function<void(const SmsAttemptReport&)>;

  SmsDriver(ModemLink& link, TimerService& timers, Reporter reporter)
      : link_(&link), timers_(&timers), reporter_(std::move(reporter)) {}

  void set_retries(int retries) { retries_ = retries < 0 ? 0 : retries; }
  int retries() const { return retries_; }

  // Queues a job; starts it if the driver is idle. Throws
  // Error(kInvalidMessage) if the message cannot be sent in text mode.
  void submit(SmsJob job);

  // Feeds whatever the modem has written to the host.
  void on_link_bytes();
  // Handles a kSmsTimeout firing; stale ids are ignored.
  void on_timeout(TimerId id);

  bool busy() const { return phase_ != Phase::kIdle; }
  std::size_t queued() const { return queue_.size(); }

 private:
  enum class Phase : std::uint8_t { kIdle, kAwaitAt, kAwaitCmgf, kAwaitPrompt, kAwaitRef, kAwaitFinalOk };

  void start_next();
  void begin_attempt();
  void command(std::string_view bytes, Phase next);
  void handle(const AtToken& token);
  void fail_attempt(SmsFailure reason);
  void finish(SendOutcome outcome);
  void arm_timeout();
  void cancel_timeout();

  ModemLink* link_;
  TimerService* timers_;
  Reporter reporter_;
  int retries_ = 2;
  Phase phase_ = Phase::kIdle;
  std::deque<SmsJob> queue_;
  std::optional<SmsJob> current_;
  int attempt_ = 0;
  std::uint64_t generation_ = 0;
  int pending_ref_ = 0;
  std::optional<TimerId> timeout_;
  AtResponseParser parser_;
};

// Shuttles bytes between driver and modem until the link is quiet.
void pump(ModemLink& link, SimModem& modem, SmsDriver& driver);

struct SendResult {
  SendOutcome outcome;
  int attempts = 0;
  std::vector<SmsAttemptReport> reports;
};

// Sends one message through a fresh driver over `link`, advancing `clock`
// through any response timeouts until the dialogue resolves.
SendResult send_sms(const SmsMessage& msg, SimModem& modem, int retries, ModemLink& link,
                    VirtualClock& clock);

}  // namespace pillbox
