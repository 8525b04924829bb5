#include "pillbox/gsm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "pillbox/error.hpp"

namespace pillbox {

namespace {

constexpr std::string_view kOk = "\r\nOK\r\n";
constexpr std::string_view kError = "\r\nERROR\r\n";
constexpr std::string_view kPrompt = "\r\n> ";

std::string gsm_safe(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (!is_gsm7_basic(c)) c = '?';
  }
  return out;
}

std::string pill_and_when(const DoseSlot& slot, WallTime due) {
  return gsm_safe(slot.pill_name) + " x" + std::to_string(slot.pill_count) + " at " + due.hh_mm() + " " +
         due.dd_mm_yyyy();
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::optional<int> parse_uint(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

}  // namespace

bool is_gsm7_basic(char c) {
  if (c < 0x20 || c > 0x7e) return false;
  switch (c) {
    case '`':
    case '[':
    case '\\':
    case ']':
    case '^':
    case '{':
    case '|':
    case '}':
    case '~':
      return false;
    default:
      return true;
  }
}

std::optional<std::string> sms_problem(const SmsMessage& msg) {
  if (!is_e164(msg.recipient_number)) return "recipient is not an E.164 number";
  if (msg.body.empty()) return "empty body";
  if (msg.body.size() > kMaxSmsLength) return "body longer than 160 characters";
  if (!std::all_of(msg.body.begin(), msg.body.end(), is_gsm7_basic)) {
    return "body has characters outside the GSM-7 basic set";
  }
  return std::nullopt;
}

std::string format_patient_sms(const DoseSlot& slot, WallTime due) {
  return "MISSED DOSE: " + pill_and_when(slot, due) + ". PLEASE TAKE IT NOW.";
}

std::string format_family_sms(std::string_view patient_name, const DoseSlot& slot, WallTime due) {
  return "ALERT: " + gsm_safe(patient_name) + " MISSED " + pill_and_when(slot, due) + ".";
}

std::string describe(const AtToken& token) {
  struct V {
    std::string operator()(const AtOk&) const { return "OK"; }
    std::string operator()(const AtError&) const { return "ERROR"; }
    std::string operator()(const AtPrompt&) const { return "PROMPT"; }
    std::string operator()(const AtCmgsRef& r) const { return "CMGS_REF(" + std::to_string(r.ref) + ")"; }
    std::string operator()(const AtUnknownLine& u) const { return "UNKNOWN_LINE(" + u.text + ")"; }
  };
  return std::visit(V{}, token);
}

std::vector<AtToken> AtResponseParser::feed(std::string_view bytes) {
  std::vector<AtToken> out;
  for (char c : bytes) push(c, out);
  return out;
}

void AtResponseParser::push(char c, std::vector<AtToken>& out) {
  buffer_ += c;
  const auto n = buffer_.size();
  if (n >= 2 && buffer_[n - 2] == '\r' && buffer_[n - 1] == '\n') {
    const std::string line = buffer_.substr(0, n - 2);
    buffer_.clear();
    if (line.empty()) return;
    if (line == "OK") {
      out.emplace_back(AtOk{});
    } else if (line == "ERROR" || line.rfind("+CMS ERROR:", 0) == 0 || line.rfind("+CME ERROR:", 0) == 0) {
      out.emplace_back(AtError{});
    } else if (line.rfind("+CMGS: ", 0) == 0) {
      if (auto ref = parse_uint(std::string_view(line).substr(7))) {
        out.emplace_back(AtCmgsRef{*ref});
      } else {
        out.emplace_back(AtUnknownLine{line});
      }
    } else {
      out.emplace_back(AtUnknownLine{line});
    }
  } else if (buffer_ == "> ") {
    buffer_.clear();
    out.emplace_back(AtPrompt{});
  } else if (n > kMaxLine) {
    out.emplace_back(AtUnknownLine{buffer_});
    buffer_.clear();
  }
}

std::string to_hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0xF];
  }
  return out;
}

std::string format_transcript(const std::vector<AtExchange>& exchanges) {
  std::string out;
  for (const auto& x : exchanges) {
    out += x.direction == Direction::kToModem ? "> " : "< ";
    out += to_hex(x.bytes);
    out += '\n';
  }
  return out;
}

std::optional<std::vector<AtExchange>> parse_transcript(std::string_view text) {
  std::vector<AtExchange> out;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.size() < 2 || (line[0] != '>' && line[0] != '<') || line[1] != ' ' || line.size() % 2 != 0) {
      return std::nullopt;
    }
    AtExchange x{line[0] == '>' ? Direction::kToModem : Direction::kFromModem, {}};
    for (std::size_t i = 2; i < line.size(); i += 2) {
      const int hi = nibble(line[i]);
      const int lo = nibble(line[i + 1]);
      if (hi < 0 || lo < 0) return std::nullopt;
      x.bytes += static_cast<char>(hi * 16 + lo);
    }
    out.push_back(std::move(x));
  }
  return out;
}

void ModemLink::host_write(std::string_view bytes) {
  if (bytes.empty()) return;
  to_modem_ += bytes;
  transcript_.push_back({Direction::kToModem, std::string(bytes)});
}

void ModemLink::modem_write(std::string_view bytes) {
  if (bytes.empty()) return;
  to_host_ += bytes;
  transcript_.push_back({Direction::kFromModem, std::string(bytes)});
}

std::string ModemLink::take_for_modem() { return std::exchange(to_modem_, {}); }
std::string ModemLink::take_for_host() { return std::exchange(to_host_, {}); }

std::string describe(const ModemFaultPlan& plan) {
  switch (plan.mode) {
    case ModemFaultPlan::Mode::kNormal: return "NORMAL";
    case ModemFaultPlan::Mode::kErrorOnCmgs: return "ERROR_ON_CMGS";
    case ModemFaultPlan::Mode::kSilent: return "SILENT";
    case ModemFaultPlan::Mode::kErrorThenOk: return "ERROR_THEN_OK " + std::to_string(plan.fail_first);
  }
  return "?";
}

std::optional<ModemFaultPlan> parse_fault_plan(std::string_view text) {
  const auto u = upper(text);
  if (u == "NORMAL") return ModemFaultPlan::normal();
  if (u == "ERROR_ON_CMGS") return ModemFaultPlan::error_on_cmgs();
  if (u == "SILENT") return ModemFaultPlan::silent();
  constexpr std::string_view kPrefix = "ERROR_THEN_OK";
  if (u.rfind(kPrefix, 0) == 0) {
    std::string_view rest = std::string_view(u).substr(kPrefix.size());
    const auto first = rest.find_first_not_of(" (");
    if (first == std::string_view::npos) return std::nullopt;
    rest = rest.substr(first);
    if (!rest.empty() && rest.back() == ')') rest.remove_suffix(1);
    const auto n = parse_uint(rest);
    if (!n || *n < 1) return std::nullopt;
    return ModemFaultPlan::error_then_ok(*n);
  }
  return std::nullopt;
}

std::string SimModem::step(std::string_view incoming) {
  if (plan_.mode == ModemFaultPlan::Mode::kSilent) return {};
  std::string out;
  for (char c : incoming) {
    if (in_body_) {
      if (c == kCtrlZ) {
        out += finish_body();
      } else if (c == kEsc) {
        in_body_ = false;
        body_.clear();
        out += kOk;
      } else {
        body_ += c;
      }
      continue;
    }
    if (c == '\r') {
      out += command(line_);
      line_.clear();
    } else if (c != '\n' && line_.size() < 512) {
      line_ += c;
    }
  }
  return out;
}

std::string SimModem::command(std::string_view raw) {
  const auto start = raw.find_first_not_of(' ');
  if (start == std::string_view::npos) return {};
  const auto line = raw.substr(start);
  const auto u = upper(line);
  if (u == "AT") return std::string(kOk);
  if (u == "AT+CMGF=1") {
    text_mode_ = true;
    return std::string(kOk);
  }
  constexpr std::string_view kCmgs = "AT+CMGS=\"";
  if (u.rfind(kCmgs, 0) == 0 && u.size() > kCmgs.size() + 1 && u.back() == '"') {
    const std::string number(line.substr(kCmgs.size(), line.size() - kCmgs.size() - 1));
    if (!text_mode_ || !is_e164(number)) return std::string(kError);
    ++cmgs_seen_;
    if (plan_.mode == ModemFaultPlan::Mode::kErrorOnCmgs ||
        (plan_.mode == ModemFaultPlan::Mode::kErrorThenOk && cmgs_seen_ <= plan_.fail_first)) {
      return std::string(kError);
    }
    in_body_ = true;
    body_.clear();
    body_number_ = number;
    return std::string(kPrompt);
  }
  return std::string(kError);
}

std::string SimModem::finish_body() {
  in_body_ = false;
  SmsMessage msg{body_number_, std::exchange(body_, {})};
  if (sms_problem(msg)) return std::string(kError);
  sent_box_.push_back(std::move(msg));
  return "\r\n+CMGS: " + std::to_string(next_ref_++) + "\r\n\r\nOK\r\n";
}

void SmsDriver::submit(SmsJob job) {
  if (auto problem = sms_problem(job.message)) throw Error(ErrorCode::kInvalidMessage, *problem);
  queue_.push_back(std::move(job));
  if (phase_ == Phase::kIdle) start_next();
}

void SmsDriver::start_next() {
  if (queue_.empty()) return;
  current_ = std::move(queue_.front());
  queue_.pop_front();
  attempt_ = 0;
  begin_attempt();
}

void SmsDriver::begin_attempt() {
  ++attempt_;
  ++generation_;
  parser_.reset();
  command("AT\r", Phase::kAwaitAt);
}

void SmsDriver::command(std::string_view bytes, Phase next) {
  phase_ = next;
  arm_timeout();
  link_->host_write(bytes);
}

void SmsDriver::arm_timeout() {
  cancel_timeout();
  timeout_ = timers_->arm(kModemResponseTimeout, TimerTag{TimerKind::kSmsTimeout, 0});
}

void SmsDriver::cancel_timeout() {
  if (timeout_) timers_->cancel(*timeout_);
  timeout_.reset();
}

void SmsDriver::on_link_bytes() {
  const auto bytes = link_->take_for_host();
  if (bytes.empty()) return;
  const auto tokens = parser_.feed(bytes);
  const auto generation = generation_;
  for (const auto& t : tokens) {
    // A failed attempt or finished job makes the rest of the batch stale.
    if (phase_ == Phase::kIdle || generation_ != generation) break;
    handle(t);
  }
}

void SmsDriver::on_timeout(TimerId id) {
  if (timeout_ != id) return;
  timeout_.reset();
  fail_attempt(SmsFailure::kTimeout);
}

void SmsDriver::handle(const AtToken& token) {
  if (std::holds_alternative<AtError>(token)) {
    fail_attempt(SmsFailure::kModemError);
    return;
  }
  switch (phase_) {
    case Phase::kAwaitAt:
      if (std::holds_alternative<AtOk>(token)) command("AT+CMGF=1\r", Phase::kAwaitCmgf);
      break;
    case Phase::kAwaitCmgf:
      if (std::holds_alternative<AtOk>(token)) {
        command("AT+CMGS=\"" + current_->message.recipient_number + "\"\r", Phase::kAwaitPrompt);
      }
      break;
    case Phase::kAwaitPrompt:
      if (std::holds_alternative<AtPrompt>(token)) {
        command(current_->message.body + kCtrlZ, Phase::kAwaitRef);
      }
      break;
    case Phase::kAwaitRef:
      if (const auto* ref = std::get_if<AtCmgsRef>(&token)) {
        pending_ref_ = ref->ref;
        phase_ = Phase::kAwaitFinalOk;
        arm_timeout();
      }
      break;
    case Phase::kAwaitFinalOk:
      if (std::holds_alternative<AtOk>(token)) {
        cancel_timeout();
        finish(SmsSent{pending_ref_});
      }
      break;
    case Phase::kIdle:
      break;
  }
}

void SmsDriver::fail_attempt(SmsFailure reason) {
  cancel_timeout();
  if (attempt_ < 1 + retries_) {
    if (reporter_) reporter_(SmsAttemptReport{*current_, attempt_, SmsFailed{reason}, false});
    begin_attempt();
    return;
  }
  finish(SmsFailed{reason});
}

void SmsDriver::finish(SendOutcome outcome) {
  SmsAttemptReport report{*current_, attempt_, outcome, true};
  current_.reset();
  phase_ = Phase::kIdle;
  ++generation_;
  parser_.reset();
  if (reporter_) reporter_(report);
  start_next();
}

void pump(ModemLink& link, SimModem& modem, SmsDriver& driver) {
  while (!link.quiet()) {
    const auto to_modem = link.take_for_modem();
    if (!to_modem.empty()) link.modem_write(modem.step(to_modem));
    driver.on_link_bytes();
  }
}

SendResult send_sms(const SmsMessage& msg, SimModem& modem, int retries, ModemLink& link,
                    VirtualClock& clock) {
  SendResult result;
  SmsDriver driver(link, clock, [&](const SmsAttemptReport& r) {
    result.reports.push_back(r);
    result.attempts = r.attempt;
    if (r.final) result.outcome = r.outcome;
  });
  driver.set_retries(retries);
  driver.submit(SmsJob{Recipient::kPatient, msg});
  pump(link, modem, driver);
  while (driver.busy()) {
    const auto deadline = clock.next_deadline();
    if (!deadline) break;
    clock.advance(*deadline - clock.now(), [&](const Firing& f) {
      if (f.tag.kind == TimerKind::kSmsTimeout) driver.on_timeout(f.id);
    });
    pump(link, modem, driver);
  }
  return result;
}

}  // namespace pillbox
