#include <CLI11.hpp>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pillbox/adherence_log.hpp"
#include "pillbox/bridge_server.hpp"
#include "pillbox/config.hpp"
#include "pillbox/error.hpp"
#include "pillbox/scenario.hpp"

namespace {

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

std::optional<std::string> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<pillbox::Scenario> load_scenario(const std::string& path) {
  const auto text = slurp(path);
  if (!text) {
    std::cerr << "pillsim: cannot read " << path << "\n";
    return std::nullopt;
  }
  auto parsed = pillbox::parse_scenario(*text);
  for (const auto& e : parsed.errors) {
    std::cerr << path << ":" << e.line << ":" << e.column << ": " << e.message << "\n";
  }
  return parsed.scenario;
}

pillbox::WallTime local_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  localtime_r(&t, &tm);
  return pillbox::WallTime::from_civil(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                                       tm.tm_sec);
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir) {
  const auto scn = load_scenario(scenario_path);
  if (!scn) return kExitUsage;
  const auto report = pillbox::run_scenario(*scn, out_dir);
  for (const auto& f : report.failed_expectations) {
    std::cerr << scenario_path << ":" << f.line << ": " << f.message << "\n";
  }
  std::cout << (report.passed ? "PASS" : "FAIL") << " " << scenario_path << " (" << report.records
            << " records, " << report.failed_expectations.size() << " failed)\n";
  std::cout << "log: " << report.log_path.string() << "\ntranscript: " << report.transcript_path.string() << "\n";
  return report.passed ? 0 : kExitFailed;
}

int cmd_replay(const std::string& scenario_path, const std::string& reference_dir) {
  const auto scn = load_scenario(scenario_path);
  if (!scn) return kExitUsage;
  const auto result = pillbox::replay_check(*scn, reference_dir);
  if (result.identical) {
    std::cout << "IDENTICAL " << scenario_path << "\n";
    return 0;
  }
  std::cout << "DIFFERS " << result.file << ":" << result.line << "\n"
            << "  expected: " << result.expected << "\n"
            << "  actual:   " << result.actual << "\n";
  return kExitFailed;
}

int cmd_serve(const std::string& config_path, std::uint16_t port, double speed) {
  const auto parsed = pillbox::load_config(config_path);
  for (const auto& e : parsed.errors) std::cerr << config_path << ":" << e.line << ": " << e.message << "\n";
  if (!parsed.config) return kExitUsage;
  const auto start = parsed.config->start_time.value_or(local_now());
  auto device = std::make_unique<pillbox::Device>(*parsed.config, start);
  pillbox::BridgeSession session(std::move(device), speed);
  pillbox::BridgeServerOptions options;
  options.port = port;
  options.stop_on_signal = true;
  pillbox::BridgeServer server(session, options);
  std::cout << "pillsim: bridge on ws://127.0.0.1:" << server.port() << "/ (speed " << speed << "x, start "
            << start.iso() << ")" << std::endl;
  server.run();
  return 0;
}

int cmd_export(const std::string& log_path, const std::string& csv_path, const std::string& from,
               const std::string& to) {
  std::optional<pillbox::WallTime> lo;
  std::optional<pillbox::WallTime> hi;
  if (!from.empty() && !(lo = pillbox::WallTime::parse_iso(from))) {
    std::cerr << "pillsim: bad --from timestamp\n";
    return kExitUsage;
  }
  if (!to.empty() && !(hi = pillbox::WallTime::parse_iso(to))) {
    std::cerr << "pillsim: bad --to timestamp\n";
    return kExitUsage;
  }
  const auto records = pillbox::read_log_file(log_path);
  std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
  out << pillbox::export_csv(records, lo, hi);
  if (!out) {
    std::cerr << "pillsim: cannot write " << csv_path << "\n";
    return kExitFailed;
  }
  return 0;
}

int cmd_verify(const std::string& log_path) {
  if (auto v = pillbox::verify_log_file(log_path)) {
    std::cout << "INVALID " << log_path << ":" << v->line << " (seq " << v->seq << "): " << v->message << "\n";
    return kExitFailed;
  }
  std::cout << "OK " << log_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated automatic pill reminder"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "pillsim-out";
  auto* run = app.add_subcommand("run", "Run a scenario in virtual time");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory");

  std::string reference_dir;
  auto* replay = app.add_subcommand("replay", "Re-run a scenario and compare with reference outputs");
  replay->add_option("scenario", scenario_path, "Scenario file")->required();
  replay->add_option("reference", reference_dir, "Directory holding a previous run's outputs")->required();

  std::string config_path;
  std::uint16_t port = 8765;
  double speed = 1.0;
  auto* serve = app.add_subcommand("serve", "Run the live device behind a WebSocket bridge");
  serve->add_option("config", config_path, "Device config file")->required();
  serve->add_option("--port", port, "Listen port on 127.0.0.1 (0 = any free port)");
  serve->add_option("--speed", speed, "Virtual seconds per real second")->check(CLI::Range(0.0, pillbox::kMaxSpeed));

  std::string log_path;
  std::string csv_path;
  std::string from;
  std::string to;
  auto* exp = app.add_subcommand("export", "Export an adherence log as CSV");
  exp->add_option("log", log_path, "Adherence log (JSON lines)")->required();
  exp->add_option("--csv", csv_path, "Output CSV file")->required();
  exp->add_option("--from", from, "Earliest timestamp, inclusive");
  exp->add_option("--to", to, "Latest timestamp, exclusive");

  auto* verify = app.add_subcommand("verify", "Check an adherence log's integrity");
  verify->add_option("log", log_path, "Adherence log (JSON lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(scenario_path, out_dir);
    if (*replay) return cmd_replay(scenario_path, reference_dir);
    if (*serve) return cmd_serve(config_path, port, speed);
    if (*exp) return cmd_export(log_path, csv_path, from, to);
    if (*verify) return cmd_verify(log_path);
  } catch (const pillbox::Error& e) {
    std::cerr << "pillsim: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
