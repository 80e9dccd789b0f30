// senswich: scenario runner, energy report, payload decoder, exporter and API
// server for the SENSWICH simulator.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "senswich/base64.h"
#include "senswich/energy.h"
#include "senswich/http_api.h"
#include "senswich/json_io.h"
#include "senswich/lpp.h"
#include "senswich/payload.h"
#include "senswich/scenario.h"
#include "senswich/service.h"

namespace {

using namespace senswich;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

void apply_speed(ScenarioConfig& config, const std::string& speed) {
  if (speed.empty()) return;
  if (speed == "max") {
    config.speedup.reset();
    return;
  }
  std::size_t used = 0;
  const double x = std::stod(speed, &used);
  if (used != speed.size()) throw std::invalid_argument("--speed expects a number or 'max'");
  config.speedup = x;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& speed, std::optional<double> duration_s, const std::string& out) {
  ScenarioConfig config = config_path.empty() ? default_scenario() : load_scenario(config_path);
  if (seed) config.seed = *seed;
  if (duration_s) config.duration = from_seconds(*duration_s);
  apply_speed(config, speed);
  validate(config);

  ControlService service(out);
  service.start(config);
  RunStatus st = service.status();
  while (st.state == RunStatus::State::Running) {
    std::this_thread::sleep_for(std::chrono::milliseconds(config.speedup ? 1000 : 50));
    st = service.status();
    if (config.speedup) {
      std::cerr << fmt::format("\rsim {:.0f}/{:.0f} s  uplinks {}  points {}", st.sim_time_s,
                               st.duration_s, st.uplinks, st.stored_points)
                << std::flush;
    }
  }
  if (config.speedup) std::cerr << '\n';
  if (st.state == RunStatus::State::Failed) {
    std::cerr << "run failed: " << st.error << '\n';
    return 1;
  }
  service.with_simulation([&](const Simulation& sim) {
    std::cout << fmt::format("simulated {} s, {} uplinks ({} delivered), {} on lorawan, {} on "
                             "lorawan/error, {} points stored\n",
                             format_seconds(sim.now()), sim.uplinks().size(),
                             sim.network_server().forwarded(), sim.pipeline().success_count(),
                             sim.pipeline().error_count(), sim.store().size());
    return 0;
  });
  if (!out.empty()) std::cout << "outputs written to " << out << '\n';
  return 0;
}

void print_report(const std::string& profile, EnergyBasis basis) {
  const auto r = energy_report(PhaseProfile::by_name(profile), BatteryPack{}, basis);
  std::cout << fmt::format("profile {} / {} basis\n", profile, basis_name(basis));
  std::cout << fmt::format("  idle power        {:10.2f} mW\n", r.idle_power_mw);
  std::cout << fmt::format("  energy/sample     {:10.2f} mWh\n", r.energy_per_sample_mwh);
  std::cout << fmt::format("  average current   {:10.2f} mA\n", r.avg_current_ma);
  std::cout << fmt::format("  average power     {:10.3f} mW\n", r.avg_power_mw);
  std::cout << fmt::format("  discharge time    {:10.2f} h\n", r.discharge_h);
  std::cout << fmt::format("  discharge time    {:10.2f} days\n", r.discharge_days);
}

int cmd_energy(const std::string& profile, const std::string& basis, bool as_json) {
  std::vector<EnergyBasis> bases;
  if (basis.empty()) {
    bases = {EnergyBasis::Capacity, EnergyBasis::Energy};
  } else {
    bases = {parse_basis(basis)};
  }
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (auto b : bases) {
      auto r = to_json(energy_report(PhaseProfile::by_name(profile), BatteryPack{}, b));
      r["profile"] = profile;
      j.push_back(r);
    }
    std::cout << (j.size() == 1 ? j[0] : j).dump(2) << '\n';
    return 0;
  }
  const auto p = PhaseProfile::by_name(profile);
  std::cout << fmt::format("{:<16}{:>12}{:>14}{:>12}\n", "phase", "duration s", "current mA",
                           "energy J");
  for (const auto& s : p.steps) {
    const double d = to_seconds(s.duration);
    std::cout << fmt::format("{:<16}{:>12.2f}{:>14.1f}{:>12.2f}\n", phase_name(s.phase), d,
                             s.current_ma, phase_energy(d, s.current_ma, p.supply_v));
  }
  std::cout << fmt::format("supply {} V\n\n", p.supply_v);
  for (auto b : bases) print_report(profile, b);
  return 0;
}

int cmd_decode(const std::string& payload) {
  const auto bytes = base64_decode(payload);
  std::cout << "bytes: " << lpp::to_hex(bytes) << " (" << bytes.size() << ")\n";
  const auto records = lpp::decode_payload(bytes);
  for (const auto& r : records) {
    if (r.type == lpp::LppType::Gps) {
      std::cout << fmt::format("ch{} {} lat={} lon={} alt={}\n", r.channel, lpp::type_name(r.type),
                               r.gps.latitude, r.gps.longitude, r.gps.altitude);
    } else {
      std::cout << fmt::format("ch{} {} {}\n", r.channel, lpp::type_name(r.type), r.value);
    }
  }
  try {
    const auto m = to_measurements(records);
    std::cout << render_cleartext(m) << '\n';
  } catch (const UnmappedRecord& e) {
    std::cout << "not a SENSWICH payload: " << e.what() << '\n';
  }
  return 0;
}

int cmd_export(const std::string& format, const std::string& data_dir, const std::string& input,
               const std::string& output) {
  const std::string path =
      input.empty() ? (std::filesystem::path(data_dir) / "store.csv").string() : input;
  const auto text = export_points(read_points_file(path), parse_export_format(format));
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", output));
    out << text;
  }
  return 0;
}

HttpApi* g_api = nullptr;

int cmd_serve(const std::string& config_path, const std::string& speed) {
  const std::string host = env_or("SENSWICH_LISTEN", "127.0.0.1");
  const int port = std::stoi(env_or("SENSWICH_PORT", "8080"));
  ControlService service(env_or("SENSWICH_DATA_DIR", ""));
  if (!config_path.empty()) {
    ScenarioConfig config = load_scenario(config_path);
    apply_speed(config, speed);
    service.start(config);
  }
  HttpApi api(service);
  g_api = &api;
  std::signal(SIGINT, [](int) {
    if (g_api) g_api->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_api) g_api->stop();
  });
  std::cerr << fmt::format("listening on http://{}:{}\n", host, port);
  const bool ok = api.listen(host, port);
  g_api = nullptr;
  if (!ok) {
    std::cerr << fmt::format("cannot listen on {}:{}\n", host, port);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SENSWICH water-monitoring network simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string speed;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  auto* run = app.add_subcommand("run", "Run a scenario and write its outputs");
  run->add_option("--config", config_path, "Scenario JSON file (default: built-in lagoon scenario)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--speed", speed, "Real-time multiplier or 'max'");
  run->add_option("--duration", duration, "Override the simulated duration in seconds");
  run->add_option("--out", out, "Output directory");

  std::string profile = "regulator";
  std::string basis;
  bool as_json = false;
  auto* energy = app.add_subcommand("energy-report", "Print the per-phase energy budget");
  energy->add_option("--profile", profile, "regulator | ideal")
      ->check(CLI::IsMember({"regulator", "ideal"}));
  energy->add_option("--basis", basis, "capacity | energy (default: both)")
      ->check(CLI::IsMember({"capacity", "energy"}));
  energy->add_flag("--json", as_json, "Emit JSON");

  std::string payload;
  auto* decode = app.add_subcommand("decode", "Decode a base64 CayenneLPP payload");
  decode->add_option("--payload", payload, "Base64 payload")->required();

  std::string format = "csv";
  std::string data_dir = env_or("SENSWICH_DATA_DIR", ".");
  std::string input;
  std::string output;
  auto* exp = app.add_subcommand("export", "Export stored points");
  exp->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  exp->add_option("--data", data_dir, "Data directory holding store.csv");
  exp->add_option("--input", input, "Persistence file (overrides --data)");
  exp->add_option("--output", output, "Write to file instead of stdout");

  std::string serve_config;
  std::string serve_speed;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API (SENSWICH_LISTEN, SENSWICH_PORT)");
  serve->add_option("--config", serve_config, "Start this scenario immediately");
  serve->add_option("--speed", serve_speed, "Real-time multiplier or 'max'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, speed, duration, out);
    if (*energy) return cmd_energy(profile, basis, as_json);
    if (*decode) return cmd_decode(payload);
    if (*exp) return cmd_export(format, data_dir, input, output);
    if (*serve) return cmd_serve(serve_config, serve_speed);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
