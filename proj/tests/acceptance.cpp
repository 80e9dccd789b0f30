// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any
// failure. Tolerances are fixed here.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "senswich/base64.h"
#include "senswich/energy.h"
#include "senswich/json_io.h"
#include "senswich/link.h"
#include "senswich/lpp.h"
#include "senswich/node.h"
#include "senswich/payload.h"
#include "senswich/pipeline.h"
#include "senswich/scenario.h"
#include "senswich/simulation.h"
#include "senswich/store.h"

using namespace senswich;
using namespace std::chrono_literals;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = fmt::format("exception: {}", e.what());
  }
  if (!o.pass) ++failures;
  fmt::print("{} {}{}\n", o.pass ? "PASS" : "FAIL", name, o.detail.empty() ? "" : " | " + o.detail);
}

bool within_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

struct EnergyRow {
  const char* name;
  double joules;
};

Outcome check_energy_table(const PhaseProfile& profile, const std::array<EnergyRow, 10>& table) {
  Outcome o;
  double worst = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& step = profile.steps[i];
    const double e = phase_energy(to_seconds(step.duration), step.current_ma, profile.supply_v);
    const double diff = std::abs(e - table[i].joules);
    worst = std::max(worst, diff);
    o.require(diff <= 0.01, fmt::format("{}: {:.4f} J vs {} J", table[i].name, e, table[i].joules));
  }
  if (o.pass) o.detail = fmt::format("10 rows, max |diff| {:.4f} J <= 0.01 J", worst);
  return o;
}

struct ReportRow {
  const char* name;
  double got;
  double want;
};

Outcome check_report(const EnergyReport& r, const std::array<double, 6>& want) {
  const std::array<ReportRow, 6> rows = {{{"idle_power_mw", r.idle_power_mw, want[0]},
                                          {"energy_per_sample_mwh", r.energy_per_sample_mwh, want[1]},
                                          {"avg_current_ma", r.avg_current_ma, want[2]},
                                          {"avg_power_mw", r.avg_power_mw, want[3]},
                                          {"discharge_h", r.discharge_h, want[4]},
                                          {"discharge_days", r.discharge_days, want[5]}}};
  Outcome o;
  std::vector<std::string> parts;
  for (const auto& row : rows) {
    o.require(within_rel(row.got, row.want, 0.005), fmt::format("{} {:.4f} vs {}", row.name, row.got, row.want));
    parts.push_back(fmt::format("{}={:.3f}", row.name, row.got));
  }
  if (o.pass) o.detail = fmt::format("{} (all within 0.5%)", fmt::join(parts, " "));
  return o;
}

ScenarioConfig one_node(SimDuration duration, std::uint64_t seed) {
  ScenarioConfig c;
  NodeSpec n;
  n.node.device_id = "node-1";
  n.node.position = {45.4408, 12.3155};
  c.nodes.push_back(n);
  c.gateways.push_back({"gw-venezia", {45.434, 12.338}, 15.0});
  c.duration = duration;
  c.seed = seed;
  return c;
}

GeoPoint offset_north(GeoPoint p, double km) {
  return {p.lat + km / kEarthRadiusKm * 180.0 / 3.14159265358979323846, p.lon};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
  criterion("energy-table-regulator", [] {
    return check_energy_table(PhaseProfile::regulator(),
                              {{{"pH", 12.37}, {"pH+TB", 2.55}, {"AnalogRead", 1.69}, {"DO", 11.22},
                                {"DO+LV", 2.21}, {"AnalogRead", 1.52}, {"EC", 4.19}, {"AnalogRead", 1.47},
                                {"LoRaTX", 0.71}, {"Standby", 51.06}}});
  });

  criterion("energy-table-ideal", [] {
    return check_energy_table(PhaseProfile::ideal(),
                              {{{"pH", 5.208}, {"pH+TB", 1.39}, {"AnalogRead", 1.02}, {"DO", 4.28},
                                {"DO+LV", 1.13}, {"AnalogRead", 0.89}, {"EC", 1.78}, {"AnalogRead", 0.75},
                                {"LoRaTX", 0.39}, {"Standby", 18.68}}});
  });

  criterion("power-summary-regulator-capacity-basis", [] {
    return check_report(energy_report(PhaseProfile::regulator(), BatteryPack{}, EnergyBasis::Capacity),
                        {133.45, 24.73, 17.45, 148.38, 733.20, 30.55});
  });

  criterion("power-summary-ideal-energy-basis", [] {
    return check_report(energy_report(PhaseProfile::ideal(), BatteryPack{}, EnergyBasis::Energy),
                        {48.82, 9.87, 11.28, 59.267, 1552.27, 64.67});
  });

  criterion("cycle-timing", [] {
    Outcome o;
    NodeConfig cfg;
    cfg.device_id = "node-1";
    Node node(cfg, 1);
    auto env = Environment::lagoon_defaults(1);
    const auto cycle = node.run_cycle(env, 0ms);
    const auto profile = PhaseProfile::regulator();
    std::vector<NodeEvent> starts;
    for (const auto& e : cycle.events) {
      if (e.kind == NodeEventKind::PhaseStart) starts.push_back(e);
    }
    o.require(starts.size() == profile.steps.size(), fmt::format("{} phase events", starts.size()));
    SimTime expected{0};
    for (std::size_t i = 0; i < std::min(starts.size(), profile.steps.size()); ++i) {
      o.require(starts[i].phase == profile.steps[i].phase && starts[i].time == expected &&
                    starts[i].duration == profile.steps[i].duration,
                fmt::format("phase {} mismatch", i));
      expected += profile.steps[i].duration;
    }
    o.require(expected == 600000ms, fmt::format("total {} s", format_seconds(expected)));
    o.require(cycle.tx_start == 215360ms && cycle.tx_end == 217360ms,
              fmt::format("tx [{}, {}]", format_seconds(cycle.tx_start), format_seconds(cycle.tx_end)));
    if (o.pass) {
      o.detail = fmt::format("10 phases in order, total {} s, tx [{}, {}] s", format_seconds(expected),
                             format_seconds(cycle.tx_start), format_seconds(cycle.tx_end));
    }
    return o;
  });

  criterion("codec-properties", [] {
    Outcome o;
    std::mt19937_64 rng(20240101);
    std::uniform_int_distribution<int> channel(0, 255), kind(0, 3), byte(0, 255);
    std::uniform_real_distribution<double> analog(-327.68, 327.67), temp(-3276.8, 3276.7),
        lat(-90.0, 90.0), lon(-180.0, 180.0), alt(-83886.08, 83886.07);
    int bad = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto ch = static_cast<std::uint8_t>(channel(rng));
      lpp::LppRecord r;
      double res = 0.0;
      switch (kind(rng)) {
        case 0: r = lpp::LppRecord::digital(ch, static_cast<std::uint8_t>(byte(rng))); res = 1.0; break;
        case 1: r = lpp::LppRecord::analog(ch, analog(rng)); res = 0.01; break;
        case 2: r = lpp::LppRecord::temperature(ch, temp(rng)); res = 0.1; break;
        default: r = lpp::LppRecord::position(ch, {lat(rng), lon(rng), alt(rng)}); res = 1e-4; break;
      }
      const auto bytes = lpp::encode_record(r);
      const auto back = lpp::decode_payload(bytes);
      const double tol = res / 2.0 + 1e-9;
      bool ok = back.size() == 1 && back[0].channel == r.channel && back[0].type == r.type &&
                bytes.size() == lpp::record_size(r.type);
      if (ok && r.type == lpp::LppType::Gps) {
        ok = std::abs(back[0].gps.latitude - r.gps.latitude) <= tol &&
             std::abs(back[0].gps.longitude - r.gps.longitude) <= tol &&
             std::abs(back[0].gps.altitude - r.gps.altitude) <= 0.005 + 1e-9;
      } else if (ok) {
        ok = std::abs(back[0].value - r.value) <= tol;
      }
      if (!ok) ++bad;
    }
    o.require(bad == 0, fmt::format("{} of 10000 random records failed the round trip", bad));

    const std::vector<std::pair<lpp::LppRecord, std::string>> golden = {
        {lpp::LppRecord::temperature(6, 27.2), "06 67 01 10"},
        {lpp::LppRecord::position(7, {45.4408, 12.3155, 0.0}), "07 88 06 EF 08 01 E1 13 00 00 00"},
        {lpp::LppRecord::analog(1, -3.21), "01 02 FE BF"},
    };
    for (const auto& [record, hex] : golden) {
      const auto got = lpp::to_hex(lpp::encode_record(record));
      o.require(got == hex, fmt::format("golden {} encoded as {}", hex, got));
    }

    SampleSet s;
    s.ph = 8.12;
    s.ec = 45.3;
    s.turbidity = 1500.0;
    s.do_mgl = 7.8;
    s.liquid_level = true;
    s.temperature_c = 18.4;
    const auto periodic = encode_sampleset(s).size();
    s.gps = lpp::GpsFix{45.4408, 12.3155, 1.5};
    const auto with_gps = encode_sampleset(s).size();
    o.require(periodic == 23 && with_gps == 34, fmt::format("payload sizes {} / {}", periodic, with_gps));
    o.require(periodic <= 51 && with_gps <= 51, "payload exceeds 51 bytes");
    if (o.pass) {
      o.detail = fmt::format("10000 random records round-trip, 3 golden vectors exact, payloads {} B / {} B <= 51 B",
                             periodic, with_gps);
    }
    return o;
  });

  criterion("gps-downlink-end-to-end", [] {
    Outcome o;
    const double error_deg = 0.0005;
    auto cfg = one_node(2h, 11);
    cfg.nodes[0].node.gps.error_deg = error_deg;
    Simulation sim(cfg);
    sim.run_until(100s);
    sim.enqueue_downlink("node-1", 1, "Z3Bz");
    sim.run();

    const auto& delivered = sim.downlinks().delivered();
    o.require(delivered.size() == 1, fmt::format("{} commands delivered", delivered.size()));
    std::set<SimTime> rx_windows;
    for (const auto& u : sim.uplinks()) rx_windows.insert(u.tx_end + cfg.rx_delay);
    for (const auto& d : delivered) {
      o.require(d.delivered_at && rx_windows.count(*d.delivered_at) == 1, "delivery outside an rx window");
    }
    std::optional<SimTime> search, fix;
    for (const auto& e : sim.events()) {
      if (e.kind == NodeEventKind::GpsSearchStart) search = e.time;
      if (e.kind == NodeEventKind::GpsFix) fix = e.time;
    }
    o.require(search && fix, "no search/fix events");
    if (search && fix) o.require(*fix - *search <= kGpsSearchLimit, "search longer than 300 s");

    // Points stored per uplink, relative to the plain six.
    std::map<SimTime, int> per_uplink;
    for (const auto& p : sim.store().all_points()) ++per_uplink[p.time];
    int gps_uplinks = 0;
    for (const auto& [t, n] : per_uplink) {
      if (n == 9) ++gps_uplinks;
      else o.require(n == 6, fmt::format("{} points at {} s", n, format_seconds(t)));
    }
    o.require(gps_uplinks == 1, fmt::format("{} uplinks carried gps", gps_uplinks));
    const auto lat = sim.store().query("node-1", "gps_lat", 0ms, sim.end(), Aggregation::Raw);
    const auto lon = sim.store().query("node-1", "gps_lon", 0ms, sim.end(), Aggregation::Raw);
    const double tol = 1e-4 + error_deg;
    o.require(lat.size() == 1 && lon.size() == 1, "gps series missing");
    if (lat.size() == 1 && lon.size() == 1) {
      o.require(std::abs(lat[0].value - 45.4408) <= tol && std::abs(lon[0].value - 12.3155) <= tol,
                fmt::format("fix ({}, {}) off position", lat[0].value, lon[0].value));
      o.require(fix && lat[0].time > *fix, "gps points precede the fix");
    }

    // A receiver that never fixes.
    auto nofix_cfg = one_node(2h, 11);
    nofix_cfg.nodes[0].node.gps.never_fix = true;
    Simulation nofix(nofix_cfg);
    nofix.run_until(100s);
    nofix.enqueue_downlink("node-1", 1, "Z3Bz");
    nofix.run();
    int nofix_events = 0;
    std::optional<SimTime> nofix_search, nofix_end;
    for (const auto& e : nofix.events()) {
      if (e.kind == NodeEventKind::GpsSearchStart) nofix_search = e.time;
      if (e.kind == NodeEventKind::GpsNoFix) {
        ++nofix_events;
        nofix_end = e.time;
      }
    }
    o.require(nofix_events == 1, fmt::format("{} NoFix events", nofix_events));
    if (nofix_search && nofix_end) o.require(*nofix_end - *nofix_search <= kGpsSearchLimit, "no-fix search > 300 s");
    o.require(nofix.store().query("node-1", "gps_lat", 0ms, nofix.end(), Aggregation::Raw).empty(),
              "gps points stored without a fix");
    if (o.pass) {
      o.detail = fmt::format("delivered at {} s, fix after {} s, 3 gps points within {:.4f} deg; no-fix run: NoFix, 0 gps points",
                             format_seconds(*delivered[0].delivered_at), format_seconds(*fix - *search), tol);
    }
    return o;
  });

  criterion("pipeline-routing", [] {
    Outcome o;
    TimeSeriesStore store;
    Broker broker;
    auto ok_sub = broker.subscribe("lorawan");
    auto err_sub = broker.subscribe("lorawan/error");
    Pipeline pipeline(store, broker);
    std::mt19937_64 rng(77);
    auto env = Environment::lagoon_defaults(77);
    NodeConfig cfg;
    cfg.device_id = "node-1";
    Node node(cfg, 77);

    std::vector<std::pair<std::string, SimTime>> sent;
    for (int i = 0; i < 100; ++i) {
      const auto cycle = node.run_cycle(env, SimTime{600000LL * i});
      sent.emplace_back(base64_encode(cycle.payload), cycle.tx_end);
    }
    // Corruptions: truncation, bad alphabet, unknown type, unmapped channel.
    for (int i = 0; i < 100; ++i) {
      std::string b64 = sent[static_cast<std::size_t>(i)].first;
      switch (i % 4) {
        case 0: b64.resize(b64.size() - 1); break;
        case 1: b64[rng() % b64.size()] = '*'; break;
        case 2: {
          auto bytes = base64_decode(b64);
          bytes[1] = 0x55;
          b64 = base64_encode(bytes);
          break;
        }
        default: {
          auto bytes = base64_decode(b64);
          bytes[0] = 0x42;
          b64 = base64_encode(bytes);
          break;
        }
      }
      sent.emplace_back(b64, SimTime{600000LL * (100 + i)} + 217360ms);
    }
    std::shuffle(sent.begin(), sent.end(), rng);
    std::uint32_t fcnt = 0;
    for (const auto& [b64, t] : sent) {
      UplinkMessage m;
      m.device_id = "node-1";
      m.fcnt = fcnt++;
      m.payload_b64 = b64;
      pipeline.ingest(m, t);
    }

    // Brute-force recount: decode each frame independently and count what should land.
    std::size_t expect_ok = 0, expect_points = 0;
    for (const auto& [b64, t] : sent) {
      try {
        const auto recs = lpp::decode_payload(base64_decode(b64));
        expect_points += to_measurements(recs, ChannelMap::standard()).size();
        ++expect_ok;
      } catch (const std::exception&) {
      }
    }
    std::size_t stored = 0;
    for (const auto s : kAllSeries) stored += store.query("node-1", s, 0ms, SimTime{1LL << 50}, Aggregation::Raw).size();

    const auto on_ok = ok_sub->drain().size();
    const auto on_err = err_sub->drain().size();
    o.require(on_ok == 100 && on_err == 100, fmt::format("lorawan={} lorawan/error={}", on_ok, on_err));
    o.require(stored == 600 && store.size() == 600, fmt::format("{} points stored", stored));
    o.require(expect_ok == on_ok && expect_points == stored,
              fmt::format("recount {} ok / {} points", expect_ok, expect_points));
    if (o.pass) o.detail = fmt::format("lorawan={} lorawan/error={} points={} (recount agrees)", on_ok, on_err, stored);
    return o;
  });

  criterion("coverage", [] {
    Outcome o;
    const GeoPoint gw_pos{45.434, 12.338};
    const std::vector<Gateway> one{{"gw-a", gw_pos, 15.0}};
    UplinkFrame f;
    f.device_id = "n";
    const bool near = deliver_uplink(f, offset_north(gw_pos, 5.0), one).delivered();
    const bool far = deliver_uplink(f, offset_north(gw_pos, 20.0), one).delivered();
    o.require(near, "5 km frame dropped");
    o.require(!far, "20 km frame delivered");

    auto cfg = one_node(6h, 5);
    cfg.gateways = {{"gw-a", offset_north(cfg.nodes[0].node.position, 3.0), 15.0},
                    {"gw-b", offset_north(cfg.nodes[0].node.position, -4.0), 15.0}};
    Simulation sim(cfg);
    sim.run();
    std::size_t both = 0;
    for (const auto& u : sim.uplinks()) both += u.received_by.size() == 2;
    std::map<std::tuple<std::string, Series, SimTime>, int> seen;
    for (const auto& p : sim.store().all_points()) ++seen[{p.device_id, p.series, p.time}];
    const bool once = std::all_of(seen.begin(), seen.end(), [](const auto& kv) { return kv.second == 1; });
    o.require(both == sim.uplinks().size(), "not every uplink heard by both gateways");
    o.require(sim.store().size() == 6 * sim.uplinks().size() && once,
              fmt::format("{} points for {} uplinks", sim.store().size(), sim.uplinks().size()));
    o.require(sim.pipeline().error_count() == 0, "duplicate copies reached the pipeline");

    auto out_cfg = one_node(6h, 5);
    out_cfg.nodes[0].node.position = offset_north(out_cfg.gateways[0].position, 20.0);
    Simulation out(out_cfg);
    out.run();
    o.require(out.store().size() == 0, "out-of-range node stored points");
    if (o.pass) {
      o.detail = fmt::format("5 km delivered, 20 km dropped, {} uplinks via 2 gateways stored once ({} points)",
                             sim.uplinks().size(), sim.store().size());
    }
    return o;
  });

  Simulation* month_run = nullptr;
  std::unique_ptr<Simulation> month_holder;
  criterion("determinism-and-speed", [&] {
    Outcome o;
    const auto base = std::filesystem::temp_directory_path() / "senswich_acceptance";
    std::filesystem::remove_all(base);
    std::vector<std::filesystem::path> dirs;
    for (int run = 0; run < 2; ++run) {
      auto cfg = default_scenario();
      Simulation sim(cfg);
      sim.enqueue_downlink("node-2", 1, "Z3Bz");
      sim.run();
      dirs.push_back(base / fmt::format("run{}", run));
      write_run_outputs(sim, dirs.back().string());
    }
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      o.require(slurp(entry.path()) == slurp(dirs[1] / name), fmt::format("{} differs", name.string()));
      ++files;
    }
    o.require(files >= 5, fmt::format("only {} export files", files));
    std::filesystem::remove_all(base);

    auto cfg = one_node(std::chrono::hours(24 * 30), 42);
    const auto wall_start = std::chrono::steady_clock::now();
    month_holder = std::make_unique<Simulation>(cfg);
    month_holder->run();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    month_run = month_holder.get();
    const auto cycles = month_run->node("node-1").state().cycles;
    o.require(cycles == 4320, fmt::format("{} cycles", cycles));
    o.require(wall < 10.0, fmt::format("30-day run took {:.2f} s", wall));
    if (o.pass) o.detail = fmt::format("{} export files identical; 30 days = {} cycles in {:.2f} s", files, cycles, wall);
    return o;
  });

  criterion("duty-cycle", [&] {
    Outcome o;
    if (!month_run) {
      month_holder = std::make_unique<Simulation>(one_node(std::chrono::hours(24 * 30), 42));
      month_holder->run();
      month_run = month_holder.get();
    }
    const auto log = month_run->tx_log("node-1");
    const double dc = duty_cycle(log, month_run->end() - SimTime{0});
    o.require(std::abs(dc - 2.0 / 600.0) <= 1e-9, fmt::format("duty cycle {:.12f}", dc));
    o.require(dc < 0.01, "duty cycle >= 1%");
    if (o.pass) o.detail = fmt::format("{:.12f} over {} transmissions (2/600 = {:.12f}), < 1%", dc, log.size(), 2.0 / 600.0);
    return o;
  });

  fmt::print("{} failed\n", failures);
  return failures == 0 ? 0 : 1;
}
