#include "senswich/node.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace senswich {

namespace {

struct RelayAction {
  Phase at_start_of;
  int relay;
  bool set;
};

// pH/TB: K1 powers the pH probe, K2 routes it to the ADC and powers TB.
// DO/LV: K3 powers DO, K2 routes. EC: K1 and K3 together isolate the probe.
constexpr std::array<RelayAction, 12> kRelayPlan = {{
    {Phase::PhStabilize, 1, true},
    {Phase::PhPlusTb, 2, true},
    {Phase::DoStabilize, 1, false},
    {Phase::DoStabilize, 2, false},
    {Phase::DoStabilize, 3, true},
    {Phase::DoPlusLv, 2, true},
    {Phase::EcStabilize, 3, false},
    {Phase::EcStabilize, 2, false},
    {Phase::EcStabilize, 1, true},
    {Phase::EcStabilize, 3, true},
    {Phase::LoRaTx, 1, false},
    {Phase::LoRaTx, 3, false},
}};

struct ReadWindow {
  Phase phase;
  Sensor first;
  Sensor second;
};

constexpr std::array<ReadWindow, 3> kReadWindows = {{
    {Phase::AnalogReadA, Sensor::Ph, Sensor::Turbidity},
    {Phase::AnalogReadB, Sensor::Do, Sensor::LiquidLevel},
    {Phase::AnalogReadC, Sensor::Ec, Sensor::Temperature},
}};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

std::string_view gps_state_name(const GpsState& s) {
  if (std::holds_alternative<GpsOff>(s)) return "off";
  if (std::holds_alternative<GpsSearching>(s)) return "searching";
  return "fix_pending";
}

std::string_view event_kind_name(NodeEventKind k) {
  switch (k) {
    case NodeEventKind::PhaseStart: return "phase_start";
    case NodeEventKind::RelaySet: return "relay_set";
    case NodeEventKind::RelayReset: return "relay_reset";
    case NodeEventKind::CommandReceived: return "command_received";
    case NodeEventKind::GpsSearchStart: return "gps_search_start";
    case NodeEventKind::GpsFix: return "gps_fix";
    case NodeEventKind::GpsNoFix: return "gps_no_fix";
  }
  return "unknown";
}

std::int64_t charge_uams(double current_ma, SimDuration d) {
  // current in microamps (profile currents have 0.1 mA resolution)
  return std::llround(current_ma * 1000.0) * d.count();
}

double EnergyLedger::charge_mas() const {
  return static_cast<double>(cycle_charge_uams + gps_charge_uams) / 1e6;
}

double EnergyLedger::energy_j() const {
  return charge_mas() * supply_v / 1000.0;
}

double EnergyLedger::cycle_energy_j() const {
  return static_cast<double>(cycle_charge_uams) / 1e6 * supply_v / 1000.0;
}

double EnergyLedger::gps_energy_j() const {
  return static_cast<double>(gps_charge_uams) / 1e6 * supply_v / 1000.0;
}

double EnergyLedger::consumed_mah() const {
  return charge_mas() / 3600.0;
}

void validate(const NodeConfig& c) {
  require(!c.device_id.empty(), "device_id: must not be empty");
  require(c.position.lat >= -90.0 && c.position.lat <= 90.0,
          fmt::format("{}.lat: {} outside [-90, 90]", c.device_id, c.position.lat));
  require(c.position.lon >= -180.0 && c.position.lon <= 180.0,
          fmt::format("{}.lon: {} outside [-180, 180]", c.device_id, c.position.lon));
  require(c.first_wake.count() >= 0, fmt::format("{}.first_wake_s: must be >= 0", c.device_id));
  require(c.fport >= kMinFPort && c.fport <= kMaxFPort,
          fmt::format("{}.fport: {} outside [1, 223]", c.device_id, c.fport));
  PhaseProfile profile;
  try {
    profile = PhaseProfile::by_name(c.profile);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("{}.profile: {}", c.device_id, e.what()));
  }
  const SimDuration active = profile.period() - profile.step(Phase::Standby).duration;
  require(c.sampling_period >= active,
          fmt::format("{}.sampling_period_s: {} s is shorter than the {} s acquisition",
                      c.device_id, format_seconds(c.sampling_period), format_seconds(active)));
  for (std::size_t i = 0; i < c.calibration.size(); ++i) {
    require(c.calibration[i].gain != 0.0 && std::isfinite(c.calibration[i].gain) &&
                std::isfinite(c.calibration[i].offset),
            fmt::format("{}.calibration.{}: gain must be finite and non-zero", c.device_id,
                        sensor_name(static_cast<Sensor>(i))));
  }
  require(c.pack.cell_capacity_mah > 0 && c.pack.cell_energy_wh > 0 && c.pack.series > 0 &&
              c.pack.parallel > 0,
          fmt::format("{}.battery: capacities and cell counts must be positive", c.device_id));
  require(c.gps.current_ma >= 0, fmt::format("{}.gps.current_ma: must be >= 0", c.device_id));
  require(c.gps.ttf_min_s >= 0 && c.gps.ttf_max_s > c.gps.ttf_min_s,
          fmt::format("{}.gps: need 0 <= ttf_min_s < ttf_max_s", c.device_id));
  require(c.gps.error_deg >= 0, fmt::format("{}.gps.error_deg: must be >= 0", c.device_id));
}

double read_sensor(EnvironmentModel& env, Sensor sensor, SimTime window_start,
                   const Calibration& calibration, std::mt19937_64& rng,
                   SimDuration window_len) {
  const double start_s = to_seconds(window_start);
  const double spacing_s = to_seconds(window_len) / kSamplesPerRead;
  const double sd = env.noise_sd(sensor);
  std::normal_distribution<double> noise(0.0, sd > 0.0 ? sd : 1.0);
  double sum = 0.0;
  for (int i = 0; i < kSamplesPerRead; ++i) {
    const double t = start_s + (i + 0.5) * spacing_s;
    double v = env.truth(sensor, t);
    if (sd > 0.0) v += noise(rng);
    sum += v;
  }
  return calibration.apply(sum / kSamplesPerRead);
}

Node::Node(NodeConfig config, std::uint64_t seed) {
  validate(config);
  state_.profile = PhaseProfile::by_name(config.profile).with_period(config.sampling_period);
  state_.ledger.supply_v = state_.profile.supply_v;
  std::seed_seq seq{seed, std::uint64_t{0x4E0DE}};
  state_.rng.seed(seq);
  state_.config = std::move(config);
}

CycleResult Node::run_cycle(EnvironmentModel& env, SimTime t0) {
  if (state_.cycle_start && t0 < *state_.cycle_start + state_.profile.period()) {
    throw std::logic_error(fmt::format("{}: wake at {} s while a cycle is in progress",
                                       device_id(), format_seconds(t0)));
  }
  CycleResult result;
  if (std::holds_alternative<GpsSearching>(state_.gps)) step_gps(t0, result.events);

  const auto& id = device_id();
  const auto& cal = state_.config.calibration;
  auto cal_of = [&](Sensor s) { return cal[static_cast<std::size_t>(s)]; };

  SimTime t = t0;
  for (const auto& step : state_.profile.steps) {
    for (const auto& action : kRelayPlan) {
      if (action.at_start_of != step.phase) continue;
      state_.relays.set(static_cast<std::size_t>(action.relay - 1), action.set);
      NodeEvent e;
      e.time = t;
      e.device_id = id;
      e.kind = action.set ? NodeEventKind::RelaySet : NodeEventKind::RelayReset;
      e.relay = action.relay;
      result.events.push_back(std::move(e));
    }
    NodeEvent e;
    e.time = t;
    e.device_id = id;
    e.kind = NodeEventKind::PhaseStart;
    e.phase = step.phase;
    e.duration = step.duration;
    e.detail = fmt::format("relays={}", state_.relays.to_string());
    result.events.push_back(std::move(e));

    for (const auto& window : kReadWindows) {
      if (window.phase != step.phase) continue;
      const double a = read_sensor(env, window.first, t, cal_of(window.first), state_.rng,
                                   step.duration);
      const double b = read_sensor(env, window.second, t, cal_of(window.second), state_.rng,
                                   step.duration);
      switch (step.phase) {
        case Phase::AnalogReadA:
          result.sample.ph = a;
          result.sample.turbidity = b;
          break;
        case Phase::AnalogReadB:
          result.sample.do_mgl = a;
          result.sample.liquid_level = b >= 0.5;
          break;
        default:
          result.sample.ec = a;
          result.sample.temperature_c = b;
          break;
      }
    }
    if (step.phase == Phase::LoRaTx) {
      result.tx_start = t;
      result.tx_end = t + step.duration;
    }
    state_.ledger.cycle_charge_uams += charge_uams(step.current_ma, step.duration);
    t += step.duration;
  }

  if (auto* pending = std::get_if<GpsFixPending>(&state_.gps)) {
    result.sample.gps = pending->fix;
    state_.last_fix = pending->fix;
    state_.gps = GpsOff{};
  }
  result.payload = encode_sampleset(result.sample);

  state_.cycle_start = t0;
  ++state_.cycles;
  state_.last_sample = result.sample;
  return result;
}

void Node::handle_downlink(const Command& cmd, SimTime t, std::vector<NodeEvent>& events) {
  NodeEvent received;
  received.time = t;
  received.device_id = device_id();
  received.kind = NodeEventKind::CommandReceived;
  received.detail = cmd.kind == Command::Kind::ActivateGps ? "gps" : "unknown:" + cmd.text;
  events.push_back(std::move(received));
  state_.last_command = cmd;

  if (cmd.kind != Command::Kind::ActivateGps) return;
  if (!std::holds_alternative<GpsOff>(state_.gps)) return;

  const auto& g = state_.config.gps;
  std::optional<SimDuration> ttf;
  if (!g.never_fix) {
    std::uniform_real_distribution<double> dist(g.ttf_min_s, g.ttf_max_s);
    const SimDuration d = from_seconds(dist(state_.rng));
    if (d < kGpsSearchLimit) ttf = d;
  }
  state_.gps = GpsSearching{t, ttf};
  NodeEvent e;
  e.time = t;
  e.device_id = device_id();
  e.kind = NodeEventKind::GpsSearchStart;
  events.push_back(std::move(e));
}

void Node::step_gps(SimTime t, std::vector<NodeEvent>& events) {
  const auto* searching = std::get_if<GpsSearching>(&state_.gps);
  if (searching == nullptr) return;
  const SimDuration elapsed = t - searching->started_at;
  const auto& g = state_.config.gps;

  if (searching->time_to_fix && elapsed >= *searching->time_to_fix) {
    const SimDuration on_time = *searching->time_to_fix;
    const SimTime fix_time = searching->started_at + on_time;
    std::uniform_real_distribution<double> err(-g.error_deg, g.error_deg);
    lpp::GpsFix fix;
    fix.latitude = state_.config.position.lat;
    fix.longitude = state_.config.position.lon;
    if (g.error_deg > 0.0) {
      fix.latitude = std::clamp(fix.latitude + err(state_.rng), -90.0, 90.0);
      fix.longitude = std::clamp(fix.longitude + err(state_.rng), -180.0, 180.0);
    }
    fix.altitude = g.altitude_m;
    state_.ledger.gps_charge_uams += charge_uams(g.current_ma, on_time);
    state_.gps = GpsFixPending{fix};

    NodeEvent e;
    e.time = fix_time;
    e.device_id = device_id();
    e.kind = NodeEventKind::GpsFix;
    e.duration = on_time;
    e.detail = fmt::format("{:.4f},{:.4f}", fix.latitude, fix.longitude);
    events.push_back(std::move(e));
    return;
  }
  if (elapsed >= kGpsSearchLimit) {
    const SimTime off_time = searching->started_at + kGpsSearchLimit;
    state_.ledger.gps_charge_uams += charge_uams(g.current_ma, kGpsSearchLimit);
    state_.gps = GpsOff{};
    NodeEvent e;
    e.time = off_time;
    e.device_id = device_id();
    e.kind = NodeEventKind::GpsNoFix;
    e.duration = kGpsSearchLimit;
    events.push_back(std::move(e));
  }
}

std::optional<SimTime> Node::gps_deadline() const {
  const auto* searching = std::get_if<GpsSearching>(&state_.gps);
  if (searching == nullptr) return std::nullopt;
  const SimDuration limit =
      searching->time_to_fix ? std::min(*searching->time_to_fix, kGpsSearchLimit) : kGpsSearchLimit;
  return searching->started_at + limit;
}

std::optional<Phase> Node::phase_at(SimTime t) const {
  if (!state_.cycle_start || t < *state_.cycle_start) return std::nullopt;
  SimDuration offset = t - *state_.cycle_start;
  for (const auto& step : state_.profile.steps) {
    if (offset < step.duration) return step.phase;
    offset -= step.duration;
  }
  return std::nullopt;
}

SimTime Node::next_wake() const {
  if (!state_.cycle_start) return state_.config.first_wake;
  return *state_.cycle_start + state_.profile.period();
}

double Node::battery_remaining_percent() const {
  const double capacity = state_.config.pack.pack_capacity_mah();
  const double pct = 100.0 * (1.0 - state_.ledger.consumed_mah() / capacity);
  return std::clamp(pct, 0.0, 100.0);
}

}  // namespace senswich
