#include "senswich/energy.h"

#include <algorithm>

#include <fmt/format.h>

namespace senswich {

namespace {

PhaseProfile make_profile(std::string name, const std::array<double, 10>& currents,
                          double supply_v) {
  // Durations in milliseconds, shared by both profiles.
  constexpr std::array<std::int64_t, 10> kDurationsMs = {80000, 10000, 5120, 80000, 10000,
                                                         5120,  20000, 5120, 2000,  382640};
  PhaseProfile p;
  p.name = std::move(name);
  p.supply_v = supply_v;
  for (std::size_t i = 0; i < kPhaseOrder.size(); ++i) {
    p.steps.push_back({kPhaseOrder[i], SimDuration{kDurationsMs[i]}, currents[i]});
  }
  return p;
}

}  // namespace

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::PhStabilize: return "ph_stabilize";
    case Phase::PhPlusTb: return "ph_plus_tb";
    case Phase::AnalogReadA: return "analog_read_a";
    case Phase::DoStabilize: return "do_stabilize";
    case Phase::DoPlusLv: return "do_plus_lv";
    case Phase::AnalogReadB: return "analog_read_b";
    case Phase::EcStabilize: return "ec_stabilize";
    case Phase::AnalogReadC: return "analog_read_c";
    case Phase::LoRaTx: return "lora_tx";
    case Phase::Standby: return "standby";
  }
  return "unknown";
}

PhaseProfile PhaseProfile::regulator() {
  return make_profile("regulator", {18.2, 30, 39, 16.5, 26.1, 35, 24.7, 33.9, 41.8, 15.7}, 8.5);
}

PhaseProfile PhaseProfile::ideal() {
  return make_profile("ideal", {12.4, 26.5, 38.2, 10.2, 21.7, 33.2, 17, 28, 38, 9.3}, 5.25);
}

PhaseProfile PhaseProfile::by_name(std::string_view name) {
  if (name == "regulator") return regulator();
  if (name == "ideal") return ideal();
  throw std::invalid_argument(fmt::format("unknown profile '{}'", name));
}

SimDuration PhaseProfile::period() const {
  SimDuration total{0};
  for (const auto& s : steps) total += s.duration;
  return total;
}

const PhaseStep& PhaseProfile::step(Phase p) const {
  auto it = std::find_if(steps.begin(), steps.end(),
                         [p](const PhaseStep& s) { return s.phase == p; });
  if (it == steps.end()) {
    throw std::out_of_range(fmt::format("profile has no {} phase", phase_name(p)));
  }
  return *it;
}

SimDuration PhaseProfile::offset_of(Phase p) const {
  SimDuration offset{0};
  for (const auto& s : steps) {
    if (s.phase == p) return offset;
    offset += s.duration;
  }
  throw std::out_of_range(fmt::format("profile has no {} phase", phase_name(p)));
}

PhaseProfile PhaseProfile::with_period(SimDuration target) const {
  PhaseProfile p = *this;
  const SimDuration active = period() - step(Phase::Standby).duration;
  if (target < active) {
    throw std::invalid_argument(fmt::format(
        "sampling period {} s is shorter than the active phases ({} s)",
        format_seconds(target), format_seconds(active)));
  }
  for (auto& s : p.steps) {
    if (s.phase == Phase::Standby) s.duration = target - active;
  }
  return p;
}

double phase_energy(double duration_s, double current_ma, double supply_v) {
  return duration_s * current_ma * supply_v / 1000.0;
}

std::string_view basis_name(EnergyBasis b) {
  return b == EnergyBasis::Capacity ? "capacity" : "energy";
}

EnergyBasis parse_basis(std::string_view name) {
  if (name == "capacity") return EnergyBasis::Capacity;
  if (name == "energy") return EnergyBasis::Energy;
  throw std::invalid_argument(fmt::format("unknown basis '{}'", name));
}

EnergyReport energy_report(const PhaseProfile& profile, const BatteryPack& pack,
                           EnergyBasis basis) {
  const double period_s = to_seconds(profile.period());
  double charge_mas = 0.0;
  double energy_j = 0.0;
  for (const auto& s : profile.steps) {
    const double d = to_seconds(s.duration);
    charge_mas += s.current_ma * d;
    energy_j += phase_energy(d, s.current_ma, profile.supply_v);
  }
  if (period_s <= 0.0 || charge_mas <= 0.0) {
    throw ZeroConsumption("profile draws no current");
  }

  EnergyReport r;
  r.basis = basis;
  r.avg_current_ma = charge_mas / period_s;
  r.avg_power_mw = r.avg_current_ma * profile.supply_v;
  if (basis == EnergyBasis::Energy && r.avg_power_mw <= 0.0) {
    throw ZeroConsumption("profile draws no power");
  }
  r.energy_per_sample_mwh = energy_j / 3.6;  // 1 mWh = 3.6 J
  r.idle_power_mw = profile.step(Phase::Standby).current_ma * profile.supply_v;
  r.discharge_h = basis == EnergyBasis::Capacity ? pack.pack_capacity_mah() / r.avg_current_ma
                                                 : pack.pack_energy_mwh() / r.avg_power_mw;
  r.discharge_days = r.discharge_h / 24.0;
  return r;
}

}  // namespace senswich
