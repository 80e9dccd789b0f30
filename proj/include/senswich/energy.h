#pragma once

// Per-phase power profiles of the SENSWICH node and the derived battery
// metrics (average current/power, energy per sample, discharge time).

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "senswich/sim_time.h"

namespace senswich {

enum class Phase {
  PhStabilize,
  PhPlusTb,
  AnalogReadA,
  DoStabilize,
  DoPlusLv,
  AnalogReadB,
  EcStabilize,
  AnalogReadC,
  LoRaTx,
  Standby,
};

inline constexpr std::array<Phase, 10> kPhaseOrder = {
    Phase::PhStabilize, Phase::PhPlusTb,    Phase::AnalogReadA, Phase::DoStabilize,
    Phase::DoPlusLv,    Phase::AnalogReadB, Phase::EcStabilize, Phase::AnalogReadC,
    Phase::LoRaTx,      Phase::Standby};

std::string_view phase_name(Phase p);

struct PhaseStep {
  Phase phase;
  SimDuration duration;
  double current_ma;
};

struct PhaseProfile {
  std::string name;
  std::vector<PhaseStep> steps;  // kPhaseOrder order
  double supply_v = 0.0;

  // Measured with the 8.5 V regulator path.
  static PhaseProfile regulator();
  // Estimated direct 5.25 V supply.
  static PhaseProfile ideal();
  // "regulator" | "ideal"; throws std::invalid_argument otherwise.
  static PhaseProfile by_name(std::string_view name);

  SimDuration period() const;
  const PhaseStep& step(Phase p) const;
  // Offset of the phase start from wake-up.
  SimDuration offset_of(Phase p) const;

  // Same profile with Standby stretched/shrunk so the cycle lasts `period`.
  // Throws std::invalid_argument if the active phases do not fit.
  PhaseProfile with_period(SimDuration period) const;
};

struct BatteryPack {
  double cell_capacity_mah = 3200.0;
  double cell_energy_wh = 11.5;
  double nominal_cell_v = 3.7;
  int series = 2;
  int parallel = 4;

  double pack_capacity_mah() const { return parallel * cell_capacity_mah; }
  double pack_energy_mwh() const { return series * parallel * cell_energy_wh * 1000.0; }
};

// duration [s] * current [mA] * supply [V] / 1000 -> joules
double phase_energy(double duration_s, double current_ma, double supply_v);

enum class EnergyBasis { Capacity, Energy };

std::string_view basis_name(EnergyBasis b);
EnergyBasis parse_basis(std::string_view name);

struct EnergyReport {
  double idle_power_mw = 0.0;
  double energy_per_sample_mwh = 0.0;
  double avg_current_ma = 0.0;
  double avg_power_mw = 0.0;
  double discharge_h = 0.0;
  double discharge_days = 0.0;
  EnergyBasis basis = EnergyBasis::Capacity;
};

class ZeroConsumption : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

EnergyReport energy_report(const PhaseProfile& profile, const BatteryPack& pack,
                           EnergyBasis basis);

}  // namespace senswich
