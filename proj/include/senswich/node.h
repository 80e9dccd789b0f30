#pragma once

// The virtual SENSWICH device: an RTC-woken acquisition cycle over the phase
// profile, relay choreography, 256-sample averaged reads, on-demand GPS and
// an energy ledger.

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "senswich/energy.h"
#include "senswich/environment.h"
#include "senswich/lpp.h"
#include "senswich/payload.h"
#include "senswich/sim_time.h"

namespace senswich {

inline constexpr int kSamplesPerRead = 256;
inline constexpr SimDuration kReadWindow{5120};
inline constexpr SimDuration kSampleSpacing{20};
inline constexpr SimDuration kGpsSearchLimit{300000};
inline constexpr SimDuration kDefaultSamplingPeriod{600000};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

struct Calibration {
  double gain = 1.0;
  double offset = 0.0;

  double apply(double raw) const { return gain * raw + offset; }
};

using CalibrationTable = std::array<Calibration, kSensorCount>;

struct GpsConfig {
  double current_ma = 40.0;  // receiver draw while searching (assumed)
  double ttf_min_s = 30.0;
  double ttf_max_s = 300.0;  // time-to-fix ~ U[min, max)
  bool never_fix = false;    // scenario knob: receiver cannot get a fix
  double error_deg = 0.0;    // uniform per-axis position error bound
  double altitude_m = 0.0;
};

struct NodeConfig {
  std::string device_id;
  GeoPoint position;
  SimDuration sampling_period = kDefaultSamplingPeriod;
  SimTime first_wake{0};
  CalibrationTable calibration{};
  BatteryPack pack{};
  std::string profile = "regulator";
  GpsConfig gps{};
  int fport = 1;
};

// Throws std::invalid_argument naming the offending field.
void validate(const NodeConfig& config);

struct GpsOff {
  bool operator==(const GpsOff&) const = default;
};
struct GpsSearching {
  SimTime started_at;
  std::optional<SimDuration> time_to_fix;  // nullopt: no fix this activation
  bool operator==(const GpsSearching&) const = default;
};
struct GpsFixPending {
  lpp::GpsFix fix;
  bool operator==(const GpsFixPending&) const = default;
};
using GpsState = std::variant<GpsOff, GpsSearching, GpsFixPending>;

std::string_view gps_state_name(const GpsState& s);

enum class NodeEventKind {
  PhaseStart,
  RelaySet,
  RelayReset,
  CommandReceived,
  GpsSearchStart,
  GpsFix,
  GpsNoFix,
};

std::string_view event_kind_name(NodeEventKind k);

struct NodeEvent {
  SimTime time{0};
  std::string device_id;
  NodeEventKind kind = NodeEventKind::PhaseStart;
  std::optional<Phase> phase;  // PhaseStart
  SimDuration duration{0};     // PhaseStart
  int relay = 0;               // RelaySet / RelayReset, 1..3
  std::string detail;

  bool operator==(const NodeEvent&) const = default;
};

// Charge is kept in integer microamp-milliseconds (nC) so accumulation over
// any number of cycles is exact.
struct EnergyLedger {
  std::int64_t cycle_charge_uams = 0;
  std::int64_t gps_charge_uams = 0;
  double supply_v = 0.0;

  double charge_mas() const;      // cycle + GPS, mA*s
  double energy_j() const;        // cycle + GPS
  double cycle_energy_j() const;
  double gps_energy_j() const;
  double consumed_mah() const;

  bool operator==(const EnergyLedger&) const = default;
};

std::int64_t charge_uams(double current_ma, SimDuration d);

struct NodeState {
  NodeConfig config;
  PhaseProfile profile;
  std::optional<SimTime> cycle_start;
  std::uint64_t cycles = 0;
  std::bitset<3> relays;  // bit i = K(i+1) set
  GpsState gps = GpsOff{};
  std::optional<Command> last_command;
  EnergyLedger ledger;
  std::optional<SampleSet> last_sample;
  std::optional<lpp::GpsFix> last_fix;
  std::mt19937_64 rng;
};

struct CycleResult {
  SampleSet sample;
  std::vector<std::uint8_t> payload;
  std::vector<NodeEvent> events;
  SimTime tx_start{0};
  SimTime tx_end{0};
};

// Mean of 256 noisy samples taken at the centres of 20 ms slots across the
// window, then calibrated.
double read_sensor(EnvironmentModel& env, Sensor sensor, SimTime window_start,
                   const Calibration& calibration, std::mt19937_64& rng,
                   SimDuration window_len = kReadWindow);

class Node {
 public:
  Node(NodeConfig config, std::uint64_t seed);

  const NodeState& state() const { return state_; }
  const std::string& device_id() const { return state_.config.device_id; }
  void restore(NodeState state) { state_ = std::move(state); }

  // Precondition: the node is idle at t0 (no cycle in progress).
  CycleResult run_cycle(EnvironmentModel& env, SimTime t0);

  void handle_downlink(const Command& cmd, SimTime t, std::vector<NodeEvent>& events);
  void step_gps(SimTime t, std::vector<NodeEvent>& events);
  // When step_gps must next be evaluated, if searching.
  std::optional<SimTime> gps_deadline() const;

  // nullopt while idle.
  std::optional<Phase> phase_at(SimTime t) const;
  SimTime next_wake() const;
  double battery_remaining_percent() const;

 private:
  NodeState state_;
};

}  // namespace senswich
