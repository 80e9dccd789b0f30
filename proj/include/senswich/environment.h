#pragma once

// Ground-truth water signals seen by a node's probes.

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string_view>
#include <vector>

namespace senswich {

// J6 is the spare analog input: wired on the board, never scheduled.
enum class Sensor : std::uint8_t { Ph, Ec, Turbidity, Do, LiquidLevel, Temperature, J6 };

inline constexpr std::size_t kSensorCount = 7;

std::string_view sensor_name(Sensor s);

class EnvironmentModel {
 public:
  virtual ~EnvironmentModel() = default;
  // Noise-free value at simulated time t (seconds).
  virtual double truth(Sensor sensor, double t_s) = 0;
  // Standard deviation of the per-sample measurement noise.
  virtual double noise_sd(Sensor sensor) const = 0;
};

struct SignalSpec {
  enum class Kind { Constant, Linear, Sinusoid, RandomWalk };
  Kind kind = Kind::Constant;
  double value = 0.0;       // constant value, linear intercept, sinusoid mean, walk start
  double slope = 0.0;       // linear: units per second
  double amplitude = 0.0;   // sinusoid
  double period_s = 86400.0;
  double phase_s = 0.0;
  double step_sd = 0.0;     // random walk increment sd per step
  double step_s = 60.0;
  double min = -1e9;        // random walk bounds
  double max = 1e9;
  double noise_sd = 0.0;

  static SignalSpec constant(double v, double noise = 0.0);
  static SignalSpec linear(double intercept, double slope_per_s);
  static SignalSpec sinusoid(double mean, double amplitude, double period_s, double noise = 0.0);
  static SignalSpec random_walk(double start, double step_sd, double lo, double hi,
                                double step_s = 60.0, double noise = 0.0);
};

// Seeded, per-node collection of signal generators. Random walks are
// materialized lazily on a fixed step grid and linearly interpolated, so a
// value depends only on (seed, spec, t).
class Environment final : public EnvironmentModel {
 public:
  explicit Environment(std::uint64_t seed);

  // Plausible lagoon defaults: temperature 5-30 C, pH 7.5-8.5, EC 20-60 mS/cm,
  // DO 4-12 mg/L, turbidity a bounded walk, liquid level submerged.
  static Environment lagoon_defaults(std::uint64_t seed);

  void set(Sensor sensor, SignalSpec spec);
  const SignalSpec& spec(Sensor sensor) const;

  double truth(Sensor sensor, double t_s) override;
  double noise_sd(Sensor sensor) const override;

 private:
  struct Walk {
    std::mt19937_64 rng;
    std::vector<double> points;
  };

  void reset_walk(std::size_t index);
  double walk_value(std::size_t index, double t_s);

  std::uint64_t seed_;
  std::array<SignalSpec, kSensorCount> specs_{};
  std::array<Walk, kSensorCount> walks_{};
};

}  // namespace senswich
