#include "senswich/environment.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace senswich {

std::string_view sensor_name(Sensor s) {
  switch (s) {
    case Sensor::Ph: return "ph";
    case Sensor::Ec: return "ec";
    case Sensor::Turbidity: return "turbidity";
    case Sensor::Do: return "do";
    case Sensor::LiquidLevel: return "liquid_level";
    case Sensor::Temperature: return "temperature";
    case Sensor::J6: return "j6";
  }
  return "unknown";
}

SignalSpec SignalSpec::constant(double v, double noise) {
  SignalSpec s;
  s.kind = Kind::Constant;
  s.value = v;
  s.noise_sd = noise;
  return s;
}

SignalSpec SignalSpec::linear(double intercept, double slope_per_s) {
  SignalSpec s;
  s.kind = Kind::Linear;
  s.value = intercept;
  s.slope = slope_per_s;
  return s;
}

SignalSpec SignalSpec::sinusoid(double mean, double amplitude, double period_s, double noise) {
  SignalSpec s;
  s.kind = Kind::Sinusoid;
  s.value = mean;
  s.amplitude = amplitude;
  s.period_s = period_s;
  s.noise_sd = noise;
  return s;
}

SignalSpec SignalSpec::random_walk(double start, double step_sd, double lo, double hi,
                                   double step_s, double noise) {
  SignalSpec s;
  s.kind = Kind::RandomWalk;
  s.value = start;
  s.step_sd = step_sd;
  s.min = lo;
  s.max = hi;
  s.step_s = step_s;
  s.noise_sd = noise;
  return s;
}

Environment::Environment(std::uint64_t seed) : seed_(seed) {
  for (std::size_t i = 0; i < kSensorCount; ++i) reset_walk(i);
}

void Environment::reset_walk(std::size_t index) {
  std::seed_seq seq{seed_, static_cast<std::uint64_t>(index), std::uint64_t{0x5E45}};
  walks_[index].rng.seed(seq);
  walks_[index].points.clear();
}

Environment Environment::lagoon_defaults(std::uint64_t seed) {
  Environment env(seed);
  env.set(Sensor::Temperature, SignalSpec::sinusoid(17.5, 5.0, 86400.0, 0.05));
  env.set(Sensor::Ph, SignalSpec::sinusoid(8.0, 0.2, 86400.0, 0.01));
  env.set(Sensor::Ec, SignalSpec::random_walk(40.0, 0.2, 20.0, 60.0, 60.0, 0.1));
  env.set(Sensor::Do, SignalSpec::sinusoid(8.0, 2.0, 86400.0, 0.05));
  env.set(Sensor::Turbidity, SignalSpec::random_walk(15.0, 0.5, 1.0, 120.0, 60.0, 0.5));
  env.set(Sensor::LiquidLevel, SignalSpec::constant(1.0));
  env.set(Sensor::J6, SignalSpec::constant(0.0));
  return env;
}

void Environment::set(Sensor sensor, SignalSpec spec) {
  const auto i = static_cast<std::size_t>(sensor);
  specs_[i] = spec;
  reset_walk(i);
}

const SignalSpec& Environment::spec(Sensor sensor) const {
  return specs_[static_cast<std::size_t>(sensor)];
}

double Environment::noise_sd(Sensor sensor) const {
  return spec(sensor).noise_sd;
}

double Environment::truth(Sensor sensor, double t_s) {
  const auto i = static_cast<std::size_t>(sensor);
  const SignalSpec& s = specs_[i];
  switch (s.kind) {
    case SignalSpec::Kind::Constant:
      return s.value;
    case SignalSpec::Kind::Linear:
      return s.value + s.slope * t_s;
    case SignalSpec::Kind::Sinusoid:
      return s.value +
             s.amplitude * std::sin(2.0 * std::numbers::pi * (t_s + s.phase_s) / s.period_s);
    case SignalSpec::Kind::RandomWalk:
      return walk_value(i, t_s);
  }
  return 0.0;
}

double Environment::walk_value(std::size_t index, double t_s) {
  const SignalSpec& s = specs_[index];
  Walk& w = walks_[index];
  const double pos = std::max(0.0, t_s) / s.step_s;
  const auto k = static_cast<std::size_t>(pos);
  if (w.points.empty()) w.points.push_back(std::clamp(s.value, s.min, s.max));
  std::normal_distribution<double> step(0.0, s.step_sd);
  while (w.points.size() < k + 2) {
    const double next = w.points.back() + (s.step_sd > 0.0 ? step(w.rng) : 0.0);
    w.points.push_back(std::clamp(next, s.min, s.max));
  }
  const double frac = pos - static_cast<double>(k);
  return w.points[k] + (w.points[k + 1] - w.points[k]) * frac;
}

}  // namespace senswich
