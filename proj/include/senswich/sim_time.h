#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>

namespace senswich {

// Simulated time is kept in integer milliseconds since scenario start so that
// phase boundaries such as 215.36 s are exact.
using SimDuration = std::chrono::milliseconds;
using SimTime = std::chrono::milliseconds;

inline double to_seconds(SimDuration d) {
  return static_cast<double>(d.count()) / 1000.0;
}

inline SimDuration from_seconds(double s) {
  return SimDuration{static_cast<std::int64_t>(std::llround(s * 1000.0))};
}

// "217.360" style rendering used by the persistence file and the CLI.
std::string format_seconds(SimTime t);

}  // namespace senswich
