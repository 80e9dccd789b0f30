#include "senswich/sim_time.h"

#include <cstdlib>

#include <fmt/format.h>

namespace senswich {

std::string format_seconds(SimTime t) {
  const auto ms = t.count();
  const auto abs_ms = std::llabs(ms);
  return fmt::format("{}{}.{:03}", ms < 0 ? "-" : "", abs_ms / 1000, abs_ms % 1000);
}

}  // namespace senswich
