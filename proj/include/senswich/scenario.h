#pragma once

// Declarative scenario description (JSON): nodes, gateways, run length,
// pacing, seed and retention.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "senswich/environment.h"
#include "senswich/link.h"
#include "senswich/node.h"
#include "senswich/store.h"

namespace senswich {

struct NodeSpec {
  NodeConfig node;
  std::map<Sensor, SignalSpec> environment;  // overrides of the lagoon defaults
};

struct ScenarioConfig {
  std::vector<NodeSpec> nodes;
  std::vector<Gateway> gateways;
  SimDuration duration{0};
  std::optional<double> speedup;  // nullopt: "max", as fast as possible
  std::uint64_t seed = 1;
  RetentionPolicy retention{};
  SimDuration rx_delay = kDefaultRxDelay;
  double frame_loss = 0.0;
};

// Carries one message per offending field ("nodes[0].lat: ...").
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

void validate(const ScenarioConfig& config);

ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// Three gateways around a Venice-lagoon-like region and three nodes; one day.
ScenarioConfig default_scenario();

}  // namespace senswich
