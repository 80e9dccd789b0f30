#include "senswich/scenario.h"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace senswich {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid scenario config";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

bool valid_identifier(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

// Walks one JSON object, recording type errors and unknown keys against a
// dotted path instead of throwing on the first problem.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) error("", "expected an object");
  }

  ~FieldReader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (seen_.count(key) == 0) error(key, "unknown field");
    }
  }

  FieldReader(const FieldReader&) = delete;
  FieldReader& operator=(const FieldReader&) = delete;

  std::string field_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void error(const std::string& key, const std::string& message) {
    errors_.push_back(fmt::format("{}: {}", key.empty() ? path_ : field_path(key), message));
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out, bool required = false) {
    const json* v = find(key);
    if (v == nullptr) {
      if (required) error(key, "required");
      return;
    }
    if (!v->is_number()) {
      error(key, "expected a number");
      return;
    }
    out = v->get<double>();
  }

  void integer(const std::string& key, std::int64_t& out, bool required = false) {
    const json* v = find(key);
    if (v == nullptr) {
      if (required) error(key, "required");
      return;
    }
    if (!v->is_number_integer()) {
      error(key, "expected an integer");
      return;
    }
    out = v->get<std::int64_t>();
  }

  void text(const std::string& key, std::string& out, bool required = false) {
    const json* v = find(key);
    if (v == nullptr) {
      if (required) error(key, "required");
      return;
    }
    if (!v->is_string()) {
      error(key, "expected a string");
      return;
    }
    out = v->get<std::string>();
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) {
      error(key, "expected a boolean");
      return;
    }
    out = v->get<bool>();
  }

  void seconds(const std::string& key, SimDuration& out, bool required = false) {
    double s = to_seconds(out);
    const std::size_t before = errors_.size();
    number(key, s, required);
    if (errors_.size() == before && find(key) != nullptr) out = from_seconds(s);
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

std::optional<Sensor> parse_sensor(const std::string& name) {
  for (std::size_t i = 0; i < kSensorCount; ++i) {
    const auto s = static_cast<Sensor>(i);
    if (sensor_name(s) == name) return s;
  }
  return std::nullopt;
}

SignalSpec parse_signal(const json& doc, const std::string& path,
                        std::vector<std::string>& errors) {
  SignalSpec s;
  FieldReader r(doc, path, errors);
  std::string kind = "constant";
  r.text("kind", kind);
  if (kind == "constant") {
    s.kind = SignalSpec::Kind::Constant;
    r.number("value", s.value, true);
  } else if (kind == "linear") {
    s.kind = SignalSpec::Kind::Linear;
    r.number("intercept", s.value, true);
    r.number("slope_per_s", s.slope, true);
  } else if (kind == "sinusoid") {
    s.kind = SignalSpec::Kind::Sinusoid;
    r.number("mean", s.value, true);
    r.number("amplitude", s.amplitude, true);
    r.number("period_s", s.period_s);
    r.number("phase_s", s.phase_s);
    if (s.period_s <= 0) r.error("period_s", "must be > 0");
  } else if (kind == "random_walk") {
    s.kind = SignalSpec::Kind::RandomWalk;
    r.number("start", s.value, true);
    r.number("step_sd", s.step_sd, true);
    r.number("min", s.min, true);
    r.number("max", s.max, true);
    r.number("step_s", s.step_s);
    if (s.step_s <= 0) r.error("step_s", "must be > 0");
    if (s.min > s.max) r.error("min", "must be <= max");
    if (s.step_sd < 0) r.error("step_sd", "must be >= 0");
  } else {
    r.error("kind", fmt::format("unknown generator '{}' (constant|linear|sinusoid|random_walk)",
                                kind));
  }
  r.number("noise_sd", s.noise_sd);
  if (s.noise_sd < 0) r.error("noise_sd", "must be >= 0");
  return s;
}

NodeSpec parse_node(const json& doc, const std::string& path, std::vector<std::string>& errors) {
  NodeSpec spec;
  NodeConfig& n = spec.node;
  FieldReader r(doc, path, errors);
  r.text("id", n.device_id, true);
  r.number("lat", n.position.lat, true);
  r.number("lon", n.position.lon, true);
  r.seconds("sampling_period_s", n.sampling_period);
  r.seconds("first_wake_s", n.first_wake);
  r.text("profile", n.profile);
  std::int64_t fport = n.fport;
  r.integer("fport", fport);
  n.fport = static_cast<int>(fport);

  if (const json* cal = r.find("calibration")) {
    if (!cal->is_object()) {
      r.error("calibration", "expected an object");
    } else {
      for (const auto& [name, entry] : cal->items()) {
        const auto sensor = parse_sensor(name);
        const std::string p = r.field_path("calibration") + "." + name;
        if (!sensor) {
          errors.push_back(fmt::format("{}: unknown sensor", p));
          continue;
        }
        FieldReader cr(entry, p, errors);
        auto& c = n.calibration[static_cast<std::size_t>(*sensor)];
        cr.number("gain", c.gain);
        cr.number("offset", c.offset);
      }
    }
  }
  if (const json* bat = r.find("battery")) {
    FieldReader br(*bat, r.field_path("battery"), errors);
    br.number("cell_capacity_mah", n.pack.cell_capacity_mah);
    br.number("cell_energy_wh", n.pack.cell_energy_wh);
    br.number("nominal_cell_v", n.pack.nominal_cell_v);
    std::int64_t series = n.pack.series;
    std::int64_t parallel = n.pack.parallel;
    br.integer("series", series);
    br.integer("parallel", parallel);
    n.pack.series = static_cast<int>(series);
    n.pack.parallel = static_cast<int>(parallel);
  }
  if (const json* gps = r.find("gps")) {
    FieldReader gr(*gps, r.field_path("gps"), errors);
    gr.number("current_ma", n.gps.current_ma);
    gr.number("ttf_min_s", n.gps.ttf_min_s);
    gr.number("ttf_max_s", n.gps.ttf_max_s);
    gr.boolean("never_fix", n.gps.never_fix);
    gr.number("error_deg", n.gps.error_deg);
    gr.number("altitude_m", n.gps.altitude_m);
  }
  if (const json* env = r.find("environment")) {
    if (!env->is_object()) {
      r.error("environment", "expected an object");
    } else {
      for (const auto& [name, entry] : env->items()) {
        const auto sensor = parse_sensor(name);
        const std::string p = r.field_path("environment") + "." + name;
        if (!sensor) {
          errors.push_back(fmt::format("{}: unknown sensor", p));
          continue;
        }
        spec.environment[*sensor] = parse_signal(entry, p, errors);
      }
    }
  }
  return spec;
}

Gateway parse_gateway(const json& doc, const std::string& path, std::vector<std::string>& errors) {
  Gateway gw;
  FieldReader r(doc, path, errors);
  r.text("id", gw.gateway_id, true);
  r.number("lat", gw.position.lat, true);
  r.number("lon", gw.position.lon, true);
  r.number("range_km", gw.range_km);
  return gw;
}

json signal_to_json(const SignalSpec& s) {
  json j;
  switch (s.kind) {
    case SignalSpec::Kind::Constant:
      j = {{"kind", "constant"}, {"value", s.value}};
      break;
    case SignalSpec::Kind::Linear:
      j = {{"kind", "linear"}, {"intercept", s.value}, {"slope_per_s", s.slope}};
      break;
    case SignalSpec::Kind::Sinusoid:
      j = {{"kind", "sinusoid"}, {"mean", s.value},          {"amplitude", s.amplitude},
           {"period_s", s.period_s}, {"phase_s", s.phase_s}};
      break;
    case SignalSpec::Kind::RandomWalk:
      j = {{"kind", "random_walk"}, {"start", s.value}, {"step_sd", s.step_sd},
           {"min", s.min},          {"max", s.max},     {"step_s", s.step_s}};
      break;
  }
  j["noise_sd"] = s.noise_sd;
  return j;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

void validate(const ScenarioConfig& c) {
  std::vector<std::string> errors;
  if (c.duration.count() <= 0) errors.push_back("duration_s: must be > 0");
  if (c.speedup && !(*c.speedup >= 1.0)) errors.push_back("speedup: must be >= 1 or \"max\"");
  if (c.retention.max_age.count() <= 0) errors.push_back("retention_days: must be > 0");
  if (c.rx_delay.count() < 0) errors.push_back("rx_delay_s: must be >= 0");
  if (!(c.frame_loss >= 0.0 && c.frame_loss <= 1.0)) {
    errors.push_back("frame_loss: must be within [0, 1]");
  }
  if (c.nodes.empty()) errors.push_back("nodes: at least one node is required");
  if (c.gateways.empty()) errors.push_back("gateways: at least one gateway is required");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i].node;
    const std::string p = fmt::format("nodes[{}]", i);
    if (!valid_identifier(n.device_id)) {
      errors.push_back(p + ".id: must be 1-64 characters of [A-Za-z0-9._-]");
    } else if (!ids.insert(n.device_id).second) {
      errors.push_back(fmt::format("{}.id: duplicate device '{}'", p, n.device_id));
    }
    try {
      validate(n);
    } catch (const std::invalid_argument& e) {
      std::string_view what = e.what();
      const std::string own = n.device_id + ".";
      if (what.starts_with(own)) {
        errors.push_back(fmt::format("{}.{}", p, what.substr(own.size())));
      } else {
        errors.push_back(fmt::format("{}: {}", p, what));
      }
    }
  }
  std::set<std::string> gw_ids;
  for (std::size_t i = 0; i < c.gateways.size(); ++i) {
    const auto& g = c.gateways[i];
    const std::string p = fmt::format("gateways[{}]", i);
    if (!valid_identifier(g.gateway_id)) {
      errors.push_back(p + ".id: must be 1-64 characters of [A-Za-z0-9._-]");
    } else if (!gw_ids.insert(g.gateway_id).second) {
      errors.push_back(fmt::format("{}.id: duplicate gateway '{}'", p, g.gateway_id));
    }
    if (!(g.range_km > 0.0)) errors.push_back(p + ".range_km: must be > 0");
    if (g.position.lat < -90 || g.position.lat > 90) errors.push_back(p + ".lat: outside [-90, 90]");
    if (g.position.lon < -180 || g.position.lon > 180) {
      errors.push_back(p + ".lon: outside [-180, 180]");
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

ScenarioConfig parse_scenario(const json& doc) {
  ScenarioConfig c;
  std::vector<std::string> errors;
  {
    FieldReader r(doc, "", errors);
    r.seconds("duration_s", c.duration, true);
    std::int64_t seed = static_cast<std::int64_t>(c.seed);
    r.integer("seed", seed);
    if (seed < 0) r.error("seed", "must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    if (const json* sp = r.find("speedup")) {
      if (sp->is_string() && sp->get<std::string>() == "max") {
        c.speedup.reset();
      } else if (sp->is_number()) {
        c.speedup = sp->get<double>();
      } else {
        r.error("speedup", "expected a number or \"max\"");
      }
    }
    double retention_days = to_seconds(c.retention.max_age) / 86400.0;
    r.number("retention_days", retention_days);
    c.retention.max_age = from_seconds(retention_days * 86400.0);
    r.seconds("rx_delay_s", c.rx_delay);
    r.number("frame_loss", c.frame_loss);

    if (const json* nodes = r.find("nodes")) {
      if (!nodes->is_array()) {
        r.error("nodes", "expected an array");
      } else {
        for (std::size_t i = 0; i < nodes->size(); ++i) {
          c.nodes.push_back(parse_node((*nodes)[i], fmt::format("nodes[{}]", i), errors));
        }
      }
    } else {
      r.error("nodes", "required");
    }
    if (const json* gws = r.find("gateways")) {
      if (!gws->is_array()) {
        r.error("gateways", "expected an array");
      } else {
        for (std::size_t i = 0; i < gws->size(); ++i) {
          c.gateways.push_back(parse_gateway((*gws)[i], fmt::format("gateways[{}]", i), errors));
        }
      }
    } else {
      r.error("gateways", "required");
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    // Range checks on top of the structural errors, skipping fields already reported.
    for (const auto& v : e.errors()) {
      const std::string field = v.substr(0, v.find(':'));
      const bool seen = std::any_of(errors.begin(), errors.end(), [&](const std::string& x) {
        return x.substr(0, x.find(':')) == field;
      });
      if (!seen) errors.push_back(v);
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("{}: cannot open file", path)});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({fmt::format("{}: {}", path, e.what())});
  }
  return parse_scenario(doc);
}

json scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["duration_s"] = to_seconds(c.duration);
  doc["seed"] = c.seed;
  if (c.speedup) {
    doc["speedup"] = *c.speedup;
  } else {
    doc["speedup"] = "max";
  }
  doc["retention_days"] = to_seconds(c.retention.max_age) / 86400.0;
  doc["rx_delay_s"] = to_seconds(c.rx_delay);
  doc["frame_loss"] = c.frame_loss;
  doc["gateways"] = json::array();
  for (const auto& g : c.gateways) {
    doc["gateways"].push_back(
        {{"id", g.gateway_id}, {"lat", g.position.lat}, {"lon", g.position.lon}, {"range_km", g.range_km}});
  }
  doc["nodes"] = json::array();
  for (const auto& spec : c.nodes) {
    const auto& n = spec.node;
    json j = {{"id", n.device_id},
              {"lat", n.position.lat},
              {"lon", n.position.lon},
              {"sampling_period_s", to_seconds(n.sampling_period)},
              {"first_wake_s", to_seconds(n.first_wake)},
              {"profile", n.profile},
              {"fport", n.fport}};
    json cal = json::object();
    for (std::size_t i = 0; i < kSensorCount; ++i) {
      const auto& cc = n.calibration[i];
      if (cc.gain != 1.0 || cc.offset != 0.0) {
        cal[std::string(sensor_name(static_cast<Sensor>(i)))] = {{"gain", cc.gain},
                                                                  {"offset", cc.offset}};
      }
    }
    j["calibration"] = cal;
    j["battery"] = {{"cell_capacity_mah", n.pack.cell_capacity_mah},
                    {"cell_energy_wh", n.pack.cell_energy_wh},
                    {"nominal_cell_v", n.pack.nominal_cell_v},
                    {"series", n.pack.series},
                    {"parallel", n.pack.parallel}};
    j["gps"] = {{"current_ma", n.gps.current_ma}, {"ttf_min_s", n.gps.ttf_min_s},
                {"ttf_max_s", n.gps.ttf_max_s},   {"never_fix", n.gps.never_fix},
                {"error_deg", n.gps.error_deg},   {"altitude_m", n.gps.altitude_m}};
    json env = json::object();
    for (const auto& [sensor, sig] : spec.environment) {
      env[std::string(sensor_name(sensor))] = signal_to_json(sig);
    }
    j["environment"] = env;
    doc["nodes"].push_back(j);
  }
  return doc;
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.duration = std::chrono::hours{24};
  c.seed = 42;
  // Illustrative placements: north (Treporti), centre (Venezia), south (Chioggia).
  c.gateways = {
      {"gw-treporti", {45.4650, 12.4480}, 15.0},
      {"gw-venezia", {45.4340, 12.3380}, 15.0},
      {"gw-chioggia", {45.2190, 12.2790}, 15.0},
  };
  auto node = [](std::string id, double lat, double lon) {
    NodeSpec s;
    s.node.device_id = std::move(id);
    s.node.position = {lat, lon};
    return s;
  };
  c.nodes = {node("node-1", 45.4408, 12.3155), node("node-2", 45.3200, 12.2600),
             node("node-3", 45.4900, 12.4200)};
  return c;
}

}  // namespace senswich
