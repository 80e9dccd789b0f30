#include "senswich/json_io.h"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace senswich {

using nlohmann::json;

namespace {

double secs(SimTime t) { return to_seconds(t); }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << content;
}

}  // namespace

json to_json(const EnergyReport& r) {
  return {{"idle_power_mw", r.idle_power_mw},
          {"energy_per_sample_mwh", r.energy_per_sample_mwh},
          {"avg_current_ma", r.avg_current_ma},
          {"avg_power_mw", r.avg_power_mw},
          {"discharge_h", r.discharge_h},
          {"discharge_days", r.discharge_days},
          {"basis", std::string(basis_name(r.basis))}};
}

json to_json(const SampleSet& s) {
  json j = {{"ph", s.ph},
            {"ec", s.ec},
            {"turbidity", s.turbidity},
            {"do", s.do_mgl},
            {"liquid_level", s.liquid_level},
            {"temperature", s.temperature_c}};
  if (s.gps) {
    j["gps"] = {{"lat", s.gps->latitude}, {"lon", s.gps->longitude}, {"alt", s.gps->altitude}};
  }
  return j;
}

json to_json(const NodeSummary& s) {
  json j = {{"device_id", s.device_id},
            {"battery_remaining", s.battery_remaining},
            {"gps_state", s.gps_state}};
  j["last_seen"] = s.last_seen ? json(secs(*s.last_seen)) : json(nullptr);
  j["last_values"] = s.last_values ? to_json(*s.last_values) : json(nullptr);
  j["position"] = s.position ? json{{"lat", s.position->lat}, {"lon", s.position->lon}}
                             : json(nullptr);
  j["phase"] = s.phase ? json(std::string(phase_name(*s.phase))) : json("idle");
  return j;
}

json to_json(const NodeEvent& e) {
  json j = {{"time", secs(e.time)},
            {"device_id", e.device_id},
            {"kind", std::string(event_kind_name(e.kind))}};
  if (e.phase) {
    j["phase"] = std::string(phase_name(*e.phase));
    j["duration"] = to_seconds(e.duration);
  }
  if (e.relay) j["relay"] = fmt::format("K{}", e.relay);
  if (e.kind == NodeEventKind::GpsFix || e.kind == NodeEventKind::GpsNoFix) {
    j["duration"] = to_seconds(e.duration);
  }
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

json to_json(const TopicMessage& m) {
  json j = {{"sequence", m.sequence},
            {"topic", m.topic},
            {"device_id", m.device_id},
            {"time", secs(m.time)},
            {"fcnt", m.fcnt},
            {"fport", m.fport},
            {"payload_b64", m.payload_b64}};
  if (m.topic == kTopicSuccess) {
    json decoded = json::object();
    for (const auto& d : m.decoded) decoded[std::string(series_name(d.series))] = d.value;
    j["decoded"] = decoded;
    j["cleartext"] = m.cleartext;
  } else {
    j["error"] = m.error;
  }
  return j;
}

json to_json(const DownlinkCommand& c) {
  json j = {{"id", c.id},
            {"device_id", c.device_id},
            {"fport", c.fport},
            {"payload_b64", c.payload_b64},
            {"enqueued_at", secs(c.enqueued_at)}};
  j["delivered_at"] = c.delivered_at ? json(secs(*c.delivered_at)) : json(nullptr);
  return j;
}

json to_json(const UplinkRecord& u) {
  return {{"device_id", u.device_id},     {"fcnt", u.fcnt},
          {"tx_start", secs(u.tx_start)}, {"tx_end", secs(u.tx_end)},
          {"payload_size", u.payload_size}, {"delivered", u.delivered},
          {"received_by", u.received_by}};
}

json to_json(const std::vector<TimeValue>& points) {
  json arr = json::array();
  for (const auto& p : points) arr.push_back({{"time", secs(p.time)}, {"value", p.value}});
  return arr;
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "jsonl") return ExportFormat::Jsonl;
  throw std::invalid_argument(fmt::format("unknown export format '{}' (csv|jsonl)", name));
}

std::string export_points(const std::vector<SeriesPoint>& points, ExportFormat format) {
  std::string out;
  if (format == ExportFormat::Csv) out += "time,device_id,series,value\n";
  for (const auto& p : points) {
    out += format == ExportFormat::Csv ? format_point_line(p) : format_point_json(p);
    out += '\n';
  }
  return out;
}

std::vector<SeriesPoint> read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::vector<SeriesPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("time,", 0) == 0) continue;
    try {
      points.push_back(parse_point_line(line));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  std::stable_sort(points.begin(), points.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.device_id != b.device_id) return a.device_id < b.device_id;
    return a.series < b.series;
  });
  return points;
}

void write_run_outputs(const Simulation& sim, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  const auto points = sim.store().all_points();
  write_file(root / "points.csv", export_points(points, ExportFormat::Csv));
  write_file(root / "points.jsonl", export_points(points, ExportFormat::Jsonl));

  std::string events;
  for (const auto& e : sim.events()) events += to_json(e).dump() + '\n';
  write_file(root / "events.jsonl", events);

  std::string uplinks;
  for (const auto& u : sim.uplinks()) uplinks += to_json(u).dump() + '\n';
  write_file(root / "uplinks.jsonl", uplinks);

  json downlinks = {{"delivered", json::array()}, {"pending", json::array()}};
  for (const auto& c : sim.downlinks().delivered()) downlinks["delivered"].push_back(to_json(c));
  for (const auto& c : sim.downlinks().pending()) downlinks["pending"].push_back(to_json(c));
  write_file(root / "downlinks.json", downlinks.dump(2) + '\n');

  json energy = json::object();
  for (const auto& node : sim.nodes()) {
    const auto& st = node.state();
    json j;
    for (auto basis : {EnergyBasis::Capacity, EnergyBasis::Energy}) {
      j[std::string(basis_name(basis))] = to_json(energy_report(st.profile, st.config.pack, basis));
    }
    j["ledger"] = {{"cycles", st.cycles},
                   {"charge_mas", st.ledger.charge_mas()},
                   {"cycle_energy_j", st.ledger.cycle_energy_j()},
                   {"gps_energy_j", st.ledger.gps_energy_j()},
                   {"battery_remaining", node.battery_remaining_percent()}};
    energy[node.device_id()] = j;
  }
  write_file(root / "energy.json", energy.dump(2) + '\n');

  json summary = {{"sim_time", to_seconds(sim.now())},
                  {"uplinks", sim.uplinks().size()},
                  {"forwarded", sim.network_server().forwarded()},
                  {"lorawan", sim.pipeline().success_count()},
                  {"lorawan_error", sim.pipeline().error_count()},
                  {"stored_points", sim.store().size()},
                  {"nodes", json::array()}};
  for (const auto& s : sim.summaries()) summary["nodes"].push_back(to_json(s));
  write_file(root / "summary.json", summary.dump(2) + '\n');
}

}  // namespace senswich
