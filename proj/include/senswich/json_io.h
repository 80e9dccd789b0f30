#pragma once

// JSON renderings shared by the HTTP API, the CLI and the run-output files.

#include <string>
#include <vector>

#include <json.hpp>

#include "senswich/energy.h"
#include "senswich/link.h"
#include "senswich/node.h"
#include "senswich/pipeline.h"
#include "senswich/simulation.h"
#include "senswich/store.h"

namespace senswich {

nlohmann::json to_json(const EnergyReport& r);
nlohmann::json to_json(const SampleSet& s);
nlohmann::json to_json(const NodeSummary& s);
nlohmann::json to_json(const NodeEvent& e);
nlohmann::json to_json(const TopicMessage& m);
nlohmann::json to_json(const DownlinkCommand& c);
nlohmann::json to_json(const UplinkRecord& u);
nlohmann::json to_json(const std::vector<TimeValue>& points);

enum class ExportFormat { Csv, Jsonl };
ExportFormat parse_export_format(const std::string& name);

// Header line plus one line per point (csv), or one object per line (jsonl).
std::string export_points(const std::vector<SeriesPoint>& points, ExportFormat format);
std::vector<SeriesPoint> read_points_file(const std::string& path);

// Writes points.csv, points.jsonl, events.jsonl, uplinks.jsonl,
// downlinks.json, energy.json and summary.json into `dir`.
void write_run_outputs(const Simulation& sim, const std::string& dir);

}  // namespace senswich
