#pragma once

// In-memory time-series store with retention, bucketed aggregation and an
// optional append-only persistence file ("time,device_id,series,value").

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "senswich/payload.h"
#include "senswich/sim_time.h"

namespace senswich {

struct SeriesPoint {
  std::string device_id;
  Series series = Series::Ph;
  SimTime time{0};
  double value = 0.0;

  bool operator==(const SeriesPoint&) const = default;
};

struct RetentionPolicy {
  SimDuration max_age = std::chrono::hours{24 * 90};
};

enum class Aggregation { Raw, Mean, Min, Max };

std::string_view aggregation_name(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view name);

struct TimeValue {
  SimTime time{0};
  double value = 0.0;

  bool operator==(const TimeValue&) const = default;
};

class UnknownSeries : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownDevice : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string format_point_line(const SeriesPoint& p);
std::string format_point_json(const SeriesPoint& p);
// Inverse of format_point_line; throws std::invalid_argument.
SeriesPoint parse_point_line(std::string_view line);

// One writer, any number of readers.
class TimeSeriesStore {
 public:
  explicit TimeSeriesStore(RetentionPolicy retention = {});

  void set_retention(RetentionPolicy retention);
  RetentionPolicy retention() const;

  // Appends every inserted point to `path` (truncating it first).
  void attach_log(const std::string& path);

  // Makes queries for a device with no points return [] instead of
  // UnknownDevice.
  void register_device(const std::string& device_id);
  bool has_device(const std::string& device_id) const;

  bool contains(const std::string& device_id, Series series, SimTime time) const;
  // False, and no change, if (device, series, time) already exists.
  bool insert(const SeriesPoint& point);

  // Inclusive [from, to], time ascending. Buckets start at `from`; empty
  // buckets are omitted and each is labelled with its start time.
  std::vector<TimeValue> query(const std::string& device_id, std::string_view series,
                               SimTime from, SimTime to, Aggregation agg,
                               SimDuration bucket = SimDuration{0}) const;
  std::vector<TimeValue> query(const std::string& device_id, Series series, SimTime from,
                               SimTime to, Aggregation agg,
                               SimDuration bucket = SimDuration{0}) const;

  // Removes points with time < now - max_age.
  std::size_t expire(SimTime now);

  std::size_t size() const;
  // Sorted by (time, device_id, series).
  std::vector<SeriesPoint> all_points() const;
  std::optional<SeriesPoint> latest(const std::string& device_id, Series series) const;

 private:
  using Key = std::pair<std::string, Series>;

  mutable std::shared_mutex mu_;
  RetentionPolicy retention_;
  std::map<Key, std::map<SimTime, double>> series_;
  std::set<std::string> devices_;
  std::size_t size_ = 0;
  std::unique_ptr<std::ofstream> log_;
};

}  // namespace senswich
