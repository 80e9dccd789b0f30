#include "senswich/store.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace senswich {

std::string_view aggregation_name(Aggregation a) {
  switch (a) {
    case Aggregation::Raw: return "raw";
    case Aggregation::Mean: return "mean";
    case Aggregation::Min: return "min";
    case Aggregation::Max: return "max";
  }
  return "unknown";
}

std::optional<Aggregation> parse_aggregation(std::string_view name) {
  for (auto a : {Aggregation::Raw, Aggregation::Mean, Aggregation::Min, Aggregation::Max}) {
    if (aggregation_name(a) == name) return a;
  }
  return std::nullopt;
}

std::string format_point_line(const SeriesPoint& p) {
  return fmt::format("{},{},{},{}", format_seconds(p.time), p.device_id, series_name(p.series),
                     p.value);
}

std::string format_point_json(const SeriesPoint& p) {
  // device ids are validated to plain identifiers by the scenario loader
  return fmt::format(R"({{"time":{},"device_id":"{}","series":"{}","value":{}}})",
                     format_seconds(p.time), p.device_id, series_name(p.series), p.value);
}

SeriesPoint parse_point_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  if (fields.size() != 4) {
    throw std::invalid_argument(fmt::format("expected 4 fields in '{}'", line));
  }
  auto parse_double = [&](std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw std::invalid_argument(fmt::format("bad number '{}'", text));
    }
    return v;
  };
  SeriesPoint p;
  p.time = from_seconds(parse_double(fields[0]));
  p.device_id = std::string(fields[1]);
  const auto series = parse_series(fields[2]);
  if (!series) throw std::invalid_argument(fmt::format("unknown series '{}'", fields[2]));
  p.series = *series;
  p.value = parse_double(fields[3]);
  return p;
}

TimeSeriesStore::TimeSeriesStore(RetentionPolicy retention) {
  set_retention(retention);
}

void TimeSeriesStore::set_retention(RetentionPolicy retention) {
  if (retention.max_age.count() <= 0) {
    throw std::invalid_argument("retention max_age must be positive");
  }
  std::unique_lock lock(mu_);
  retention_ = retention;
}

RetentionPolicy TimeSeriesStore::retention() const {
  std::shared_lock lock(mu_);
  return retention_;
}

void TimeSeriesStore::attach_log(const std::string& path) {
  auto out = std::make_unique<std::ofstream>(path, std::ios::out | std::ios::trunc);
  if (!*out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  std::unique_lock lock(mu_);
  log_ = std::move(out);
}

void TimeSeriesStore::register_device(const std::string& device_id) {
  std::unique_lock lock(mu_);
  devices_.insert(device_id);
}

bool TimeSeriesStore::has_device(const std::string& device_id) const {
  std::shared_lock lock(mu_);
  return devices_.count(device_id) > 0;
}

bool TimeSeriesStore::contains(const std::string& device_id, Series series, SimTime time) const {
  std::shared_lock lock(mu_);
  auto it = series_.find({device_id, series});
  return it != series_.end() && it->second.count(time) > 0;
}

bool TimeSeriesStore::insert(const SeriesPoint& point) {
  if (!std::isfinite(point.value)) {
    throw std::invalid_argument("series point value must be finite");
  }
  std::unique_lock lock(mu_);
  auto& points = series_[{point.device_id, point.series}];
  if (!points.emplace(point.time, point.value).second) return false;
  devices_.insert(point.device_id);
  ++size_;
  if (log_) {
    *log_ << format_point_line(point) << '\n';
    log_->flush();
  }
  return true;
}

std::vector<TimeValue> TimeSeriesStore::query(const std::string& device_id,
                                              std::string_view series, SimTime from, SimTime to,
                                              Aggregation agg, SimDuration bucket) const {
  const auto s = parse_series(series);
  if (!s) throw UnknownSeries(fmt::format("unknown series '{}'", series));
  return query(device_id, *s, from, to, agg, bucket);
}

std::vector<TimeValue> TimeSeriesStore::query(const std::string& device_id, Series series,
                                              SimTime from, SimTime to, Aggregation agg,
                                              SimDuration bucket) const {
  if (from > to) throw std::invalid_argument("query range has from > to");
  if (agg != Aggregation::Raw && bucket.count() <= 0) {
    throw std::invalid_argument("aggregated query needs a positive bucket");
  }
  std::shared_lock lock(mu_);
  if (devices_.count(device_id) == 0) {
    throw UnknownDevice(fmt::format("unknown device '{}'", device_id));
  }
  std::vector<TimeValue> out;
  auto it = series_.find({device_id, series});
  if (it == series_.end()) return out;
  const auto& points = it->second;
  auto first = points.lower_bound(from);
  auto last = points.upper_bound(to);

  if (agg == Aggregation::Raw) {
    for (auto p = first; p != last; ++p) out.push_back({p->first, p->second});
    return out;
  }

  std::optional<std::int64_t> current;
  double acc = 0.0;
  std::size_t n = 0;
  auto emit = [&]() {
    if (!current || n == 0) return;
    const double v = agg == Aggregation::Mean ? acc / static_cast<double>(n) : acc;
    out.push_back({from + bucket * *current, v});
  };
  for (auto p = first; p != last; ++p) {
    const std::int64_t index = (p->first - from) / bucket;
    if (!current || index != *current) {
      emit();
      current = index;
      n = 0;
      acc = agg == Aggregation::Mean ? 0.0
            : agg == Aggregation::Min ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
    }
    switch (agg) {
      case Aggregation::Mean: acc += p->second; break;
      case Aggregation::Min: acc = std::min(acc, p->second); break;
      case Aggregation::Max: acc = std::max(acc, p->second); break;
      case Aggregation::Raw: break;
    }
    ++n;
  }
  emit();
  return out;
}

std::size_t TimeSeriesStore::expire(SimTime now) {
  std::unique_lock lock(mu_);
  const SimTime cutoff = now - retention_.max_age;
  std::size_t removed = 0;
  for (auto& [key, points] : series_) {
    auto end = points.lower_bound(cutoff);
    removed += static_cast<std::size_t>(std::distance(points.begin(), end));
    points.erase(points.begin(), end);
  }
  size_ -= removed;
  return removed;
}

std::size_t TimeSeriesStore::size() const {
  std::shared_lock lock(mu_);
  return size_;
}

std::vector<SeriesPoint> TimeSeriesStore::all_points() const {
  std::shared_lock lock(mu_);
  std::vector<SeriesPoint> out;
  out.reserve(size_);
  for (const auto& [key, points] : series_) {
    for (const auto& [t, v] : points) out.push_back({key.first, key.second, t, v});
  }
  std::sort(out.begin(), out.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.device_id != b.device_id) return a.device_id < b.device_id;
    return a.series < b.series;
  });
  return out;
}

std::optional<SeriesPoint> TimeSeriesStore::latest(const std::string& device_id,
                                                   Series series) const {
  std::shared_lock lock(mu_);
  auto it = series_.find({device_id, series});
  if (it == series_.end() || it->second.empty()) return std::nullopt;
  const auto& [t, v] = *it->second.rbegin();
  return SeriesPoint{device_id, series, t, v};
}

}  // namespace senswich
