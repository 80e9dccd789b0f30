#include "senswich/payload.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "senswich/base64.h"

namespace senswich {

std::string_view series_name(Series s) {
  switch (s) {
    case Series::Ph: return "ph";
    case Series::Ec: return "ec";
    case Series::Turbidity: return "turbidity";
    case Series::Do: return "do";
    case Series::LiquidLevel: return "liquid_level";
    case Series::Temperature: return "temperature";
    case Series::GpsLat: return "gps_lat";
    case Series::GpsLon: return "gps_lon";
    case Series::GpsAlt: return "gps_alt";
  }
  return "unknown";
}

std::optional<Series> parse_series(std::string_view name) {
  for (Series s : kAllSeries) {
    if (series_name(s) == name) return s;
  }
  return std::nullopt;
}

ChannelMap::ChannelMap(std::vector<ChannelEntry> entries) : entries_(std::move(entries)) {}

const ChannelMap& ChannelMap::standard() {
  using lpp::LppType;
  static const ChannelMap map({
      {1, LppType::AnalogInput, Series::Ph, 1.0},
      {2, LppType::AnalogInput, Series::Ec, 1.0},
      {3, LppType::AnalogInput, Series::Turbidity, 100.0},
      {4, LppType::AnalogInput, Series::Do, 1.0},
      {5, LppType::DigitalInput, Series::LiquidLevel, 1.0},
      {6, LppType::Temperature, Series::Temperature, 1.0},
      {7, LppType::Gps, Series::GpsLat, 1.0},
  });
  return map;
}

const ChannelEntry* ChannelMap::by_channel(std::uint8_t channel) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ChannelEntry& e) { return e.channel == channel; });
  return it == entries_.end() ? nullptr : &*it;
}

const ChannelEntry& ChannelMap::by_series(Series series) const {
  if (series == Series::GpsLon || series == Series::GpsAlt) series = Series::GpsLat;
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const ChannelEntry& e) { return e.series == series; });
  if (it == entries_.end()) {
    throw std::out_of_range(fmt::format("no channel for series {}", series_name(series)));
  }
  return *it;
}

std::vector<lpp::LppRecord> to_records(const SampleSet& s, const ChannelMap& map) {
  using lpp::LppRecord;
  auto analog = [&](Series series, double value) {
    const auto& e = map.by_series(series);
    return LppRecord::analog(e.channel, value / e.wire_scale);
  };
  std::vector<LppRecord> records;
  records.reserve(7);
  records.push_back(analog(Series::Ph, s.ph));
  records.push_back(analog(Series::Ec, s.ec));
  records.push_back(analog(Series::Turbidity, s.turbidity));
  records.push_back(analog(Series::Do, s.do_mgl));
  records.push_back(LppRecord::digital(map.by_series(Series::LiquidLevel).channel,
                                       s.liquid_level ? 1 : 0));
  records.push_back(
      LppRecord::temperature(map.by_series(Series::Temperature).channel, s.temperature_c));
  if (s.gps) {
    records.push_back(LppRecord::position(map.by_series(Series::GpsLat).channel, *s.gps));
  }
  std::sort(records.begin(), records.end(),
            [](const LppRecord& a, const LppRecord& b) { return a.channel < b.channel; });
  return records;
}

std::vector<std::uint8_t> encode_sampleset(const SampleSet& s, const ChannelMap& map) {
  const auto records = to_records(s, map);
  return lpp::encode_records(records);
}

std::vector<Measurement> to_measurements(std::span<const lpp::LppRecord> records,
                                         const ChannelMap& map) {
  std::vector<Measurement> out;
  out.reserve(records.size() + 2);
  for (const auto& r : records) {
    const ChannelEntry* e = map.by_channel(r.channel);
    if (e == nullptr) {
      throw UnmappedRecord(fmt::format("channel {} is not assigned", r.channel));
    }
    if (e->type != r.type) {
      throw UnmappedRecord(fmt::format("channel {} carries {} but expects {}", r.channel,
                                       lpp::type_name(r.type), lpp::type_name(e->type)));
    }
    if (r.type == lpp::LppType::Gps) {
      out.push_back({Series::GpsLat, r.gps.latitude});
      out.push_back({Series::GpsLon, r.gps.longitude});
      out.push_back({Series::GpsAlt, r.gps.altitude});
    } else if (e->wire_scale != 1.0) {
      // Keep the stored value on the engineering-unit resolution grid.
      out.push_back({e->series, std::round(r.value * e->wire_scale * 100.0) / 100.0});
    } else {
      out.push_back({e->series, r.value});
    }
  }
  return out;
}

std::string render_cleartext(std::span<const Measurement> measurements) {
  std::string out;
  for (const auto& m : measurements) {
    if (!out.empty()) out.push_back(' ');
    out += fmt::format("{}={}", series_name(m.series), m.value);
  }
  return out;
}

Command decode_downlink(int fport, std::string_view payload_b64) {
  if (fport < kMinFPort || fport > kMaxFPort) {
    throw InvalidFPort(fmt::format("FPort {} outside [{}, {}]", fport, kMinFPort, kMaxFPort));
  }
  const auto bytes = base64_decode(payload_b64);
  std::string text(bytes.begin(), bytes.end());
  if (text == kGpsCommand) return {Command::Kind::ActivateGps, std::move(text)};
  return {Command::Kind::Unknown, std::move(text)};
}

}  // namespace senswich
