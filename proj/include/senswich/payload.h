#pragma once

// The SENSWICH application payload: fixed channel assignment on top of
// CayenneLPP, and the base64 downlink command protocol.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "senswich/lpp.h"

namespace senswich {

enum class Series : std::uint8_t {
  Ph,
  Ec,
  Turbidity,
  Do,
  LiquidLevel,
  Temperature,
  GpsLat,
  GpsLon,
  GpsAlt,
};

inline constexpr std::array<Series, 9> kAllSeries = {
    Series::Ph,          Series::Ec,     Series::Turbidity,
    Series::Do,          Series::LiquidLevel, Series::Temperature,
    Series::GpsLat,      Series::GpsLon, Series::GpsAlt};

std::string_view series_name(Series s);
std::optional<Series> parse_series(std::string_view name);

struct SampleSet {
  double ph = 0.0;
  double ec = 0.0;         // mS/cm
  double turbidity = 0.0;  // NTU
  double do_mgl = 0.0;     // mg/L
  bool liquid_level = false;
  double temperature_c = 0.0;
  std::optional<lpp::GpsFix> gps;

  bool operator==(const SampleSet&) const = default;
};

struct ChannelEntry {
  std::uint8_t channel;
  lpp::LppType type;
  Series series;      // GpsLat for the position channel
  double wire_scale;  // wire value = engineering value / wire_scale
};

// ch1 pH, ch2 EC, ch3 turbidity/100, ch4 DO, ch5 liquid level, ch6 water
// temperature, ch7 position.
class ChannelMap {
 public:
  static const ChannelMap& standard();

  const ChannelEntry* by_channel(std::uint8_t channel) const;
  const ChannelEntry& by_series(Series series) const;
  std::span<const ChannelEntry> entries() const { return entries_; }

 private:
  explicit ChannelMap(std::vector<ChannelEntry> entries);
  std::vector<ChannelEntry> entries_;
};

std::vector<lpp::LppRecord> to_records(const SampleSet& s, const ChannelMap& map);

// 23 bytes without GPS, 34 with.
std::vector<std::uint8_t> encode_sampleset(const SampleSet& s,
                                           const ChannelMap& map = ChannelMap::standard());

struct Measurement {
  Series series;
  double value;

  bool operator==(const Measurement&) const = default;
};

class UnmappedRecord : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Engineering-unit measurements for decoded records; a GPS record expands to
// lat/lon/alt. Throws UnmappedRecord on channels or types the map lacks.
std::vector<Measurement> to_measurements(std::span<const lpp::LppRecord> records,
                                         const ChannelMap& map = ChannelMap::standard());

// Human-readable "ph=8.12 ec=41.3 ..." rendering.
std::string render_cleartext(std::span<const Measurement> measurements);

struct Command {
  enum class Kind { ActivateGps, Unknown };
  Kind kind = Kind::Unknown;
  std::string text;  // decoded cleartext

  bool operator==(const Command&) const = default;
};

inline constexpr std::string_view kGpsCommand = "gps";
inline constexpr int kMinFPort = 1;
inline constexpr int kMaxFPort = 223;

class InvalidFPort : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws Base64Error on invalid encoding, InvalidFPort outside [1, 223].
Command decode_downlink(int fport, std::string_view payload_b64);

}  // namespace senswich
