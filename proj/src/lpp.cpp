#include "senswich/lpp.h"

#include <cmath>
#include <cstdio>
#include <set>

#include <fmt/format.h>

namespace senswich::lpp {

namespace {

constexpr std::int64_t kInt16Min = -32768;
constexpr std::int64_t kInt16Max = 32767;
constexpr std::int64_t kInt24Min = -8388608;
constexpr std::int64_t kInt24Max = 8388607;

std::int64_t scaled(double value, double factor, std::int64_t lo,
                    std::int64_t hi, std::string_view what) {
  if (!std::isfinite(value)) {
    throw RangeError(fmt::format("{} value is not finite", what));
  }
  const double s = std::round(value * factor);
  if (s < static_cast<double>(lo) || s > static_cast<double>(hi)) {
    throw RangeError(fmt::format("{} value {} out of representable range", what,
                                 value));
  }
  return static_cast<std::int64_t>(s);
}

void put_be(std::vector<std::uint8_t>& out, std::int64_t v, int width) {
  const auto u = static_cast<std::uint64_t>(v);
  for (int i = width - 1; i >= 0; --i) {
    out.push_back(static_cast<std::uint8_t>((u >> (8 * i)) & 0xFF));
  }
}

std::int64_t get_be_signed(const std::uint8_t* p, int width) {
  std::uint64_t u = 0;
  for (int i = 0; i < width; ++i) u = (u << 8) | p[i];
  const std::uint64_t sign = std::uint64_t{1} << (8 * width - 1);
  if (u & sign) return static_cast<std::int64_t>(u) - static_cast<std::int64_t>(sign << 1);
  return static_cast<std::int64_t>(u);
}

bool known_type(std::uint8_t b) {
  switch (static_cast<LppType>(b)) {
    case LppType::DigitalInput:
    case LppType::AnalogInput:
    case LppType::Temperature:
    case LppType::Gps:
      return true;
  }
  return false;
}

}  // namespace

std::string_view type_name(LppType type) {
  switch (type) {
    case LppType::DigitalInput: return "digital_input";
    case LppType::AnalogInput: return "analog_input";
    case LppType::Temperature: return "temperature";
    case LppType::Gps: return "gps";
  }
  return "unknown";
}

LppRecord LppRecord::digital(std::uint8_t channel, std::uint8_t value) {
  return {channel, LppType::DigitalInput, static_cast<double>(value), {}};
}

LppRecord LppRecord::analog(std::uint8_t channel, double value) {
  return {channel, LppType::AnalogInput, value, {}};
}

LppRecord LppRecord::temperature(std::uint8_t channel, double celsius) {
  return {channel, LppType::Temperature, celsius, {}};
}

LppRecord LppRecord::position(std::uint8_t channel, GpsFix fix) {
  return {channel, LppType::Gps, 0.0, fix};
}

LppRecord quantize(const LppRecord& record) {
  LppRecord q = record;
  switch (record.type) {
    case LppType::DigitalInput:
      q.value = std::round(record.value);
      break;
    case LppType::AnalogInput:
      q.value = static_cast<double>(std::llround(record.value * 100.0)) / 100.0;
      break;
    case LppType::Temperature:
      q.value = static_cast<double>(std::llround(record.value * 10.0)) / 10.0;
      break;
    case LppType::Gps:
      q.value = 0.0;
      q.gps.latitude =
          static_cast<double>(std::llround(record.gps.latitude * 10000.0)) / 10000.0;
      q.gps.longitude =
          static_cast<double>(std::llround(record.gps.longitude * 10000.0)) / 10000.0;
      q.gps.altitude =
          static_cast<double>(std::llround(record.gps.altitude * 100.0)) / 100.0;
      break;
  }
  return q;
}

void append_record(std::vector<std::uint8_t>& out, const LppRecord& record) {
  // Validate everything before touching the output buffer.
  switch (record.type) {
    case LppType::DigitalInput: {
      const auto v = scaled(record.value, 1.0, 0, 255, "digital input");
      out.push_back(record.channel);
      out.push_back(static_cast<std::uint8_t>(record.type));
      put_be(out, v, 1);
      return;
    }
    case LppType::AnalogInput: {
      const auto v = scaled(record.value, 100.0, kInt16Min, kInt16Max, "analog input");
      out.push_back(record.channel);
      out.push_back(static_cast<std::uint8_t>(record.type));
      put_be(out, v, 2);
      return;
    }
    case LppType::Temperature: {
      const auto v = scaled(record.value, 10.0, kInt16Min, kInt16Max, "temperature");
      out.push_back(record.channel);
      out.push_back(static_cast<std::uint8_t>(record.type));
      put_be(out, v, 2);
      return;
    }
    case LppType::Gps: {
      const auto lat = scaled(record.gps.latitude, 10000.0, -900000, 900000, "latitude");
      const auto lon = scaled(record.gps.longitude, 10000.0, -1800000, 1800000, "longitude");
      const auto alt = scaled(record.gps.altitude, 100.0, kInt24Min, kInt24Max, "altitude");
      out.push_back(record.channel);
      out.push_back(static_cast<std::uint8_t>(record.type));
      put_be(out, lat, 3);
      put_be(out, lon, 3);
      put_be(out, alt, 3);
      return;
    }
  }
  throw RangeError("unsupported LPP type");
}

std::vector<std::uint8_t> encode_record(const LppRecord& record) {
  std::vector<std::uint8_t> out;
  out.reserve(record_size(record.type));
  append_record(out, record);
  return out;
}

std::vector<std::uint8_t> encode_records(std::span<const LppRecord> records) {
  std::vector<std::uint8_t> out;
  std::set<std::uint8_t> channels;
  for (const auto& r : records) {
    if (!channels.insert(r.channel).second) {
      throw RangeError(fmt::format("duplicate channel {}", r.channel));
    }
    append_record(out, r);
  }
  return out;
}

std::vector<LppRecord> decode_payload(std::span<const std::uint8_t> bytes) {
  std::vector<LppRecord> records;
  std::set<std::uint8_t> channels;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 2) {
      throw MalformedPayload(fmt::format("truncated record header at byte {}", pos));
    }
    const std::uint8_t channel = bytes[pos];
    const std::uint8_t type_byte = bytes[pos + 1];
    if (!known_type(type_byte)) {
      throw MalformedPayload(
          fmt::format("unknown LPP type 0x{:02X} at byte {}", type_byte, pos + 1));
    }
    const auto type = static_cast<LppType>(type_byte);
    const std::size_t size = record_size(type);
    if (bytes.size() - pos < size) {
      throw MalformedPayload(fmt::format("truncated {} record on channel {}",
                                         type_name(type), channel));
    }
    if (!channels.insert(channel).second) {
      throw MalformedPayload(fmt::format("duplicate channel {}", channel));
    }
    const std::uint8_t* data = bytes.data() + pos + 2;
    LppRecord r{channel, type, 0.0, {}};
    switch (type) {
      case LppType::DigitalInput:
        r.value = static_cast<double>(data[0]);
        break;
      case LppType::AnalogInput:
        r.value = static_cast<double>(get_be_signed(data, 2)) / 100.0;
        break;
      case LppType::Temperature:
        r.value = static_cast<double>(get_be_signed(data, 2)) / 10.0;
        break;
      case LppType::Gps: {
        const auto lat = get_be_signed(data, 3);
        const auto lon = get_be_signed(data + 3, 3);
        const auto alt = get_be_signed(data + 6, 3);
        if (lat < -900000 || lat > 900000 || lon < -1800000 || lon > 1800000) {
          throw MalformedPayload(
              fmt::format("GPS coordinates out of range on channel {}", channel));
        }
        r.gps = {static_cast<double>(lat) / 10000.0, static_cast<double>(lon) / 10000.0,
                 static_cast<double>(alt) / 100.0};
        break;
      }
    }
    records.push_back(r);
    pos += size;
  }
  return records;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i) out.push_back(' ');
    out += fmt::format("{:02X}", bytes[i]);
  }
  return out;
}

}  // namespace senswich::lpp
