#pragma once

// CayenneLPP subset used by the SENSWICH node: digital input, analog input,
// temperature and GPS. Each record is [channel][type][big-endian data].

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace senswich::lpp {

enum class LppType : std::uint8_t {
  DigitalInput = 0x00,
  AnalogInput = 0x02,
  Temperature = 0x67,
  Gps = 0x88,
};

std::string_view type_name(LppType type);

// Encoded size of one record, header included.
constexpr std::size_t record_size(LppType type) {
  switch (type) {
    case LppType::DigitalInput: return 3;
    case LppType::AnalogInput: return 4;
    case LppType::Temperature: return 4;
    case LppType::Gps: return 11;
  }
  return 0;
}

struct GpsFix {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
  double altitude = 0.0;   // metres

  bool operator==(const GpsFix&) const = default;
};

struct LppRecord {
  std::uint8_t channel = 0;
  LppType type = LppType::AnalogInput;
  double value = 0.0;  // unused for Gps
  GpsFix gps{};        // used for Gps only

  static LppRecord digital(std::uint8_t channel, std::uint8_t value);
  static LppRecord analog(std::uint8_t channel, double value);
  static LppRecord temperature(std::uint8_t channel, double celsius);
  static LppRecord position(std::uint8_t channel, GpsFix fix);

  bool operator==(const LppRecord&) const = default;
};

class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

class MalformedPayload : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Resolution of the wire representation: 1 / 0.01 / 0.1 / (0.0001, 0.01).
LppRecord quantize(const LppRecord& record);

void append_record(std::vector<std::uint8_t>& out, const LppRecord& record);
std::vector<std::uint8_t> encode_record(const LppRecord& record);
std::vector<std::uint8_t> encode_records(std::span<const LppRecord> records);

// Strict: truncated records, unknown type bytes, duplicate channels and
// out-of-range coordinates all raise MalformedPayload.
std::vector<LppRecord> decode_payload(std::span<const std::uint8_t> bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);

}  // namespace senswich::lpp
