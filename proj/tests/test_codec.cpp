#include <doctest.h>

#include <random>
#include <set>

#include "senswich/base64.h"
#include "senswich/lpp.h"
#include "senswich/payload.h"

using namespace senswich;
using lpp::GpsFix;
using lpp::LppRecord;
using lpp::LppType;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> v) {
  std::vector<std::uint8_t> out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

std::vector<std::uint8_t> text_bytes(std::string_view s) { return {s.begin(), s.end()}; }

SampleSet lagoon_sample() {
  SampleSet s;
  s.ph = 8.12;
  s.ec = 45.3;
  s.turbidity = 1500.0;
  s.do_mgl = 7.8;
  s.liquid_level = true;
  s.temperature_c = 18.4;
  return s;
}

}  // namespace

TEST_SUITE("lpp-codec") {
  // Expected strings produced with Python's base64 module.
  TEST_CASE("base64 matches reference vectors") {
    CHECK(base64_encode(text_bytes("gps")) == "Z3Bz");
    CHECK(base64_encode(text_bytes("")) == "");
    CHECK(base64_encode(text_bytes("f")) == "Zg==");
    CHECK(base64_encode(text_bytes("fo")) == "Zm8=");
    CHECK(base64_encode(text_bytes("foob")) == "Zm9vYg==");
    CHECK(base64_encode(text_bytes("fooba")) == "Zm9vYmE=");
    CHECK(base64_encode(text_bytes("foobar")) == "Zm9vYmFy");
    CHECK(base64_encode(bytes({0x00, 0xFF, 0x80, 0x01})) == "AP+AAQ==");
    CHECK(base64_decode("AP+AAQ==") == bytes({0x00, 0xFF, 0x80, 0x01}));
    CHECK(base64_decode("Zm9vYmE=") == text_bytes("fooba"));
  }

  TEST_CASE("base64 rejects malformed input") {
    CHECK_THROWS_AS(base64_decode("!!!"), Base64Error);
    CHECK_THROWS_AS(base64_decode("Z3B"), Base64Error);
    CHECK_THROWS_AS(base64_decode("Z3B!"), Base64Error);
    CHECK_THROWS_AS(base64_decode("Z==z"), Base64Error);
    CHECK_THROWS_AS(base64_decode("Zg==Zg=="), Base64Error);
    CHECK_THROWS_AS(base64_decode("Zh=="), Base64Error);  // stray pad bits
    CHECK_THROWS_AS(base64_decode("===="), Base64Error);
    CHECK(is_valid_base64(""));
    CHECK_FALSE(is_valid_base64("Z3Bz\n"));
  }

  TEST_CASE("base64 round-trips random byte strings") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(0, 64);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 500; ++i) {
      std::vector<std::uint8_t> data(static_cast<std::size_t>(len(rng)));
      for (auto& b : data) b = static_cast<std::uint8_t>(byte(rng));
      const auto enc = base64_encode(data);
      CHECK(enc.size() % 4 == 0);
      CHECK(base64_decode(enc) == data);
    }
  }

  TEST_CASE("encode_record golden vectors") {
    CHECK(lpp::encode_record(LppRecord::analog(1, 0.0)) == bytes({0x01, 0x02, 0x00, 0x00}));
    CHECK(lpp::encode_record(LppRecord::temperature(6, 27.2)) == bytes({0x06, 0x67, 0x01, 0x10}));
    CHECK(lpp::encode_record(LppRecord::position(7, {45.4408, 12.3155, 0.0})) ==
          bytes({0x07, 0x88, 0x06, 0xEF, 0x08, 0x01, 0xE1, 0x13, 0x00, 0x00, 0x00}));
    CHECK(lpp::encode_record(LppRecord::analog(1, -3.21)) == bytes({0x01, 0x02, 0xFE, 0xBF}));
    CHECK(lpp::encode_record(LppRecord::digital(5, 1)) == bytes({0x05, 0x00, 0x01}));
  }

  TEST_CASE("encode_record range errors") {
    CHECK_NOTHROW(lpp::encode_record(LppRecord::analog(1, 327.67)));
    CHECK_NOTHROW(lpp::encode_record(LppRecord::analog(1, -327.68)));
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::analog(1, 327.68)), lpp::RangeError);
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::analog(1, -327.69)), lpp::RangeError);
    CHECK_NOTHROW(lpp::encode_record(LppRecord::temperature(6, 3276.7)));
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::temperature(6, 3276.8)), lpp::RangeError);
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::position(7, {90.0001, 0, 0})), lpp::RangeError);
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::position(7, {0, -180.5, 0})), lpp::RangeError);
    CHECK_THROWS_AS(lpp::encode_record(LppRecord::analog(1, std::nan(""))), lpp::RangeError);
    LppRecord bad_digital{5, LppType::DigitalInput, 256.0, {}};
    CHECK_THROWS_AS(lpp::encode_record(bad_digital), lpp::RangeError);
  }

  TEST_CASE("decode_payload basics and strictness") {
    const auto one = lpp::decode_payload(bytes({0x01, 0x02, 0x00, 0x00}));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == LppRecord::analog(1, 0.0));
    CHECK(lpp::decode_payload({}).empty());
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x01, 0x02, 0x00})), lpp::MalformedPayload);
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x01})), lpp::MalformedPayload);
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x01, 0x68, 0x10})), lpp::MalformedPayload);
    // trailing byte after a complete record
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x01, 0x02, 0x00, 0x00, 0x02})),
                    lpp::MalformedPayload);
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x01, 0x02, 0x00, 0x00, 0x01, 0x02, 0x00, 0x01})),
                    lpp::MalformedPayload);
    // latitude 0x7FFFFF / 10000 is far outside [-90, 90]
    CHECK_THROWS_AS(lpp::decode_payload(bytes({0x07, 0x88, 0x7F, 0xFF, 0xFF, 0, 0, 0, 0, 0, 0})),
                    lpp::MalformedPayload);
    const auto neg = lpp::decode_payload(bytes({0x01, 0x02, 0xFE, 0xBF}));
    CHECK(neg[0].value == doctest::Approx(-3.21));
  }

  TEST_CASE("round-trip and length law over random records") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_int_distribution<int> channel(0, 255);
    for (int i = 0; i < 2000; ++i) {
      LppRecord r;
      r.channel = static_cast<std::uint8_t>(channel(rng));
      switch (kind(rng)) {
        case 0:
          r = LppRecord::digital(r.channel, static_cast<std::uint8_t>(channel(rng)));
          break;
        case 1:
          r = LppRecord::analog(r.channel, std::uniform_real_distribution<>(-327.68, 327.67)(rng));
          break;
        case 2:
          r = LppRecord::temperature(r.channel,
                                     std::uniform_real_distribution<>(-3276.8, 3276.7)(rng));
          break;
        default:
          r = LppRecord::position(r.channel, {std::uniform_real_distribution<>(-90, 90)(rng),
                                              std::uniform_real_distribution<>(-180, 180)(rng),
                                              std::uniform_real_distribution<>(-8000, 8000)(rng)});
      }
      const auto enc = lpp::encode_record(r);
      CHECK(enc.size() == lpp::record_size(r.type));
      const auto dec = lpp::decode_payload(enc);
      REQUIRE(dec.size() == 1);
      CHECK(dec[0] == lpp::quantize(r));
    }
  }

  TEST_CASE("encode_sampleset lengths and channel order") {
    auto s = lagoon_sample();
    const auto periodic = encode_sampleset(s);
    CHECK(periodic.size() == 23);
    // Frozen from an independent Python struct-based encoder.
    CHECK(base64_encode(periodic) == "AQIDLAICEbIDAgXcBAIDDAUAAQZnALg=");
    const auto decoded = lpp::decode_payload(periodic);
    REQUIRE(decoded.size() == 6);
    for (std::size_t i = 0; i < decoded.size(); ++i) CHECK(decoded[i].channel == i + 1);
    CHECK(decoded[2].value == doctest::Approx(15.00));  // 1500 NTU / 100

    s.gps = GpsFix{45.4408, 12.3155, 1.5};
    const auto with_gps = encode_sampleset(s);
    CHECK(with_gps.size() == 34);
    CHECK(base64_encode(with_gps) == "AQIDLAICEbIDAgXcBAIDDAUAAQZnALgHiAbvCAHhEwAAlg==");
    CHECK(lpp::decode_payload(with_gps).size() == 7);
  }

  TEST_CASE("measurements restore engineering units") {
    auto s = lagoon_sample();
    s.gps = GpsFix{45.4408, 12.3155, 0.0};
    const auto records = lpp::decode_payload(encode_sampleset(s));
    const auto m = to_measurements(records);
    REQUIRE(m.size() == 9);
    CHECK(m[0] == Measurement{Series::Ph, 8.12});
    CHECK(m[2] == Measurement{Series::Turbidity, 1500.0});
    CHECK(m[4] == Measurement{Series::LiquidLevel, 1.0});
    CHECK(m[5].series == Series::Temperature);
    CHECK(m[6] == Measurement{Series::GpsLat, 45.4408});
    CHECK(m[7] == Measurement{Series::GpsLon, 12.3155});
    CHECK(render_cleartext(std::span(m).first(2)) == "ph=8.12 ec=45.3");

    CHECK_THROWS_AS(to_measurements(std::vector{LppRecord::analog(9, 1.0)}), UnmappedRecord);
    CHECK_THROWS_AS(to_measurements(std::vector{LppRecord::temperature(1, 1.0)}), UnmappedRecord);
  }

  TEST_CASE("channel map is a bijection") {
    const auto& map = ChannelMap::standard();
    std::set<int> channels;
    std::set<Series> series;
    for (const auto& e : map.entries()) {
      channels.insert(e.channel);
      series.insert(e.series);
      CHECK(map.by_channel(e.channel) == &e);
      CHECK(&map.by_series(e.series) == &e);
    }
    CHECK(channels.size() == map.entries().size());
    CHECK(series.size() == map.entries().size());
  }

  TEST_CASE("decode_downlink") {
    CHECK(decode_downlink(1, "Z3Bz") == Command{Command::Kind::ActivateGps, "gps"});
    CHECK(decode_downlink(1, "") == Command{Command::Kind::Unknown, ""});
    CHECK(decode_downlink(1, "R1BT").kind == Command::Kind::Unknown);  // "GPS": case-sensitive
    CHECK(decode_downlink(223, "YWJj") == Command{Command::Kind::Unknown, "abc"});
    CHECK_THROWS_AS(decode_downlink(1, "!!!"), Base64Error);
    CHECK_THROWS_AS(decode_downlink(0, "Z3Bz"), InvalidFPort);
    CHECK_THROWS_AS(decode_downlink(224, "Z3Bz"), InvalidFPort);
  }
}
