#include "senswich/base64.h"

#include <array>

namespace senswich {

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_reverse_table() {
  std::array<int, 256> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) {
    table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  }
  return table;
}

constexpr auto kReverse = make_reverse_table();

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t{bytes[i]} << 16) |
                            (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(n >> 18) & 0x3F]);
    out.push_back(kAlphabet[(n >> 12) & 0x3F]);
    out.push_back(kAlphabet[(n >> 6) & 0x3F]);
    out.push_back(kAlphabet[n & 0x3F]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t n = std::uint32_t{bytes[i]} << 16;
    out.push_back(kAlphabet[(n >> 18) & 0x3F]);
    out.push_back(kAlphabet[(n >> 12) & 0x3F]);
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t n =
        (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out.push_back(kAlphabet[(n >> 18) & 0x3F]);
    out.push_back(kAlphabet[(n >> 12) & 0x3F]);
    out.push_back(kAlphabet[(n >> 6) & 0x3F]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw Base64Error("base64 length " + std::to_string(text.size()) +
                      " is not a multiple of 4");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t q = 0; q < text.size(); q += 4) {
    const bool last = q + 4 == text.size();
    std::array<int, 4> sextets{};
    int padding = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[q + k];
      if (c == '=') {
        if (!last || k < 2) throw Base64Error("misplaced base64 padding");
        ++padding;
        sextets[k] = 0;
        continue;
      }
      if (padding > 0) throw Base64Error("data after base64 padding");
      const int v = kReverse[static_cast<unsigned char>(c)];
      if (v < 0) {
        throw Base64Error(std::string("invalid base64 character '") + c + "'");
      }
      sextets[k] = v;
    }
    const std::uint32_t n = (static_cast<std::uint32_t>(sextets[0]) << 18) |
                            (static_cast<std::uint32_t>(sextets[1]) << 12) |
                            (static_cast<std::uint32_t>(sextets[2]) << 6) |
                            static_cast<std::uint32_t>(sextets[3]);
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    if (padding < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
    if (padding < 1) out.push_back(static_cast<std::uint8_t>(n));
    // Canonical encodings leave the bits under the padding at zero.
    if ((padding == 1 && (n & 0xFF) != 0) ||
        (padding == 2 && (n & 0xFFFF) != 0)) {
      throw Base64Error("non-canonical base64 padding bits");
    }
  }
  return out;
}

bool is_valid_base64(std::string_view text) {
  try {
    base64_decode(text);
    return true;
  } catch (const Base64Error&) {
    return false;
  }
}

}  // namespace senswich
