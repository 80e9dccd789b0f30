#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace senswich {

class Base64Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RFC 4648 standard alphabet, '=' padding required.
std::string base64_encode(std::span<const std::uint8_t> bytes);

// Strict decoder: rejects characters outside the alphabet, missing or
// misplaced padding, and non-zero pad bits.
std::vector<std::uint8_t> base64_decode(std::string_view text);

bool is_valid_base64(std::string_view text);

}  // namespace senswich
