#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fedsim {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);

// Lowercase hex digest of a text buffer.
std::string sha256_hex(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data);

}  // namespace fedsim
