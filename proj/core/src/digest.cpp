#include "fedsim/digest.hpp"

#include <openssl/evp.h>

#include "fedsim/error.hpp"

namespace fedsim {

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    raise(ErrorCode::crypto_failure, "sha256 digest failed");
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  auto digest = sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return to_hex(digest);
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

}  // namespace fedsim
