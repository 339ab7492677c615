#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

// Tokens follow the Fernet layout: 0x80 version byte, big-endian 64-bit unix
// timestamp, 16-byte IV, AES-128-CBC/PKCS#7 ciphertext, then HMAC-SHA256
// over everything before it, the whole frame base64url-encoded with padding.

constexpr std::uint64_t kMaxClockSkewSeconds = 60;

struct SecretKey {
  std::array<std::uint8_t, 16> signing_key{};
  std::array<std::uint8_t, 16> encryption_key{};

  // 44-character base64url encoding of signing || encryption.
  static SecretKey from_external(std::string_view encoded);
  std::string external() const;
};

struct FernetToken {
  std::uint8_t version = 0x80;
  std::uint64_t timestamp = 0;
  std::array<std::uint8_t, 16> iv{};
  std::vector<std::uint8_t> ciphertext;
  std::array<std::uint8_t, 32> hmac{};

  // Structural decode only; no key needed. Throws InvalidToken.
  static FernetToken parse(std::string_view encoded);
  std::string external() const;
};

SecretKey generate_key(RngStream& rng);

// One key per client, derived from the master seed. Distinct seeds give
// disjoint key sets.
std::vector<SecretKey> session_keys(int k_clients, std::uint64_t master_seed);

std::string encrypt(const SecretKey& key, std::span<const std::uint8_t> plaintext,
                    std::uint64_t timestamp, std::span<const std::uint8_t, 16> iv);

// Full verification pipeline: structure, version, TTL / clock skew (when a
// ttl is given), HMAC in constant time, then padding. The MAC is checked
// before any decryption output exists.
std::vector<std::uint8_t> decrypt(const SecretKey& key, std::string_view token,
                                  std::optional<std::uint64_t> ttl_seconds, std::uint64_t now);

std::string base64url_encode(std::span<const std::uint8_t> data);

// Strict decode: padded canonical base64url only, rejects stray '=' and
// nonzero tail bits. Throws InvalidToken.
std::vector<std::uint8_t> base64url_decode(std::string_view text);

}  // namespace fedsim
