#include "fedsim/fernet.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstring>
#include <memory>

#include "fedsim/error.hpp"

namespace fedsim {

namespace {

constexpr std::size_t kHeaderLen = 1 + 8 + 16;          // version + timestamp + iv
constexpr std::size_t kMinTokenLen = kHeaderLen + 16 + 32;  // + 1 cipher block + hmac

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '-') return 62;
  if (c == '_') return 63;
  return -1;
}

void put_be64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out[7 - i] = static_cast<std::uint8_t>(v >> (i * 8));
}

std::uint64_t read_be64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

struct CipherCtxFree {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxFree>;

std::array<std::uint8_t, 32> hmac_sha256(std::span<const std::uint8_t, 16> key,
                                         std::span<const std::uint8_t> message) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), message.data(), message.size(),
           out.data(), &len) == nullptr ||
      len != out.size()) {
    raise(ErrorCode::crypto_failure, "hmac computation failed");
  }
  return out;
}

}  // namespace

std::string base64url_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve(((data.size() + 2) / 3) * 4);
  std::size_t i = 0;
  while (i + 3 <= data.size()) {
    std::uint32_t v = (static_cast<std::uint32_t>(data[i]) << 16) |
                      (static_cast<std::uint32_t>(data[i + 1]) << 8) | data[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
    i += 3;
  }
  std::size_t rest = data.size() - i;
  if (rest == 1) {
    std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    std::uint32_t v = (static_cast<std::uint32_t>(data[i]) << 16) |
                      (static_cast<std::uint32_t>(data[i + 1]) << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64url_decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    raise(ErrorCode::invalid_token, "base64 length must be a multiple of 4");
  }
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  std::size_t body = text.size() - pad;

  std::vector<std::uint8_t> out;
  out.reserve(body * 3 / 4);
  std::uint32_t acc = 0;
  int bits = 0;
  for (std::size_t i = 0; i < body; ++i) {
    int v = decode_char(text[i]);
    if (v < 0) raise(ErrorCode::invalid_token, "invalid base64url character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> bits));
    }
  }
  if (pad == 1 && body % 4 != 3) raise(ErrorCode::invalid_token, "misplaced base64 padding");
  if (pad == 2 && body % 4 != 2) raise(ErrorCode::invalid_token, "misplaced base64 padding");
  if (pad == 0 && body % 4 != 0) raise(ErrorCode::invalid_token, "truncated base64 input");
  if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) {
    raise(ErrorCode::invalid_token, "nonzero base64 tail bits");
  }
  return out;
}

SecretKey SecretKey::from_external(std::string_view encoded) {
  std::vector<std::uint8_t> raw;
  try {
    raw = base64url_decode(encoded);
  } catch (const Error&) {
    raise(ErrorCode::invalid_key, "key is not valid base64url");
  }
  if (raw.size() != 32) {
    raise(ErrorCode::invalid_key,
          "key must decode to 32 bytes, got " + std::to_string(raw.size()));
  }
  SecretKey key;
  std::memcpy(key.signing_key.data(), raw.data(), 16);
  std::memcpy(key.encryption_key.data(), raw.data() + 16, 16);
  return key;
}

std::string SecretKey::external() const {
  std::array<std::uint8_t, 32> raw{};
  std::memcpy(raw.data(), signing_key.data(), 16);
  std::memcpy(raw.data() + 16, encryption_key.data(), 16);
  return base64url_encode(raw);
}

FernetToken FernetToken::parse(std::string_view encoded) {
  auto raw = base64url_decode(encoded);
  if (raw.size() < kMinTokenLen || (raw.size() - kHeaderLen - 32) % 16 != 0) {
    raise(ErrorCode::invalid_token, "token is truncated or misaligned");
  }
  FernetToken t;
  t.version = raw[0];
  if (t.version != 0x80) {
    raise(ErrorCode::invalid_token,
          "unsupported version byte " + std::to_string(static_cast<int>(t.version)));
  }
  t.timestamp = read_be64(raw.data() + 1);
  std::memcpy(t.iv.data(), raw.data() + 9, 16);
  t.ciphertext.assign(raw.begin() + kHeaderLen, raw.end() - 32);
  std::memcpy(t.hmac.data(), raw.data() + raw.size() - 32, 32);
  return t;
}

std::string FernetToken::external() const {
  std::vector<std::uint8_t> raw;
  raw.reserve(kHeaderLen + ciphertext.size() + 32);
  raw.push_back(version);
  std::uint8_t ts[8];
  put_be64(ts, timestamp);
  raw.insert(raw.end(), ts, ts + 8);
  raw.insert(raw.end(), iv.begin(), iv.end());
  raw.insert(raw.end(), ciphertext.begin(), ciphertext.end());
  raw.insert(raw.end(), hmac.begin(), hmac.end());
  return base64url_encode(raw);
}

SecretKey generate_key(RngStream& rng) {
  SecretKey key;
  rng.fill_bytes(key.signing_key);
  rng.fill_bytes(key.encryption_key);
  return key;
}

std::vector<SecretKey> session_keys(int k_clients, std::uint64_t master_seed) {
  if (k_clients < 1) raise(ErrorCode::invalid_config, "need at least one client");
  std::vector<SecretKey> keys;
  keys.reserve(static_cast<std::size_t>(k_clients));
  for (int i = 0; i < k_clients; ++i) {
    RngStream rng = RngStream::derive(master_seed, "key", static_cast<std::uint64_t>(i));
    keys.push_back(generate_key(rng));
  }
  return keys;
}

std::string encrypt(const SecretKey& key, std::span<const std::uint8_t> plaintext,
                    std::uint64_t timestamp, std::span<const std::uint8_t, 16> iv) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr,
                                 key.encryption_key.data(), iv.data()) != 1) {
    raise(ErrorCode::crypto_failure, "cipher init failed");
  }

  std::vector<std::uint8_t> raw(kHeaderLen);
  raw[0] = 0x80;
  put_be64(raw.data() + 1, timestamp);
  std::memcpy(raw.data() + 9, iv.data(), 16);

  raw.resize(kHeaderLen + plaintext.size() + 16);
  int out_len = 0;
  int total = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(ctx.get(), raw.data() + kHeaderLen, &out_len, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1) {
      raise(ErrorCode::crypto_failure, "cipher update failed");
    }
    total = out_len;
  }
  if (EVP_EncryptFinal_ex(ctx.get(), raw.data() + kHeaderLen + total, &out_len) != 1) {
    raise(ErrorCode::crypto_failure, "cipher final failed");
  }
  total += out_len;
  raw.resize(kHeaderLen + static_cast<std::size_t>(total));

  auto mac = hmac_sha256(key.signing_key, raw);
  raw.insert(raw.end(), mac.begin(), mac.end());
  return base64url_encode(raw);
}

std::vector<std::uint8_t> decrypt(const SecretKey& key, std::string_view token,
                                  std::optional<std::uint64_t> ttl_seconds, std::uint64_t now) {
  auto raw = base64url_decode(token);
  if (raw.size() < kMinTokenLen || (raw.size() - kHeaderLen - 32) % 16 != 0) {
    raise(ErrorCode::invalid_token, "token is truncated or misaligned");
  }
  if (raw[0] != 0x80) {
    raise(ErrorCode::invalid_token,
          "unsupported version byte " + std::to_string(static_cast<int>(raw[0])));
  }

  std::uint64_t ts = read_be64(raw.data() + 1);
  if (ttl_seconds.has_value()) {
    if (ts <= now && now - ts > *ttl_seconds) {
      raise(ErrorCode::expired_token, "token ttl exceeded");
    }
    if (ts > now && ts - now > kMaxClockSkewSeconds) {
      raise(ErrorCode::expired_token, "token timestamp too far in the future");
    }
  }

  auto signed_part = std::span(raw).first(raw.size() - 32);
  auto mac = hmac_sha256(key.signing_key, signed_part);
  if (CRYPTO_memcmp(mac.data(), raw.data() + raw.size() - 32, 32) != 0) {
    raise(ErrorCode::invalid_signature, "hmac mismatch");
  }

  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_cbc(), nullptr,
                                 key.encryption_key.data(), raw.data() + 9) != 1) {
    raise(ErrorCode::crypto_failure, "cipher init failed");
  }
  const std::size_t ct_len = raw.size() - kHeaderLen - 32;
  std::vector<std::uint8_t> plain(ct_len + 16);
  int out_len = 0;
  int total = 0;
  if (EVP_DecryptUpdate(ctx.get(), plain.data(), &out_len, raw.data() + kHeaderLen,
                        static_cast<int>(ct_len)) != 1) {
    raise(ErrorCode::crypto_failure, "cipher update failed");
  }
  total = out_len;
  if (EVP_DecryptFinal_ex(ctx.get(), plain.data() + total, &out_len) != 1) {
    raise(ErrorCode::invalid_padding, "pkcs7 padding check failed");
  }
  total += out_len;
  plain.resize(static_cast<std::size_t>(total));
  return plain;
}

}  // namespace fedsim
