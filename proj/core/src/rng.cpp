#include "fedsim/rng.hpp"

#include <cstring>

#include "fedsim/digest.hpp"
#include "fedsim/error.hpp"

namespace fedsim {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void put_be64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[7 - i] = static_cast<std::uint8_t>(v >> (i * 8));
  }
}

std::uint64_t read_be64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& word : state_) word = splitmix64(x);
}

RngStream::RngStream(const std::array<std::uint64_t, 4>& state) : state_(state) {
  // xoshiro256++ must never start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_ = {1, 2, 3, 4};
  }
}

RngStream RngStream::derive(std::uint64_t master_seed, std::string_view domain,
                            std::uint64_t index) {
  if (domain.size() > 255) raise(ErrorCode::invalid_config, "rng domain label too long");
  std::vector<std::uint8_t> buf(8 + 1 + domain.size() + 8);
  put_be64(buf.data(), master_seed);
  buf[8] = static_cast<std::uint8_t>(domain.size());
  std::memcpy(buf.data() + 9, domain.data(), domain.size());
  put_be64(buf.data() + 9 + domain.size(), index);

  auto digest = sha256(buf);
  std::array<std::uint64_t, 4> state;
  for (int i = 0; i < 4; ++i) state[i] = read_be64(digest.data() + i * 8);
  return RngStream(state);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  assert(bound > 0);
  // Reject the low remainder chunk so the modulo is exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

void RngStream::fill_bytes(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint8_t chunk[8];
    put_be64(chunk, next_u64());
    std::size_t n = std::min<std::size_t>(8, out.size() - i);
    std::memcpy(out.data() + i, chunk, n);
    i += n;
  }
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view domain, std::uint64_t index) {
  return RngStream::derive(master_seed, domain, index).next_u64();
}

}  // namespace fedsim
