#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace fedsim {

// Deterministic xoshiro256++ stream. Every consumer of randomness in the
// pipeline draws from a stream derived from (master_seed, domain, index), so
// stages and parallel workers never share state and runs replay exactly.
class RngStream {
 public:
  // Seeds the four state words by splitmix64 expansion of `seed`.
  explicit RngStream(std::uint64_t seed);

  // Stream whose state is SHA-256(BE64(master_seed) || len(domain) || domain
  // || BE64(index)). Distinct (domain, index) pairs give unrelated streams.
  static RngStream derive(std::uint64_t master_seed, std::string_view domain, std::uint64_t index);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double next_unit();

  // Uniform on [0, bound), rejection-sampled so every value is equally likely.
  std::uint64_t next_below(std::uint64_t bound);

  void fill_bytes(std::span<std::uint8_t> out);

  // Fisher-Yates, iterating from the back.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  explicit RngStream(const std::array<std::uint64_t, 4>& state);

  std::array<std::uint64_t, 4> state_;
};

// Convenience: first output of the derived stream, handy when an API takes a
// plain integer seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view domain, std::uint64_t index);

}  // namespace fedsim
