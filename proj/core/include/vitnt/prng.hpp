#pragma once

#include <cstdint>

namespace vitnt {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen because its output is fully
// specified by a few lines of integer arithmetic, so every stochastic
// degradation and seeded fixture can be reproduced bit-for-bit in any
// language. The standard <random> distributions are implementation-defined
// and are not used for anything that ends up on disk.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) from the top 53 bits.
  double uniform() noexcept;

  // Uniform integer in [0, bound) by plain modulo reduction; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

  // Standard normal via Box-Muller, cosine branch only: each call consumes
  // exactly two outputs (u1 then u2), z = sqrt(-2 ln(1 - u1)) cos(2 pi u2).
  double normal() noexcept;

  // Independent child stream keyed by `stream`.
  SplitMix64 split(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t state_;
};

// Stateless mix of a seed and a sequence of keys.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) noexcept;

}  // namespace vitnt
