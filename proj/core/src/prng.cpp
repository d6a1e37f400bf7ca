#include "vitnt/prng.hpp"

#include <cmath>
#include <numbers>

namespace vitnt {

double SplitMix64::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SplitMix64 SplitMix64::split(std::uint64_t stream) const noexcept {
  return SplitMix64(mix_seed(state_, stream));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) noexcept {
  SplitMix64 g(seed ^ (key * 0xD1B54A32D192ED03ULL));
  g.next();
  return g.next();
}

}  // namespace vitnt
