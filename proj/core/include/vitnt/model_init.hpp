#pragma once

#include <cstdint>

#include "vitnt/model_io.hpp"

namespace vitnt {

// Seeded synthetic models for fixtures, tests and benchmarks. Both are
// deterministic functions of (config, seed) via SplitMix64.

// Every weight ~ N(0, weight_scale^2); LN gammas ~ 1 + N(0, 0.1^2), betas ~ N(0, 0.1^2).
VitModel make_random_model(const VitConfig& config, std::uint64_t seed, float weight_scale = 0.2f);

// Random patch projection, positional embedding and class token, but every
// block weight and bias is zero and every LN is gamma = 1, beta = 0. Each block
// is then an exact identity map on its input.
VitModel make_passthrough_model(const VitConfig& config, std::uint64_t seed);

}  // namespace vitnt
