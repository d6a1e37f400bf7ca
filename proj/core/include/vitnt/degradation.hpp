#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitnt/image.hpp"

namespace vitnt {

enum class DegradationKind { gaussian_blur, down_up, occlusion, gaussian_noise };

std::string_view to_string(DegradationKind kind);
DegradationKind parse_degradation_kind(std::string_view text);
std::vector<DegradationKind> all_degradation_kinds();

inline constexpr int kMaxDegradationLevel = 10;

struct DegradationSpec {
  DegradationKind kind = DegradationKind::gaussian_blur;
  int level = 0;  // 0 (pristine) .. 10
  std::uint64_t seed = 0;
};

// Severity per level L (level 0 is the identity for every kind):
//   gaussian_blur   separable Gaussian, sigma = 0.4 L, radius ceil(3 sigma), clamp-to-edge
//   down_up         bilinear (half-pixel centres) down by 1 + L/2, then back up
//   occlusion       black block of exactly floor(5 L % of H W) pixels at a seeded position
//   gaussian_noise  additive N(0, (2.5 L)^2) per channel sample, seeded
// Results are rounded to nearest and clamped to [0, 255].
Image apply_degradation(const Image& image, const DegradationSpec& spec);

// Gaussian taps for one blur axis, normalized to sum 1; index i is offset i - radius.
std::vector<double> gaussian_kernel(double sigma);

// Bilinear resample of one interleaved RGB float buffer.
std::vector<double> resample_bilinear(std::span<const double> src, std::size_t src_w, std::size_t src_h,
                                      std::size_t dst_w, std::size_t dst_h);

struct GroupedImage {
  int level = 0;
  DegradationKind kind = DegradationKind::gaussian_blur;
  std::size_t source_index = 0;
  Image image;
};

// Ordered by source image, then kind, then level. Each variant's generator
// seed is derived from (seed, source_index, kind, level).
std::vector<GroupedImage> make_quality_groups(std::span<const Image> images, std::span<const DegradationKind> kinds,
                                              std::span<const int> levels, std::uint64_t seed);

std::uint64_t variant_seed(std::uint64_t seed, std::size_t source_index, DegradationKind kind, int level);

}  // namespace vitnt
