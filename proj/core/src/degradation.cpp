#include "vitnt/degradation.hpp"

#include <algorithm>
#include <cmath>

#include "vitnt/error.hpp"
#include "vitnt/prng.hpp"

namespace vitnt {

std::string_view to_string(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::gaussian_blur:
      return "blur";
    case DegradationKind::down_up:
      return "downup";
    case DegradationKind::occlusion:
      return "occlusion";
    case DegradationKind::gaussian_noise:
      return "noise";
  }
  return "?";
}

DegradationKind parse_degradation_kind(std::string_view text) {
  if (text == "blur" || text == "gaussian_blur") return DegradationKind::gaussian_blur;
  if (text == "downup" || text == "down_up") return DegradationKind::down_up;
  if (text == "occlusion") return DegradationKind::occlusion;
  if (text == "noise" || text == "gaussian_noise") return DegradationKind::gaussian_noise;
  throw ContractViolation("unknown degradation kind '" + std::string(text) + "'");
}

std::vector<DegradationKind> all_degradation_kinds() {
  return {DegradationKind::gaussian_blur, DegradationKind::down_up, DegradationKind::occlusion,
          DegradationKind::gaussian_noise};
}

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

std::vector<double> to_double(const Image& img) { return {img.pixels.begin(), img.pixels.end()}; }

Image from_double(const std::vector<double>& data, std::size_t w, std::size_t h) {
  Image out(w, h);
  for (std::size_t i = 0; i < data.size(); ++i) out.pixels[i] = quantize(data[i]);
  return out;
}

Image blur(const Image& img, int level) {
  const auto kernel = gaussian_kernel(0.4 * level);
  const auto radius = static_cast<long>(kernel.size() / 2);
  const auto w = static_cast<long>(img.width), h = static_cast<long>(img.height);
  const auto src = to_double(img);
  std::vector<double> tmp(src.size()), dst(src.size());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (long c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          const long sx = std::clamp(x + k, 0L, w - 1);
          acc += kernel[static_cast<std::size_t>(k + radius)] * src[static_cast<std::size_t>((y * w + sx) * 3 + c)];
        }
        tmp[static_cast<std::size_t>((y * w + x) * 3 + c)] = acc;
      }
    }
  }
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (long c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          const long sy = std::clamp(y + k, 0L, h - 1);
          acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>((sy * w + x) * 3 + c)];
        }
        dst[static_cast<std::size_t>((y * w + x) * 3 + c)] = acc;
      }
    }
  }
  return from_double(dst, img.width, img.height);
}

Image down_up(const Image& img, int level) {
  const double factor = 1.0 + level / 2.0;
  const auto small_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.width / factor)));
  const auto small_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(img.height / factor)));
  const auto src = to_double(img);
  const auto small = resample_bilinear(src, img.width, img.height, small_w, small_h);
  return from_double(resample_bilinear(small, small_w, small_h, img.width, img.height), img.width, img.height);
}

Image occlude(const Image& img, int level, std::uint64_t seed) {
  const std::size_t w = img.width, h = img.height;
  const std::size_t area = static_cast<std::size_t>(5 * level) * w * h / 100;
  if (area == 0) return img;
  // Near-square block: `cols` wide, full rows plus one partial row, area pixels total.
  auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(area))));
  cols = std::max(cols, (area + h - 1) / h);
  cols = std::min(cols, w);
  const std::size_t rows = (area + cols - 1) / cols;
  SplitMix64 rng(seed);
  const std::size_t x0 = rng.below(w - cols + 1);
  const std::size_t y0 = rng.below(h - rows + 1);
  Image out = img;
  for (std::size_t i = 0; i < area; ++i) {
    const std::size_t x = x0 + i % cols, y = y0 + i / cols;
    for (std::size_t c = 0; c < 3; ++c) out.at(x, y, c) = 0;
  }
  return out;
}

Image add_noise(const Image& img, int level, std::uint64_t seed) {
  const double sigma = 2.5 * level;
  SplitMix64 rng(seed);
  Image out = img;
  for (auto& v : out.pixels) v = quantize(v + sigma * rng.normal());
  return out;
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

std::vector<double> resample_bilinear(std::span<const double> src, std::size_t src_w, std::size_t src_h,
                                      std::size_t dst_w, std::size_t dst_h) {
  std::vector<double> dst(dst_w * dst_h * 3);
  const double sx_scale = static_cast<double>(src_w) / static_cast<double>(dst_w);
  const double sy_scale = static_cast<double>(src_h) / static_cast<double>(dst_h);
  auto sample = [&](std::size_t x, std::size_t y, std::size_t c) { return src[(y * src_w + x) * 3 + c]; };
  for (std::size_t y = 0; y < dst_h; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(src_h - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src_h - 1);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < dst_w; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx_scale - 0.5, 0.0, static_cast<double>(src_w - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src_w - 1);
      const double tx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = sample(x0, y0, c) * (1.0 - tx) + sample(x1, y0, c) * tx;
        const double bottom = sample(x0, y1, c) * (1.0 - tx) + sample(x1, y1, c) * tx;
        dst[(y * dst_w + x) * 3 + c] = top * (1.0 - ty) + bottom * ty;
      }
    }
  }
  return dst;
}

Image apply_degradation(const Image& image, const DegradationSpec& spec) {
  if (spec.level < 0 || spec.level > kMaxDegradationLevel) {
    throw ContractViolation("degradation level " + std::to_string(spec.level) + " outside 0..10");
  }
  if (spec.level == 0) return image;
  switch (spec.kind) {
    case DegradationKind::gaussian_blur:
      return blur(image, spec.level);
    case DegradationKind::down_up:
      return down_up(image, spec.level);
    case DegradationKind::occlusion:
      return occlude(image, spec.level, spec.seed);
    case DegradationKind::gaussian_noise:
      return add_noise(image, spec.level, spec.seed);
  }
  return image;
}

std::uint64_t variant_seed(std::uint64_t seed, std::size_t source_index, DegradationKind kind, int level) {
  const std::uint64_t key = (static_cast<std::uint64_t>(kind) << 8) | static_cast<std::uint64_t>(level);
  return mix_seed(mix_seed(seed, source_index), key);
}

std::vector<GroupedImage> make_quality_groups(std::span<const Image> images, std::span<const DegradationKind> kinds,
                                              std::span<const int> levels, std::uint64_t seed) {
  if (images.empty() || kinds.empty() || levels.empty()) {
    throw ContractViolation("make_quality_groups needs at least one image, kind and level");
  }
  std::vector<GroupedImage> out;
  out.reserve(images.size() * kinds.size() * levels.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (auto kind : kinds) {
      for (int level : levels) {
        const DegradationSpec spec{kind, level, variant_seed(seed, i, kind, level)};
        out.push_back({level, kind, i, apply_degradation(images[i], spec)});
      }
    }
  }
  return out;
}

}  // namespace vitnt
