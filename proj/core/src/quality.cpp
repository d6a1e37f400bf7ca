#include "vitnt/quality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "vitnt/error.hpp"

namespace vitnt {

std::string_view to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::uniform:
      return "uniform";
    case Aggregation::attention_last:
      return "attn-last";
    case Aggregation::attention_all:
      return "attn-all";
  }
  return "?";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "uniform") return Aggregation::uniform;
  if (text == "attn-last" || text == "attention_last") return Aggregation::attention_last;
  if (text == "attn-all" || text == "attention_all") return Aggregation::attention_all;
  throw ContractViolation("unknown aggregation '" + std::string(text) + "'");
}

std::vector<std::size_t> block_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  for (std::size_t b = first; b <= last; ++b) out.push_back(b);
  return out;
}

std::vector<std::size_t> parse_block_range(std::string_view text) {
  const auto dots = text.find("..");
  auto bad = [&] { return ContractViolation("block range '" + std::string(text) + "' must look like a..b with a < b"); };
  if (dots == std::string_view::npos) throw bad();
  auto number = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw bad();
    return v;
  };
  const std::size_t first = number(text.substr(0, dots));
  const std::size_t last = number(text.substr(dots + 2));
  if (first >= last) throw bad();
  return block_range(first, last);
}

std::string format_block_set(const std::vector<std::size_t>& blocks) {
  if (blocks.empty()) return "";
  return std::to_string(blocks.front()) + ".." + std::to_string(blocks.back());
}

QualityConfig QualityConfig::defaults_for(std::size_t num_blocks) {
  QualityConfig cfg;
  const std::size_t depth = std::min<std::size_t>(num_blocks, 12);
  if (depth >= 1) cfg.block_set = block_range(0, depth - 1);
  return cfg;
}

void QualityConfig::validate(std::size_t num_blocks) const {
  if (block_set.size() < 2) throw ContractViolation("block set needs at least two consecutive blocks");
  for (std::size_t i = 1; i < block_set.size(); ++i) {
    if (block_set[i] != block_set[i - 1] + 1) {
      throw ContractViolation("block set " + format_block_set(block_set) + " is not consecutive");
    }
  }
  if (block_set.back() >= num_blocks) {
    throw RangeError("block " + std::to_string(block_set.back()) + " is out of range for a " +
                     std::to_string(num_blocks) + "-block model");
  }
  if (!(alpha > 0.0f) || !std::isfinite(alpha)) throw ContractViolation("alpha must be a positive finite number");
  if (!(eps_norm > 0.0f)) throw ContractViolation("eps_norm must be positive");
}

Tensor cross_block_distances(const BlockTaps& taps, const QualityConfig& config) {
  config.validate(taps.num_blocks());
  const std::size_t n = taps.num_patches();
  const std::size_t transitions = config.block_set.size() - 1;
  Tensor out({transitions, n});
  Tensor prev = l2_normalize_rows(taps.patch_embeddings[config.block_set.front()], config.eps_norm);
  for (std::size_t i = 0; i < transitions; ++i) {
    Tensor next = l2_normalize_rows(taps.patch_embeddings[config.block_set[i + 1]], config.eps_norm);
    if (next.shape() != prev.shape()) throw DimensionError("taps have inconsistent shapes");
    for (std::size_t p = 0; p < n; ++p) {
      const auto a = prev.row(p);
      const auto b = next.row(p);
      double sq = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = static_cast<double>(a[j]) - b[j];
        sq += diff * diff;
      }
      // Distances between rows of norm <= 1 lie in [0, 2].
      out(i, p) = static_cast<float>(std::min(std::sqrt(sq), 2.0));
    }
    prev = std::move(next);
  }
  return out;
}

Tensor mean_patch_distance(const Tensor& distances) {
  if (distances.empty()) throw ContractViolation("mean_patch_distance needs at least one transition");
  const std::size_t rows = distances.rows();
  const std::size_t n = distances.cols();
  Tensor out({n});
  for (std::size_t p = 0; p < n; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += distances(i, p);
    out[p] = static_cast<float>(acc / static_cast<double>(rows));
  }
  return out;
}

Tensor patch_quality(const Tensor& mean_distance, float alpha) {
  if (!(alpha > 0.0f)) throw ContractViolation("alpha must be positive");
  Tensor out = mean_distance;
  for (auto& v : out.data()) {
    v = static_cast<float>(2.0 / (1.0 + std::exp(static_cast<double>(alpha) * v)));
  }
  return out;
}

namespace {

// Normalized patch column mass of one block's heads, accumulated in f64.
std::vector<double> column_mass(const std::vector<Tensor>& heads, std::size_t offset, std::size_t n) {
  std::vector<double> mass(n, 0.0);
  for (const auto& a : heads) {
    if (a.rank() != 2 || a.rows() != n + offset || a.cols() != n + offset) {
      throw DimensionError("attention matrix " + shape_to_string(a.shape()) + " does not match " +
                           std::to_string(n) + " patches");
    }
    for (std::size_t j = offset; j < a.rows(); ++j) {
      const auto row = a.row(j);
      for (std::size_t p = 0; p < n; ++p) mass[p] += row[p + offset];
    }
  }
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) throw ContractViolation("attention carries no mass over patches");
  for (double& m : mass) m /= total;
  return mass;
}

Tensor to_weights(std::vector<double> mass) {
  double total = 0.0;
  for (double m : mass) total += m;
  Tensor w({mass.size()});
  for (std::size_t p = 0; p < mass.size(); ++p) w[p] = static_cast<float>(mass[p] / total);
  return w;
}

}  // namespace

Tensor attention_weights(const BlockTaps& taps, AttentionSource source) {
  const std::size_t n = taps.num_patches();
  const std::size_t offset = taps.class_token_offset;
  if (source == AttentionSource::last_block) {
    if (taps.last_block_attention.empty()) throw ContractViolation("taps carry no last-block attention");
    return to_weights(column_mass(taps.last_block_attention, offset, n));
  }
  if (taps.all_block_attention.empty()) {
    throw ContractViolation("taps carry no per-block attention (forward with retain_all_attention)");
  }
  std::vector<double> avg(n, 0.0);
  for (const auto& block : taps.all_block_attention) {
    const auto mass = column_mass(block, offset, n);
    for (std::size_t p = 0; p < n; ++p) avg[p] += mass[p];
  }
  for (double& m : avg) m /= static_cast<double>(taps.all_block_attention.size());
  return to_weights(std::move(avg));
}

float aggregate(const Tensor& quality) {
  if (quality.empty()) throw ContractViolation("aggregate needs at least one patch");
  double acc = 0.0;
  for (float q : quality.data()) acc += q;
  return static_cast<float>(acc / static_cast<double>(quality.size()));
}

float aggregate(const Tensor& quality, const Tensor& weights) {
  if (quality.size() != weights.size() || quality.empty()) {
    throw ContractViolation("aggregate: " + std::to_string(quality.size()) + " qualities vs " +
                            std::to_string(weights.size()) + " weights");
  }
  double wsum = 0.0, acc = 0.0;
  for (std::size_t p = 0; p < quality.size(); ++p) {
    if (weights[p] < 0.0f) throw ContractViolation("aggregate: negative weight");
    wsum += weights[p];
    acc += static_cast<double>(weights[p]) * quality[p];
  }
  if (std::abs(wsum - 1.0) > 1e-4) {
    throw ContractViolation("aggregate: weights sum to " + std::to_string(wsum) + ", not 1");
  }
  // Normalized by the actual weight sum.
  return static_cast<float>(acc / wsum);
}

QualityResult score_taps(const BlockTaps& taps, const QualityConfig& config) {
  QualityResult result;
  result.per_patch_mean_distance = mean_patch_distance(cross_block_distances(taps, config));
  result.per_patch_quality = patch_quality(result.per_patch_mean_distance, config.alpha);
  const std::size_t n = result.per_patch_quality.size();
  switch (config.aggregation) {
    case Aggregation::uniform:
      result.patch_weights = Tensor::filled({n}, 1.0f / static_cast<float>(n));
      result.image_score = aggregate(result.per_patch_quality);
      break;
    case Aggregation::attention_last:
    case Aggregation::attention_all:
      result.patch_weights = attention_weights(taps, config.aggregation == Aggregation::attention_last
                                                         ? AttentionSource::last_block
                                                         : AttentionSource::all_blocks);
      result.image_score = aggregate(result.per_patch_quality, result.patch_weights);
      break;
  }
  return result;
}

QualityResult score_image(const ImageTensor& img, const VitModel& model, const QualityConfig& config) {
  config.validate(model.config.num_blocks);
  ForwardOptions options;
  options.retain_all_attention = config.aggregation == Aggregation::attention_all;
  return score_taps(forward_with_taps(img, model, options), config);
}

}  // namespace vitnt
