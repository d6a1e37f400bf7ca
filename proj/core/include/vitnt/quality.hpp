#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vitnt/tensor.hpp"
#include "vitnt/vit.hpp"

namespace vitnt {

enum class Aggregation { uniform, attention_last, attention_all };

std::string_view to_string(Aggregation aggregation);
// Accepts "uniform", "attn-last"/"attention_last", "attn-all"/"attention_all".
Aggregation parse_aggregation(std::string_view text);

struct QualityConfig {
  // Consecutive tap indices t_0 < t_1 < ... with t_{i+1} = t_i + 1, at least two.
  std::vector<std::size_t> block_set;
  float alpha = 1.0f;
  Aggregation aggregation = Aggregation::attention_last;
  float eps_norm = kL2NormEps;

  // Blocks 0..min(L, 12) - 1 with last-block attention weighting.
  static QualityConfig defaults_for(std::size_t num_blocks);

  // Throws ContractViolation for malformed sets or alpha, RangeError when a
  // block index is >= num_blocks.
  void validate(std::size_t num_blocks) const;
};

// Contiguous block range [first, last], inclusive.
std::vector<std::size_t> block_range(std::size_t first, std::size_t last);
// Parses "a..b" (inclusive). Throws ContractViolation on bad syntax or a < b failing.
std::vector<std::size_t> parse_block_range(std::string_view text);
std::string format_block_set(const std::vector<std::size_t>& blocks);

// (T-1) x N: entry (i, p) = || zhat_{t_i}^(p) - zhat_{t_{i+1}}^(p) ||.
Tensor cross_block_distances(const BlockTaps& taps, const QualityConfig& config);

// Column means of a (T-1) x N matrix.
Tensor mean_patch_distance(const Tensor& distances);

// q = 2 / (1 + exp(alpha * d)).
Tensor patch_quality(const Tensor& mean_distance, float alpha);

enum class AttentionSource { last_block, all_blocks };

// Column mass of the attention matrices over patch queries, summed over heads
// and normalized to a probability vector over the N patches. Class-token rows
// and columns are excluded. For all_blocks the per-block normalized masses
// are averaged with equal weight and normalized again.
Tensor attention_weights(const BlockTaps& taps, AttentionSource source);

// Mean of q.
float aggregate(const Tensor& quality);
// sum_p w_p q_p; w must sum to 1 within 1e-4.
float aggregate(const Tensor& quality, const Tensor& weights);

struct QualityResult {
  Tensor per_patch_mean_distance;  // N
  Tensor per_patch_quality;        // N
  Tensor patch_weights;            // N, 1/N each under uniform aggregation
  float image_score = 0.0f;
};

// Quality from already-captured taps.
QualityResult score_taps(const BlockTaps& taps, const QualityConfig& config);

// Single forward pass followed by score_taps.
QualityResult score_image(const ImageTensor& img, const VitModel& model, const QualityConfig& config);

}  // namespace vitnt
