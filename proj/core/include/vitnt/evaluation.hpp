#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vitnt/tensor.hpp"

namespace vitnt {

struct VerificationPair {
  std::string id_a;
  std::string id_b;
  float similarity = 0.0f;
  bool is_genuine = false;
  float quality_a = 0.0f;
  float quality_b = 0.0f;
};

enum class PairQualityRule { min, mean };
std::string_view to_string(PairQualityRule rule);
PairQualityRule parse_pair_quality_rule(std::string_view text);

float pair_quality(const VerificationPair& pair, PairQualityRule rule);

// a.b / (|a| |b|), clamped to [-1, 1]. Throws ContractViolation for a zero vector.
float cosine_similarity(std::span<const float> a, std::span<const float> b);
float cosine_similarity(const Tensor& a, const Tensor& b);

struct Threshold {
  float value = 0.0f;
  // fmr_target < 1/M: no score can be accepted, the threshold sits above the maximum.
  bool below_resolution = false;
};

// Impostor scores sorted descending as s[0..M); k = floor(fmr_target * M) scores
// may be accepted (score >= t). The boundary s[k] must be rejected, so t is the
// midpoint between s[k] and the next larger distinct score, or s[k] + 1 ulp when
// s[k] is the maximum. Requires 0 < fmr_target < 1 and a non-empty list.
Threshold threshold_at_fmr(std::span<const float> impostor_similarities, double fmr_target);

// Fraction of scores >= threshold.
double acceptance_rate(std::span<const float> scores, float threshold);

struct EdcSample {
  double reject_fraction = 0.0;
  double fnmr = 0.0;
  // No genuine pair survived the discard; fnmr repeats the previous sample.
  bool degenerate = false;
};

struct EdcCurve {
  double fmr_target = 0.0;
  float threshold = 0.0f;
  bool threshold_below_resolution = false;
  std::vector<EdcSample> samples;
  double auc = 0.0;
  double pauc25 = 0.0;
};

// `points` evenly spaced fractions 0 .. 1 inclusive.
std::vector<double> reject_grid(std::size_t points);

// Number of lowest-quality comparisons discarded at fraction r of `total`.
// floor(r * total), with a 1e-9 guard so grid values such as 0.15 * 20 do not
// round down a whole comparison.
std::size_t discard_count(double reject_fraction, std::size_t total);

// The threshold is fixed once from every impostor pair. All pairs are ranked
// together by pair quality (ties by id_a, id_b, then input position) and the
// lowest floor(r * total) are discarded; FNMR is the fraction of retained
// genuine pairs with similarity < threshold. auc/pauc25 are filled in.
EdcCurve edc_curve(std::span<const VerificationPair> pairs, double fmr_target, std::span<const double> grid,
                   PairQualityRule rule = PairQualityRule::min);

// Trapezoidal area under FNMR over [0, last reject fraction].
double auc(const EdcCurve& curve);
// Trapezoidal area over [0, delta] (interpolating at delta), divided by delta.
double pauc(const EdcCurve& curve, double delta = 0.25);

// Average ranks for ties, then Pearson on ranks. nullopt when either input is
// constant. Throws ContractViolation for unequal lengths or fewer than 3 values.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Type-7 quantile (linear interpolation between order statistics, h = (n-1) p).
double quantile_type7(std::span<const double> sorted, double p);

struct GroupStats {
  int level = 0;
  std::size_t count = 0;
  double q1 = 0, median = 0, q3 = 0;
  // Most extreme observations within 1.5 IQR of the quartiles.
  double whisker_lo = 0, whisker_hi = 0;
  double mean = 0;
};

// One entry per distinct level, ascending.
std::vector<GroupStats> group_distance_stats(std::span<const std::pair<int, double>> observations);

// ---- text interfaces -------------------------------------------------------

// `id_a \t id_b \t similarity \t is_genuine(0|1)`; blank and '#' lines skipped.
std::vector<VerificationPair> read_pairs(const std::filesystem::path& path);
std::vector<VerificationPair> parse_pairs(std::string_view text, std::string_view source = "<pairs>");
// `id \t score`.
std::map<std::string, float, std::less<>> read_qualities(const std::filesystem::path& path);
std::map<std::string, float, std::less<>> parse_qualities(std::string_view text, std::string_view source = "<qualities>");

// Fills quality_a/quality_b. Throws ContractViolation listing every missing id.
void attach_qualities(std::span<VerificationPair> pairs, const std::map<std::string, float, std::less<>>& qualities);

// Header comments (fmr_target, threshold, auc, pauc25), then `r \t fnmr` lines.
std::string format_curve(const EdcCurve& curve);

}  // namespace vitnt
