#include "vitnt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vitnt/error.hpp"

namespace vitnt {

std::string_view to_string(PairQualityRule rule) { return rule == PairQualityRule::min ? "min" : "mean"; }

PairQualityRule parse_pair_quality_rule(std::string_view text) {
  if (text == "min") return PairQualityRule::min;
  if (text == "mean") return PairQualityRule::mean;
  throw ContractViolation("unknown pair-quality rule '" + std::string(text) + "'");
}

float pair_quality(const VerificationPair& pair, PairQualityRule rule) {
  if (rule == PairQualityRule::min) return std::min(pair.quality_a, pair.quality_b);
  return static_cast<float>((static_cast<double>(pair.quality_a) + pair.quality_b) / 2.0);
}

float cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DimensionError("cosine_similarity: lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ContractViolation("cosine_similarity of a zero vector");
  return static_cast<float>(std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0));
}

float cosine_similarity(const Tensor& a, const Tensor& b) { return cosine_similarity(a.data(), b.data()); }

Threshold threshold_at_fmr(std::span<const float> impostor_similarities, double fmr_target) {
  if (impostor_similarities.empty()) throw ContractViolation("threshold_at_fmr: no impostor scores");
  if (!(fmr_target > 0.0 && fmr_target < 1.0)) {
    throw ContractViolation("threshold_at_fmr: fmr_target must lie in (0, 1)");
  }
  std::vector<float> sorted(impostor_similarities.begin(), impostor_similarities.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t m = sorted.size();
  const auto k = static_cast<std::size_t>(std::floor(fmr_target * static_cast<double>(m)));

  Threshold t;
  t.below_resolution = k == 0;
  const float boundary = sorted[k];
  // Next larger distinct score sits at the end of the run of scores > boundary.
  auto above = std::find_if(sorted.rbegin() + static_cast<std::ptrdiff_t>(m - k), sorted.rend(),
                            [&](float s) { return s > boundary; });
  if (above == sorted.rend()) {
    t.value = std::nextafter(boundary, std::numeric_limits<float>::infinity());
  } else {
    t.value = static_cast<float>((static_cast<double>(boundary) + *above) / 2.0);
    if (t.value <= boundary) t.value = std::nextafter(boundary, std::numeric_limits<float>::infinity());
  }
  return t;
}

double acceptance_rate(std::span<const float> scores, float threshold) {
  if (scores.empty()) return 0.0;
  const auto accepted = std::count_if(scores.begin(), scores.end(), [&](float s) { return s >= threshold; });
  return static_cast<double>(accepted) / static_cast<double>(scores.size());
}

std::vector<double> reject_grid(std::size_t points) {
  if (points < 2) throw ContractViolation("reject grid needs at least two points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

std::size_t discard_count(double reject_fraction, std::size_t total) {
  const double raw = std::floor(reject_fraction * static_cast<double>(total) + 1e-9);
  return std::min(total, static_cast<std::size_t>(std::max(0.0, raw)));
}

EdcCurve edc_curve(std::span<const VerificationPair> pairs, double fmr_target, std::span<const double> grid,
                   PairQualityRule rule) {
  std::vector<float> impostors;
  std::size_t genuine_total = 0;
  for (const auto& p : pairs) {
    if (p.is_genuine) {
      ++genuine_total;
    } else {
      impostors.push_back(p.similarity);
    }
  }
  if (genuine_total == 0) throw ContractViolation("edc_curve: no genuine pairs");
  if (impostors.empty()) throw ContractViolation("edc_curve: no impostor pairs");

  std::vector<double> rs(grid.begin(), grid.end());
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  if (rs.empty() || rs.front() < 0.0 || rs.back() > 1.0) {
    throw ContractViolation("edc_curve: reject fractions must lie in [0, 1]");
  }

  EdcCurve curve;
  curve.fmr_target = fmr_target;
  const Threshold threshold = threshold_at_fmr(impostors, fmr_target);
  curve.threshold = threshold.value;
  curve.threshold_below_resolution = threshold.below_resolution;

  std::vector<float> quality(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) quality[i] = pair_quality(pairs[i], rule);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quality[a] != quality[b]) return quality[a] < quality[b];
    if (pairs[a].id_a != pairs[b].id_a) return pairs[a].id_a < pairs[b].id_a;
    if (pairs[a].id_b != pairs[b].id_b) return pairs[a].id_b < pairs[b].id_b;
    return a < b;
  });

  // Genuine and false-non-match counts among the first i discarded pairs.
  std::vector<std::size_t> genuine_prefix(pairs.size() + 1, 0), error_prefix(pairs.size() + 1, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& p = pairs[order[i]];
    genuine_prefix[i + 1] = genuine_prefix[i] + (p.is_genuine ? 1 : 0);
    error_prefix[i + 1] = error_prefix[i] + (p.is_genuine && p.similarity < curve.threshold ? 1 : 0);
  }
  const std::size_t error_total = error_prefix.back();
  double previous = static_cast<double>(error_total) / static_cast<double>(genuine_total);

  for (double r : rs) {
    const std::size_t dropped = discard_count(r, pairs.size());
    const std::size_t genuine_left = genuine_total - genuine_prefix[dropped];
    EdcSample s{r, previous, false};
    if (genuine_left == 0) {
      s.degenerate = true;
    } else {
      s.fnmr = static_cast<double>(error_total - error_prefix[dropped]) / static_cast<double>(genuine_left);
    }
    previous = s.fnmr;
    curve.samples.push_back(s);
  }
  if (curve.samples.size() >= 2) {
    curve.auc = auc(curve);
    curve.pauc25 = curve.samples.back().reject_fraction >= 0.25 ? pauc(curve, 0.25) : 0.0;
  }
  return curve;
}

double auc(const EdcCurve& curve) {
  const auto& s = curve.samples;
  if (s.size() < 2) throw ContractViolation("auc needs at least two samples");
  double area = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    area += (s[i].reject_fraction - s[i - 1].reject_fraction) * (s[i].fnmr + s[i - 1].fnmr) / 2.0;
  }
  return area;
}

double pauc(const EdcCurve& curve, double delta) {
  const auto& s = curve.samples;
  if (s.size() < 2) throw ContractViolation("pauc needs at least two samples");
  if (!(delta > 0.0) || delta > s.back().reject_fraction + 1e-12) {
    throw ContractViolation("pauc: delta " + std::to_string(delta) + " outside the sampled range");
  }
  double area = 0.0;
  for (std::size_t i = 1; i < s.size() && s[i - 1].reject_fraction < delta; ++i) {
    const double x0 = s[i - 1].reject_fraction, y0 = s[i - 1].fnmr;
    double x1 = s[i].reject_fraction, y1 = s[i].fnmr;
    if (x1 > delta) {
      y1 = y0 + (y1 - y0) * (delta - x0) / (x1 - x0);
      x1 = delta;
    }
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return area / delta;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("spearman: inputs differ in length");
  if (x.size() < 3) throw ContractViolation("spearman: need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ContractViolation("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<GroupStats> group_distance_stats(std::span<const std::pair<int, double>> observations) {
  std::map<int, std::vector<double>> by_level;
  for (const auto& [level, value] : observations) by_level[level].push_back(value);
  std::vector<GroupStats> out;
  for (auto& [level, values] : by_level) {
    std::sort(values.begin(), values.end());
    GroupStats g;
    g.level = level;
    g.count = values.size();
    g.q1 = quantile_type7(values, 0.25);
    g.median = quantile_type7(values, 0.5);
    g.q3 = quantile_type7(values, 0.75);
    const double iqr = g.q3 - g.q1;
    const double lo_fence = g.q1 - 1.5 * iqr, hi_fence = g.q3 + 1.5 * iqr;
    g.whisker_lo = *std::find_if(values.begin(), values.end(), [&](double v) { return v >= lo_fence; });
    g.whisker_hi = *std::find_if(values.rbegin(), values.rend(), [&](double v) { return v <= hi_fence; });
    g.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    out.push_back(g);
  }
  return out;
}

}  // namespace vitnt
