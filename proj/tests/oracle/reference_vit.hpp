#pragma once

// Explicit-loop, double-precision ViT forward pass used only as a test oracle.
// It reads raw weights from a VitModel but shares no kernels with the engine.

#include <cmath>
#include <cstddef>
#include <vector>

#include "vitnt/model_io.hpp"

namespace vitnt::oracle {

using Matrix = std::vector<std::vector<double>>;

struct ReferenceTaps {
  std::vector<Matrix> patch_embeddings;  // L x (N x D), class token removed
  std::vector<Matrix> last_attention;    // H x (S x S)
  std::vector<double> feature;
};

inline double w(const VitModel& m, const std::string& name, std::size_t i) { return m.at(name).data()[i]; }

inline std::vector<double> layer_norm_row(const std::vector<double>& x, const VitModel& m, const std::string& gamma,
                                          const std::string& beta, double eps) {
  const std::size_t n = x.size();
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = (x[j] - mean) / std::sqrt(var + eps) * w(m, gamma, j) + w(m, beta, j);
  return out;
}

// y[o] = sum_i W[o][i] x[i] + b[o], W stored (out, in) row-major.
inline std::vector<double> affine(const std::vector<double>& x, const VitModel& m, const std::string& weight,
                                  const std::string& bias) {
  const auto& W = m.at(weight);
  const std::size_t out_dim = W.shape()[0], in_dim = W.shape()[1];
  std::vector<double> y(out_dim);
  for (std::size_t o = 0; o < out_dim; ++o) {
    double acc = w(m, bias, o);
    for (std::size_t i = 0; i < in_dim; ++i) acc += W.data()[o * in_dim + i] * x[i];
    y[o] = acc;
  }
  return y;
}

inline Matrix embed(const std::vector<float>& image_hwc, const VitModel& m) {
  const auto& c = m.config;
  const std::size_t P = c.patch_size, G = c.image_size / P, W = c.image_size, D = c.embed_dim;
  const std::size_t off = c.has_class_token ? 1 : 0;
  Matrix seq(G * G + off, std::vector<double>(D, 0.0));
  if (off) {
    for (std::size_t d = 0; d < D; ++d) seq[0][d] = w(m, "cls_token", d);
  }
  for (std::size_t gy = 0; gy < G; ++gy) {
    for (std::size_t gx = 0; gx < G; ++gx) {
      std::vector<double> patch;
      for (std::size_t py = 0; py < P; ++py)
        for (std::size_t px = 0; px < P; ++px)
          for (std::size_t ch = 0; ch < 3; ++ch) patch.push_back(image_hwc[((gy * P + py) * W + gx * P + px) * 3 + ch]);
      seq[gy * G + gx + off] = affine(patch, m, "patch_embed.weight", "patch_embed.bias");
    }
  }
  for (std::size_t s = 0; s < seq.size(); ++s)
    for (std::size_t d = 0; d < D; ++d) seq[s][d] += w(m, "pos_embed", s * D + d);
  return seq;
}

inline Matrix block(const Matrix& x, std::size_t b, const VitModel& m, std::vector<Matrix>* attention) {
  const auto& c = m.config;
  const std::size_t S = x.size(), D = c.embed_dim, H = c.num_heads, dh = D / H;
  const std::string pre = "block" + std::to_string(b) + ".";
  Matrix qkv(S);
  for (std::size_t s = 0; s < S; ++s) {
    qkv[s] = affine(layer_norm_row(x[s], m, pre + "ln1.gamma", pre + "ln1.beta", c.layer_norm_eps), m,
                    pre + "qkv.weight", pre + "qkv.bias");
  }
  Matrix concat(S, std::vector<double>(D, 0.0));
  if (attention) attention->clear();
  for (std::size_t h = 0; h < H; ++h) {
    Matrix a(S, std::vector<double>(S));
    for (std::size_t i = 0; i < S; ++i) {
      double mx = -1e300;
      for (std::size_t j = 0; j < S; ++j) {
        double dot = 0;
        for (std::size_t t = 0; t < dh; ++t) dot += qkv[i][h * dh + t] * qkv[j][D + h * dh + t];
        a[i][j] = dot / std::sqrt(static_cast<double>(dh));
        mx = std::max(mx, a[i][j]);
      }
      double sum = 0;
      for (std::size_t j = 0; j < S; ++j) sum += (a[i][j] = std::exp(a[i][j] - mx));
      for (std::size_t j = 0; j < S; ++j) a[i][j] /= sum;
      for (std::size_t t = 0; t < dh; ++t) {
        double acc = 0;
        for (std::size_t j = 0; j < S; ++j) acc += a[i][j] * qkv[j][2 * D + h * dh + t];
        concat[i][h * dh + t] = acc;
      }
    }
    if (attention) attention->push_back(a);
  }
  Matrix mid(S), out(S);
  for (std::size_t s = 0; s < S; ++s) {
    mid[s] = affine(concat[s], m, pre + "attn_out.weight", pre + "attn_out.bias");
    for (std::size_t d = 0; d < D; ++d) mid[s][d] += x[s][d];
    auto hidden = affine(layer_norm_row(mid[s], m, pre + "ln2.gamma", pre + "ln2.beta", c.layer_norm_eps), m,
                         pre + "mlp.fc1.weight", pre + "mlp.fc1.bias");
    for (double& v : hidden) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    out[s] = affine(hidden, m, pre + "mlp.fc2.weight", pre + "mlp.fc2.bias");
    for (std::size_t d = 0; d < D; ++d) out[s][d] += mid[s][d];
  }
  return out;
}

inline ReferenceTaps forward(const std::vector<float>& image_hwc, const VitModel& m) {
  const auto& c = m.config;
  const std::size_t off = c.has_class_token ? 1 : 0;
  ReferenceTaps taps;
  Matrix z = embed(image_hwc, m);
  for (std::size_t b = 0; b < c.num_blocks; ++b) {
    const bool last = b + 1 == c.num_blocks;
    z = block(z, b, m, last ? &taps.last_attention : nullptr);
    taps.patch_embeddings.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(off), z.end());
  }
  const std::size_t D = c.embed_dim;
  taps.feature.assign(D, 0.0);
  if (c.feature_pooling == FeaturePooling::class_token) {
    taps.feature = layer_norm_row(z[0], m, "norm.gamma", "norm.beta", c.layer_norm_eps);
  } else {
    for (std::size_t s = off; s < z.size(); ++s) {
      const auto n = layer_norm_row(z[s], m, "norm.gamma", "norm.beta", c.layer_norm_eps);
      for (std::size_t d = 0; d < D; ++d) taps.feature[d] += n[d] / static_cast<double>(z.size() - off);
    }
  }
  return taps;
}

}  // namespace vitnt::oracle
