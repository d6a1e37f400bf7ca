#include "vitnt/vit.hpp"

#include <cmath>

#include "vitnt/error.hpp"

namespace vitnt {

namespace tn = tensor_names;

ImageTensor preprocess(const Image& raw, const VitConfig& config) {
  if (raw.width != config.image_size || raw.height != config.image_size) {
    throw DimensionError("image is " + std::to_string(raw.width) + "x" + std::to_string(raw.height) +
                         ", model expects " + std::to_string(config.image_size) + "x" +
                         std::to_string(config.image_size));
  }
  ImageTensor out{raw.height, raw.width, std::vector<float>(raw.pixels.size())};
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
    out.data[i] = (static_cast<float>(raw.pixels[i]) / 255.0f - 0.5f) / 0.5f;
  }
  return out;
}

std::vector<float> flatten_patch(const ImageTensor& img, std::size_t patch_index, std::size_t patch_size) {
  const std::size_t grid = img.width / patch_size;
  const std::size_t x0 = (patch_index % grid) * patch_size;
  const std::size_t y0 = (patch_index / grid) * patch_size;
  std::vector<float> out;
  out.reserve(patch_size * patch_size * 3);
  for (std::size_t py = 0; py < patch_size; ++py) {
    for (std::size_t px = 0; px < patch_size; ++px) {
      for (std::size_t c = 0; c < 3; ++c) out.push_back(img.at(x0 + px, y0 + py, c));
    }
  }
  return out;
}

Tensor patchify_embed(const ImageTensor& img, const VitModel& model) {
  const VitConfig& cfg = model.config;
  if (img.width != cfg.image_size || img.height != cfg.image_size) {
    throw DimensionError("image tensor does not match model image_size " + std::to_string(cfg.image_size));
  }
  const std::size_t n = cfg.num_patches();
  const std::size_t pd = cfg.patch_dim();
  Tensor patches({n, pd});
  for (std::size_t i = 0; i < n; ++i) {
    const auto flat = flatten_patch(img, i, cfg.patch_size);
    std::copy(flat.begin(), flat.end(), patches.row(i).begin());
  }
  Tensor embedded = linear(patches, model.at(tn::kPatchWeight), model.at(tn::kPatchBias));

  const std::size_t offset = cfg.has_class_token ? 1 : 0;
  Tensor seq({n + offset, cfg.embed_dim});
  if (offset) {
    const auto& cls = model.at(tn::kClassToken);
    std::copy(cls.data().begin(), cls.data().end(), seq.row(0).begin());
  }
  std::copy(embedded.data().begin(), embedded.data().end(), seq.row(offset).begin());
  return add(seq, model.at(tn::kPosEmbed));
}

namespace {

// Columns [begin, begin + width) of a matrix.
Tensor column_slice(const Tensor& m, std::size_t begin, std::size_t width) {
  Tensor out({m.rows(), width});
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto src = m.row(r).subspan(begin, width);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

BlockOutput attention_block(const Tensor& x, std::size_t block_index, const VitModel& model) {
  const VitConfig& cfg = model.config;
  if (block_index >= cfg.num_blocks) {
    throw RangeError("block " + std::to_string(block_index) + " does not exist (model has " +
                     std::to_string(cfg.num_blocks) + ")");
  }
  const std::size_t d = cfg.embed_dim;
  if (x.rank() != 2 || x.cols() != d) {
    throw DimensionError("attention_block input must be S x " + std::to_string(d) + ", got " +
                         shape_to_string(x.shape()));
  }
  const auto eps = static_cast<float>(cfg.layer_norm_eps);
  const std::size_t heads = cfg.num_heads;
  const std::size_t dh = cfg.head_dim();
  const std::size_t s = x.rows();

  const Tensor normed = layer_norm(x, model.block(block_index, tn::kLn1Gamma), model.block(block_index, tn::kLn1Beta), eps);
  // qkv columns: [Q | K | V], each D wide; head h owns columns h*dh..(h+1)*dh of each.
  const Tensor qkv = linear(normed, model.block(block_index, tn::kQkvWeight), model.block(block_index, tn::kQkvBias));

  BlockOutput result;
  result.attention.reserve(heads);
  Tensor concat({s, d});
  const float inv_scale = 1.0f / std::sqrt(static_cast<float>(dh));
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor q = column_slice(qkv, h * dh, dh);
    const Tensor k = column_slice(qkv, d + h * dh, dh);
    const Tensor v = column_slice(qkv, 2 * d + h * dh, dh);
    Tensor attn = softmax_rows(scale(matmul_transposed(q, k), inv_scale));
    const Tensor head = matmul(attn, v);
    for (std::size_t r = 0; r < s; ++r) {
      const auto src = head.row(r);
      std::copy(src.begin(), src.end(), concat.row(r).begin() + static_cast<std::ptrdiff_t>(h * dh));
    }
    result.attention.push_back(std::move(attn));
  }
  const Tensor msa = linear(concat, model.block(block_index, tn::kAttnOutWeight), model.block(block_index, tn::kAttnOutBias));
  const Tensor mid = add(msa, x);

  const Tensor normed2 = layer_norm(mid, model.block(block_index, tn::kLn2Gamma), model.block(block_index, tn::kLn2Beta), eps);
  const Tensor hidden = gelu(linear(normed2, model.block(block_index, tn::kFc1Weight), model.block(block_index, tn::kFc1Bias)));
  const Tensor mlp = linear(hidden, model.block(block_index, tn::kFc2Weight), model.block(block_index, tn::kFc2Bias));
  result.output = add(mlp, mid);
  return result;
}

namespace {

Tensor drop_leading_rows(const Tensor& t, std::size_t count) {
  if (count == 0) return t;
  const std::size_t rows = t.rows() - count;
  std::vector<float> data(t.data().begin() + static_cast<std::ptrdiff_t>(count * t.cols()), t.data().end());
  return Tensor({rows, t.cols()}, std::move(data));
}

}  // namespace

BlockTaps forward_with_taps(const ImageTensor& img, const VitModel& model, const ForwardOptions& options) {
  const VitConfig& cfg = model.config;
  const std::size_t offset = cfg.has_class_token ? 1 : 0;

  BlockTaps taps;
  taps.class_token_offset = offset;
  taps.patch_embeddings.reserve(cfg.num_blocks);

  Tensor z = patchify_embed(img, model);
  for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
    BlockOutput out = attention_block(z, b, model);
    z = std::move(out.output);
    taps.patch_embeddings.push_back(drop_leading_rows(z, offset));
    if (options.retain_all_attention) taps.all_block_attention.push_back(out.attention);
    if (b + 1 == cfg.num_blocks) taps.last_block_attention = std::move(out.attention);
  }

  const Tensor normed = layer_norm(z, model.at(tn::kNormGamma), model.at(tn::kNormBeta),
                                   static_cast<float>(cfg.layer_norm_eps));
  Tensor feature({cfg.embed_dim});
  if (cfg.feature_pooling == FeaturePooling::class_token) {
    const auto r = normed.row(0);
    std::copy(r.begin(), r.end(), feature.data().begin());
  } else {
    const std::size_t n = cfg.num_patches();
    for (std::size_t j = 0; j < cfg.embed_dim; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) acc += normed(p + offset, j);
      feature[j] = static_cast<float>(acc / static_cast<double>(n));
    }
  }
  taps.final_feature = std::move(feature);
  return taps;
}

}  // namespace vitnt
