#pragma once

#include <cstddef>
#include <vector>

#include "vitnt/image.hpp"
#include "vitnt/model_io.hpp"
#include "vitnt/tensor.hpp"

namespace vitnt {

// Preprocessed network input: HWC f32, each channel mapped to [-1, 1].
struct ImageTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;  // height * width * 3

  float at(std::size_t x, std::size_t y, std::size_t c) const { return data[(y * width + x) * 3 + c]; }
};

// x -> (x / 255 - 0.5) / 0.5 per channel, RGB order. The engine never resizes:
// the image must already be config.image_size square.
ImageTensor preprocess(const Image& raw, const VitConfig& config);

// Flattened patch i (row-major over the patch grid): element (py * P + px) * 3 + c,
// i.e. channel innermost, then row-major spatial inside the patch.
std::vector<float> flatten_patch(const ImageTensor& img, std::size_t patch_index, std::size_t patch_size);

// Rows [cls?; Y p_1 + b; ...; Y p_N + b] + E_pos, shape sequence_length x D.
Tensor patchify_embed(const ImageTensor& img, const VitModel& model);

struct BlockOutput {
  Tensor output;
  std::vector<Tensor> attention;  // one S x S matrix per head
};

// z' = MSA(LN1(x)) + x; out = MLP(LN2(z')) + z'.
BlockOutput attention_block(const Tensor& x, std::size_t block_index, const VitModel& model);

struct ForwardOptions {
  // Keep every block's attention, not just the last one.
  bool retain_all_attention = false;
};

struct BlockTaps {
  // z_l for l = 0..L-1, each N x D, taken after the block's second residual and
  // before the final LN, with the class-token row removed.
  std::vector<Tensor> patch_embeddings;
  // Per-head attention of the last block, S x S (S includes the class token).
  std::vector<Tensor> last_block_attention;
  // all_block_attention[l][h]; empty unless ForwardOptions::retain_all_attention.
  std::vector<std::vector<Tensor>> all_block_attention;
  Tensor final_feature;  // D, pooled after the final LN
  // 1 when attention matrices carry a leading class-token row/column.
  std::size_t class_token_offset = 0;

  std::size_t num_blocks() const { return patch_embeddings.size(); }
  std::size_t num_patches() const { return patch_embeddings.empty() ? 0 : patch_embeddings.front().rows(); }
};

BlockTaps forward_with_taps(const ImageTensor& img, const VitModel& model, const ForwardOptions& options = {});

}  // namespace vitnt
