#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vitnt/tensor.hpp"

namespace vitnt {

enum class FeaturePooling { mean_patch, class_token };

std::string_view to_string(FeaturePooling pooling);
FeaturePooling parse_feature_pooling(std::string_view text);

struct VitConfig {
  std::size_t image_size = 112;
  std::size_t patch_size = 8;
  std::size_t embed_dim = 512;
  std::size_t num_blocks = 12;
  std::size_t num_heads = 8;
  double mlp_ratio = 4.0;
  bool has_class_token = false;
  FeaturePooling feature_pooling = FeaturePooling::mean_patch;
  double layer_norm_eps = 1e-6;

  std::size_t grid() const { return image_size / patch_size; }
  // N, the number of image patches.
  std::size_t num_patches() const { return grid() * grid(); }
  // Rows that flow through the blocks: N, plus one with a class token.
  std::size_t sequence_length() const { return num_patches() + (has_class_token ? 1 : 0); }
  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t mlp_hidden_dim() const;
  // Length of one flattened patch, P*P*3.
  std::size_t patch_dim() const { return patch_size * patch_size * 3; }

  // Arithmetic constraints on the fields; empty when consistent.
  std::vector<std::string> check() const;

  friend bool operator==(const VitConfig&, const VitConfig&) = default;
};

// Tensor names. Per-block tensors are "block<i>.<leaf>".
namespace tensor_names {
inline constexpr std::string_view kPatchWeight = "patch_embed.weight";
inline constexpr std::string_view kPatchBias = "patch_embed.bias";
inline constexpr std::string_view kPosEmbed = "pos_embed";
inline constexpr std::string_view kClassToken = "cls_token";
inline constexpr std::string_view kNormGamma = "norm.gamma";
inline constexpr std::string_view kNormBeta = "norm.beta";

inline constexpr std::string_view kLn1Gamma = "ln1.gamma";
inline constexpr std::string_view kLn1Beta = "ln1.beta";
inline constexpr std::string_view kQkvWeight = "qkv.weight";
inline constexpr std::string_view kQkvBias = "qkv.bias";
inline constexpr std::string_view kAttnOutWeight = "attn_out.weight";
inline constexpr std::string_view kAttnOutBias = "attn_out.bias";
inline constexpr std::string_view kLn2Gamma = "ln2.gamma";
inline constexpr std::string_view kLn2Beta = "ln2.beta";
inline constexpr std::string_view kFc1Weight = "mlp.fc1.weight";
inline constexpr std::string_view kFc1Bias = "mlp.fc1.bias";
inline constexpr std::string_view kFc2Weight = "mlp.fc2.weight";
inline constexpr std::string_view kFc2Bias = "mlp.fc2.bias";

std::string block(std::size_t index, std::string_view leaf);
}  // namespace tensor_names

// Every tensor a config requires, with its exact shape, in name order.
std::vector<std::pair<std::string, Shape>> expected_tensors(const VitConfig& config);

struct VitModel {
  VitConfig config;
  std::map<std::string, Tensor, std::less<>> tensors;

  // Throws ValidationError naming the tensor when absent.
  const Tensor& at(std::string_view name) const;
  const Tensor& block(std::size_t index, std::string_view leaf) const;
};

struct Violation {
  std::string subject;  // tensor name, or "config"
  std::optional<Shape> expected;
  std::optional<Shape> found;  // nullopt when the tensor is missing
  std::string message;

  std::string describe() const;
};

std::vector<Violation> validate_model(const VitModel& model);

// VWTF container, all integers little-endian:
//   "VWTF" | u32 version=1 | u32 header_len | header (UTF-8 JSON of VitConfig)
//   | u32 tensor_count | per tensor: u32 name_len, name, u32 rank, u64 dims[rank],
//   f32 payload[prod(dims)]
// Tensors are written sorted by name, so output is byte-deterministic.
inline constexpr std::uint32_t kVwtfVersion = 1;

// Parses without validating shapes. Throws FormatError / LengthError / IoError.
VitModel read_model_unchecked(const std::filesystem::path& path);
// Parses, then throws ValidationError listing every violation.
VitModel read_model(const std::filesystem::path& path);
// Throws ValidationError before touching the file if the model is invalid.
void write_model(const VitModel& model, const std::filesystem::path& path);

std::string encode_config_header(const VitConfig& config);
VitConfig decode_config_header(std::string_view text);

}  // namespace vitnt
