#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "vitnt/image.hpp"
#include "vitnt/model_io.hpp"
#include "vitnt/vit.hpp"

namespace vitnt::test {

// image 8x8, P=4 -> N=4, D=8, H=2, L=2.
inline VitConfig tiny_config(bool class_token = false) {
  VitConfig c;
  c.image_size = 8;
  c.patch_size = 4;
  c.embed_dim = 8;
  c.num_blocks = 2;
  c.num_heads = 2;
  c.mlp_ratio = 2.0;
  c.has_class_token = class_token;
  c.feature_pooling = class_token ? FeaturePooling::class_token : FeaturePooling::mean_patch;
  return c;
}

inline Image random_image(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  Image img(size, size);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(byte(rng));
  return img;
}

inline ImageTensor random_input(const VitConfig& c, std::uint64_t seed) {
  return preprocess(random_image(c.image_size, seed), c);
}

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vitnt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace vitnt::test
