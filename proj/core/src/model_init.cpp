#include "vitnt/model_init.hpp"

#include <string>

#include "vitnt/prng.hpp"

namespace vitnt {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_norm_gamma(const std::string& name) { return ends_with(name, ".gamma"); }
bool is_norm_beta(const std::string& name) { return ends_with(name, ".beta"); }
bool is_block_tensor(const std::string& name) { return name.rfind("block", 0) == 0; }

Tensor gaussian(const Shape& shape, SplitMix64& rng, double mean, double stddev) {
  Tensor t(shape);
  for (auto& v : t.data()) v = static_cast<float>(mean + stddev * rng.normal());
  return t;
}

}  // namespace

VitModel make_random_model(const VitConfig& config, std::uint64_t seed, float weight_scale) {
  VitModel model{config, {}};
  SplitMix64 root(seed);
  std::uint64_t stream = 0;
  for (const auto& [name, shape] : expected_tensors(config)) {
    SplitMix64 rng = root.split(stream++);
    if (is_norm_gamma(name)) {
      model.tensors.emplace(name, gaussian(shape, rng, 1.0, 0.1));
    } else if (is_norm_beta(name)) {
      model.tensors.emplace(name, gaussian(shape, rng, 0.0, 0.1));
    } else {
      model.tensors.emplace(name, gaussian(shape, rng, 0.0, weight_scale));
    }
  }
  return model;
}

VitModel make_passthrough_model(const VitConfig& config, std::uint64_t seed) {
  VitModel model = make_random_model(config, seed);
  for (auto& [name, tensor] : model.tensors) {
    if (is_norm_gamma(name)) {
      tensor = Tensor::filled(tensor.shape(), 1.0f);
    } else if (is_norm_beta(name) || is_block_tensor(name)) {
      tensor = Tensor(tensor.shape());
    }
  }
  return model;
}

}  // namespace vitnt
