#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vitnt/vit.hpp"

namespace vitnt {

// Reference activations dumped by an external framework for one image, used to
// cross-check the engine against the source checkpoint.
//
// Text format, one record per image, fields separated by single spaces:
//   image <pixel_digest>
//   tap <block> <numel> <checksum> <k> <v_1> ... <v_k>     (one per block, z_l)
//   attn <head> <numel> <checksum> <k> <v_1> ... <v_k>     (one per last-block head)
//   feature <d> <v_1> ... <v_d>
//   end
// checksum is the f64 sum of every element; v_i are the first k row-major
// elements. Lines starting with '#' are ignored.
struct TensorProbe {
  std::size_t index = 0;
  std::size_t numel = 0;
  double checksum = 0.0;
  std::vector<float> prefix;
};

struct FixtureRecord {
  std::string image_digest;
  std::vector<TensorProbe> taps;
  std::vector<TensorProbe> attention;
  std::vector<float> feature;
};

inline constexpr std::size_t kFixturePrefixLength = 16;
inline constexpr double kFixtureTolerance = 1e-4;

TensorProbe probe_tensor(const Tensor& t, std::size_t index, std::size_t prefix = kFixturePrefixLength);
FixtureRecord make_fixture_record(std::string image_digest, const BlockTaps& taps,
                                  std::size_t prefix = kFixturePrefixLength);

std::string format_fixtures(std::span<const FixtureRecord> records);
std::vector<FixtureRecord> parse_fixtures(std::string_view text);
std::vector<FixtureRecord> read_fixtures(const std::filesystem::path& path);

struct FixtureMismatch {
  std::string location;  // e.g. "tap 3 [5]" or "attn 0 checksum"
  double expected = 0.0;
  double found = 0.0;
};

// Prefix and feature elements must agree within `tolerance`; checksums within
// tolerance * numel. Structural differences (counts, sizes) are reported too.
std::vector<FixtureMismatch> compare_fixture(const FixtureRecord& expected, const BlockTaps& taps,
                                             double tolerance = kFixtureTolerance);

}  // namespace vitnt
