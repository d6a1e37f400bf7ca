#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vitnt/degradation.hpp"
#include "vitnt/evaluation.hpp"
#include "vitnt/model_io.hpp"
#include "vitnt/quality.hpp"

namespace vitnt::cli {

namespace fs = std::filesystem;

// Echoed as '#' comment lines at the top of every output so a run can be
// reconstructed from its result files alone.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> settings;
  std::vector<std::pair<std::string, std::string>> digests;  // path, fnv1a64

  void set(std::string key, std::string value) { settings.emplace_back(std::move(key), std::move(value)); }
  void add_digest(const fs::path& path);
  std::string format() const;
};

// FNV-1a 64 of a file's bytes, hex.
std::string file_digest(const fs::path& path);

// Reads VITNT_EPS_NORM when set, otherwise the library default.
float eps_norm_from_env();

std::string format_float(double v);

// Quality flags shared by score and validate-gradient.
struct QualityFlags {
  float alpha = 1.0f;
  std::optional<std::string> blocks;  // "a..b"
  std::string aggregation = "attn-last";

  QualityConfig resolve(const VitConfig& model) const;
};

struct ScoreOptions {
  fs::path model;
  std::vector<fs::path> images;
  QualityFlags quality;
  std::optional<fs::path> per_patch;
  std::optional<fs::path> out;  // stdout when unset
  unsigned jobs = 1;
};

// Exit status: 0 unless every image failed.
int cmd_score(const ScoreOptions& options, std::ostream& out, std::ostream& err);

struct EvalEdcOptions {
  fs::path pairs;
  fs::path qualities;
  std::vector<double> fmr_targets{1e-3, 1e-4};
  std::size_t grid = 101;
  std::string pair_quality = "min";
  fs::path out_dir = ".";
};

// Curve file name for one FMR target, e.g. "edc_fmr_1e-03.tsv".
std::string curve_file_name(double fmr_target);

int cmd_eval_edc(const EvalEdcOptions& options, std::ostream& out, std::ostream& err);

struct ValidateGradientOptions {
  fs::path model;
  fs::path images_dir;
  std::vector<std::string> kinds;  // empty = all four
  std::vector<int> levels;         // empty = 0..10
  std::uint64_t seed = 0;
  QualityFlags quality;
  unsigned jobs = 1;
  std::optional<fs::path> write_groups;  // degraded PPMs + manifest.tsv
};

int cmd_validate_gradient(const ValidateGradientOptions& options, std::ostream& out, std::ostream& err);

int cmd_inspect_model(const fs::path& model, std::ostream& out, std::ostream& err);

struct MakeModelOptions {
  VitConfig config;
  std::uint64_t seed = 0;
  bool passthrough = false;
  float weight_scale = 0.2f;
  fs::path out;
};

int cmd_make_model(const MakeModelOptions& options, std::ostream& out, std::ostream& err);

struct TapsOptions {
  fs::path model;
  std::vector<fs::path> images;
  fs::path fixtures;  // written by dump-taps, read by check-fixtures
};

int cmd_dump_taps(const TapsOptions& options, std::ostream& out, std::ostream& err);
int cmd_check_fixtures(const TapsOptions& options, std::ostream& out, std::ostream& err);

// PPM files directly inside `dir`, sorted by name.
std::vector<fs::path> list_images(const fs::path& dir);

}  // namespace vitnt::cli
