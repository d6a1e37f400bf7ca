#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "vitnt/error.hpp"
#include "vitnt/fixtures.hpp"
#include "vitnt/image.hpp"
#include "vitnt/model_init.hpp"
#include "vitnt/version.hpp"
#include "vitnt/vit.hpp"

namespace vitnt::cli {

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunManifest::add_digest(const fs::path& path) {
  std::string digest;
  try {
    digest = file_digest(path);
  } catch (const Error&) {
    digest = "unreadable";
  }
  digests.emplace_back(path.string(), digest);
}

std::string RunManifest::format() const {
  std::ostringstream out;
  out << "# vitnt " << command << '\n';
  out << "# version\t" << kVersion << '\n';
  for (const auto& [k, v] : settings) out << "# " << k << '\t' << v << '\n';
  for (const auto& [p, d] : digests) out << "# digest\t" << p << '\t' << d << '\n';
  return out.str();
}

float eps_norm_from_env() {
  const char* raw = std::getenv("VITNT_EPS_NORM");
  if (!raw || !*raw) return kL2NormEps;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
    throw ContractViolation(std::string("VITNT_EPS_NORM must be a positive number, got '") + raw + "'");
  }
  return static_cast<float>(v);
}

std::string format_float(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

QualityConfig QualityFlags::resolve(const VitConfig& model) const {
  QualityConfig cfg = QualityConfig::defaults_for(model.num_blocks);
  if (blocks) cfg.block_set = parse_block_range(*blocks);
  cfg.alpha = alpha;
  cfg.aggregation = parse_aggregation(aggregation);
  cfg.eps_norm = eps_norm_from_env();
  cfg.validate(model.num_blocks);
  return cfg;
}

namespace {

void describe_quality(RunManifest& m, const QualityConfig& cfg) {
  m.set("alpha", format_float(cfg.alpha));
  m.set("blocks", format_block_set(cfg.block_set));
  m.set("aggregation", std::string(to_string(cfg.aggregation)));
  m.set("eps_norm", format_float(cfg.eps_norm));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::clamp<unsigned>(jobs, 1, 256));
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < std::min(workers, n); ++w) pool.emplace_back(run);
  run();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string join_values(const Tensor& t) {
  std::string s;
  for (float v : t.data()) {
    s += '\t';
    s += format_float(v);
  }
  return s;
}

}  // namespace

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_score(const ScoreOptions& options, std::ostream& out, std::ostream& err) {
  const VitModel model = read_model(options.model);
  const QualityConfig cfg = options.quality.resolve(model.config);

  RunManifest manifest{"score", {}, {}};
  manifest.set("model", options.model.string());
  describe_quality(manifest, cfg);
  manifest.add_digest(options.model);
  for (const auto& p : options.images) manifest.add_digest(p);

  struct Outcome {
    std::optional<QualityResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(options.images.size());
  parallel_for(options.images.size(), options.jobs, [&](std::size_t i) {
    try {
      outcomes[i].result = score_image(preprocess(read_ppm(options.images[i]), model.config), model, cfg);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  std::ostringstream scores, patches;
  scores << manifest.format() << "# path\tQ\n";
  patches << manifest.format() << "# path\tfield\tvalues...\n";
  std::size_t failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto path = options.images[i].string();
    if (!outcomes[i].result) {
      ++failures;
      scores << "# error\t" << path << '\t' << outcomes[i].error << '\n';
      err << "error: " << path << ": " << outcomes[i].error << '\n';
      continue;
    }
    const auto& r = *outcomes[i].result;
    scores << path << '\t' << format_float(r.image_score) << '\n';
    patches << path << "\tdbar" << join_values(r.per_patch_mean_distance) << '\n';
    patches << path << "\tq" << join_values(r.per_patch_quality) << '\n';
  }

  if (options.out) {
    write_text(*options.out, scores.str());
  } else {
    out << scores.str();
  }
  if (options.per_patch) write_text(*options.per_patch, patches.str());
  const bool all_failed = !options.images.empty() && failures == options.images.size();
  return all_failed ? 1 : 0;
}

std::string curve_file_name(double fmr_target) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "edc_fmr_%.0e.tsv", fmr_target);
  return buf;
}

int cmd_eval_edc(const EvalEdcOptions& options, std::ostream& out, std::ostream& err) {
  (void)err;
  auto pairs = read_pairs(options.pairs);
  const auto qualities = read_qualities(options.qualities);
  attach_qualities(pairs, qualities);
  const auto rule = parse_pair_quality_rule(options.pair_quality);
  const auto grid = reject_grid(options.grid);
  if (options.fmr_targets.empty()) throw ContractViolation("at least one --fmr target is required");

  RunManifest manifest{"eval-edc", {}, {}};
  manifest.set("pairs", options.pairs.string());
  manifest.set("qualities", options.qualities.string());
  manifest.set("grid", std::to_string(options.grid));
  manifest.set("pair_quality", std::string(to_string(rule)));
  manifest.add_digest(options.pairs);
  manifest.add_digest(options.qualities);

  fs::create_directories(options.out_dir);
  std::ostringstream summary;
  summary << manifest.format();
  summary << "fmr_target\tthreshold\tfnmr_at_0\tauc\tpauc25\tcurve\n";
  for (double fmr : options.fmr_targets) {
    const EdcCurve curve = edc_curve(pairs, fmr, grid, rule);
    const fs::path curve_path = options.out_dir / curve_file_name(fmr);
    RunManifest curve_manifest = manifest;
    curve_manifest.set("fmr_target", format_float(fmr));
    write_text(curve_path, curve_manifest.format() + format_curve(curve));
    summary << format_float(fmr) << '\t' << format_float(curve.threshold) << '\t'
            << format_float(curve.samples.front().fnmr) << '\t' << format_float(curve.auc) << '\t'
            << format_float(curve.pauc25) << '\t' << curve_path.string() << '\n';
    if (curve.threshold_below_resolution) {
      err << "warning: fmr " << format_float(fmr)
          << " is finer than 1/#impostors; threshold placed above the maximum impostor score\n";
    }
  }
  out << summary.str();
  return 0;
}

int cmd_validate_gradient(const ValidateGradientOptions& options, std::ostream& out, std::ostream& err) {
  const VitModel model = read_model(options.model);
  QualityConfig cfg = options.quality.resolve(model.config);

  std::vector<DegradationKind> kinds;
  for (const auto& k : options.kinds) kinds.push_back(parse_degradation_kind(k));
  if (kinds.empty()) kinds = all_degradation_kinds();
  std::vector<int> levels = options.levels;
  if (levels.empty()) {
    for (int l = 0; l <= kMaxDegradationLevel; ++l) levels.push_back(l);
  }

  const auto paths = list_images(options.images_dir);
  if (paths.empty()) throw ContractViolation("no .ppm images in '" + options.images_dir.string() + "'");
  std::vector<Image> sources;
  for (const auto& p : paths) sources.push_back(read_ppm(p));

  RunManifest manifest{"validate-gradient", {}, {}};
  manifest.set("model", options.model.string());
  describe_quality(manifest, cfg);
  std::string kind_list;
  for (auto k : kinds) kind_list += (kind_list.empty() ? "" : ",") + std::string(to_string(k));
  manifest.set("kinds", kind_list);
  manifest.set("seed", std::to_string(options.seed));
  manifest.add_digest(options.model);
  for (const auto& p : paths) manifest.add_digest(p);

  const auto variants = make_quality_groups(sources, kinds, levels, options.seed);

  std::vector<double> distance(variants.size());
  std::vector<std::string> errors(variants.size());
  parallel_for(variants.size(), options.jobs, [&](std::size_t i) {
    try {
      const auto taps = forward_with_taps(preprocess(variants[i].image, model.config), model);
      const Tensor dbar = mean_patch_distance(cross_block_distances(taps, cfg));
      double acc = 0.0;
      for (float v : dbar.data()) acc += v;
      distance[i] = acc / static_cast<double>(dbar.size());
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw Error(paths[variants[i].source_index].string() + ": " + errors[i]);
  }

  if (options.write_groups) {
    fs::create_directories(*options.write_groups);
    std::ostringstream group_manifest;
    for (const auto& v : variants) {
      const fs::path p = *options.write_groups / (paths[v.source_index].stem().string() + "_" +
                                                  std::string(to_string(v.kind)) + "_L" + std::to_string(v.level) + ".ppm");
      write_ppm(v.image, p);
      group_manifest << v.level << '\t' << p.string() << '\n';
    }
    write_text(*options.write_groups / "manifest.tsv", group_manifest.str());
  }

  std::vector<std::pair<int, double>> observations;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    observations.emplace_back(variants[i].level, distance[i]);
    xs.push_back(variants[i].level);
    ys.push_back(distance[i]);
  }

  std::ostringstream table;
  table << manifest.format();
  table << "level\tcount\tq1\tmedian\tq3\twhisker_lo\twhisker_hi\tmean\n";
  for (const auto& g : group_distance_stats(observations)) {
    table << g.level << '\t' << g.count << '\t' << format_float(g.q1) << '\t' << format_float(g.median) << '\t'
          << format_float(g.q3) << '\t' << format_float(g.whisker_lo) << '\t' << format_float(g.whisker_hi) << '\t'
          << format_float(g.mean) << '\n';
  }
  std::optional<double> rho;
  if (xs.size() >= 3) rho = spearman(xs, ys);
  table << "# spearman(level, mean_distance)\t" << (rho ? format_float(*rho) : std::string("undefined")) << '\n';
  if (!rho) err << "note: spearman correlation undefined (constant level or distance)\n";
  out << table.str();
  return 0;
}

int cmd_inspect_model(const fs::path& path, std::ostream& out, std::ostream& err) {
  VitModel model;
  try {
    model = read_model_unchecked(path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  out << "config\t" << encode_config_header(model.config) << '\n';
  if (model.config.check().empty()) {
    out << "patches\t" << model.config.num_patches() << '\n';
    out << "sequence_length\t" << model.config.sequence_length() << '\n';
  }
  std::size_t params = 0;
  for (const auto& [name, t] : model.tensors) {
    out << "tensor\t" << name << '\t' << shape_to_string(t.shape()) << '\n';
    params += t.size();
  }
  out << "parameters\t" << params << '\n';
  const auto violations = validate_model(model);
  out << "violations\t" << violations.size() << '\n';
  for (const auto& v : violations) out << "violation\t" << v.describe() << '\n';
  return violations.empty() ? 0 : 1;
}

int cmd_make_model(const MakeModelOptions& options, std::ostream& out, std::ostream& err) {
  (void)err;
  const VitModel model = options.passthrough ? make_passthrough_model(options.config, options.seed)
                                             : make_random_model(options.config, options.seed, options.weight_scale);
  write_model(model, options.out);
  out << options.out.string() << '\n';
  return 0;
}

int cmd_dump_taps(const TapsOptions& options, std::ostream& out, std::ostream& err) {
  (void)err;
  const VitModel model = read_model(options.model);
  std::vector<FixtureRecord> records;
  for (const auto& p : options.images) {
    const Image img = read_ppm(p);
    records.push_back(make_fixture_record(pixel_digest(img), forward_with_taps(preprocess(img, model.config), model)));
  }
  write_text(options.fixtures, format_fixtures(records));
  out << options.fixtures.string() << '\t' << records.size() << " records\n";
  return 0;
}

int cmd_check_fixtures(const TapsOptions& options, std::ostream& out, std::ostream& err) {
  const VitModel model = read_model(options.model);
  const auto records = read_fixtures(options.fixtures);
  int status = 0;
  for (const auto& p : options.images) {
    const Image img = read_ppm(p);
    const auto digest = pixel_digest(img);
    auto it = std::find_if(records.begin(), records.end(), [&](const FixtureRecord& r) { return r.image_digest == digest; });
    if (it == records.end()) {
      err << "error: no fixture record for " << p.string() << " (digest " << digest << ")\n";
      status = 1;
      continue;
    }
    const auto mismatches = compare_fixture(*it, forward_with_taps(preprocess(img, model.config), model));
    out << p.string() << '\t' << (mismatches.empty() ? "match" : "MISMATCH") << '\t' << mismatches.size() << '\n';
    for (const auto& m : mismatches) {
      out << "  " << m.location << "\texpected " << format_float(m.expected) << "\tfound " << format_float(m.found) << '\n';
    }
    if (!mismatches.empty()) status = 1;
  }
  return status;
}

}  // namespace vitnt::cli
