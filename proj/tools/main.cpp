#include <iostream>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "vitnt/error.hpp"
#include "vitnt/version.hpp"

namespace {

void add_quality_flags(CLI::App* cmd, vitnt::cli::QualityFlags& q) {
  cmd->add_option("--alpha", q.alpha, "Scale of the distance-to-quality sigmoid")->capture_default_str();
  cmd->add_option("--blocks", q.blocks, "Consecutive block range a..b (default 0..min(L,12)-1)");
  cmd->add_option("--agg", q.aggregation, "Aggregation: uniform, attn-last, attn-all")
      ->check(CLI::IsMember({"uniform", "attn-last", "attn-all"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = vitnt::cli;
  CLI::App app{"vitnt: training-free face image quality from ViT cross-block patch stability"};
  app.set_version_flag("--version", std::string(vitnt::kVersion));
  app.require_subcommand(1);

  cli::ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "Score images with a VWTF model");
  score_cmd->add_option("--model", score.model, "VWTF model file")->required();
  score_cmd->add_option("images", score.images, "P6 PPM images")->required();
  add_quality_flags(score_cmd, score.quality);
  score_cmd->add_option("--per-patch", score.per_patch, "Write per-patch dbar and q values to this file");
  score_cmd->add_option("--out", score.out, "Score file (default stdout)");
  score_cmd->add_option("--jobs", score.jobs, "Worker threads")->capture_default_str();

  cli::EvalEdcOptions edc;
  std::vector<double> fmr;
  auto* edc_cmd = app.add_subcommand("eval-edc", "EDC curves, AUC and pAUC at fixed FMR");
  edc_cmd->add_option("--pairs", edc.pairs, "id_a<TAB>id_b<TAB>similarity<TAB>is_genuine")->required();
  edc_cmd->add_option("--qualities", edc.qualities, "id<TAB>score")->required();
  edc_cmd->add_option("--fmr", fmr, "FMR target (repeatable; default 1e-3 1e-4)");
  edc_cmd->add_option("--grid", edc.grid, "Number of reject fractions in [0,1]")->capture_default_str();
  edc_cmd->add_option("--pair-quality", edc.pair_quality, "Pair quality rule")
      ->check(CLI::IsMember({"min", "mean"}))
      ->capture_default_str();
  edc_cmd->add_option("--out-dir", edc.out_dir, "Directory for curve files")->capture_default_str();

  cli::ValidateGradientOptions grad;
  auto* grad_cmd = app.add_subcommand("validate-gradient", "Distance statistics per degradation level");
  grad_cmd->add_option("--model", grad.model, "VWTF model file")->required();
  grad_cmd->add_option("--images", grad.images_dir, "Directory of source PPM images")->required();
  grad_cmd->add_option("--kinds", grad.kinds, "blur, downup, occlusion, noise (comma-separated; default all)")->delimiter(',');
  grad_cmd->add_option("--levels", grad.levels, "Levels to generate, comma-separated (default 0..10)")->delimiter(',');
  grad_cmd->add_option("--seed", grad.seed, "Degradation seed")->capture_default_str();
  grad_cmd->add_option("--jobs", grad.jobs, "Worker threads")->capture_default_str();
  grad_cmd->add_option("--write-groups", grad.write_groups, "Write degraded images and manifest.tsv here");
  add_quality_flags(grad_cmd, grad.quality);

  std::filesystem::path inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect-model", "Print config, tensors and validation results");
  inspect_cmd->add_option("model", inspect_path, "VWTF model file")->required();

  cli::MakeModelOptions make;
  auto* make_cmd = app.add_subcommand("make-model", "Write a seeded synthetic model");
  make_cmd->add_option("--out", make.out, "Output VWTF file")->required();
  make_cmd->add_option("--image-size", make.config.image_size)->capture_default_str();
  make_cmd->add_option("--patch-size", make.config.patch_size)->capture_default_str();
  make_cmd->add_option("--embed-dim", make.config.embed_dim)->capture_default_str();
  make_cmd->add_option("--blocks", make.config.num_blocks)->capture_default_str();
  make_cmd->add_option("--heads", make.config.num_heads)->capture_default_str();
  make_cmd->add_option("--mlp-ratio", make.config.mlp_ratio)->capture_default_str();
  make_cmd->add_flag("--class-token", make.config.has_class_token);
  make_cmd->add_option("--seed", make.seed)->capture_default_str();
  make_cmd->add_option("--weight-scale", make.weight_scale)->capture_default_str();
  make_cmd->add_flag("--passthrough", make.passthrough, "Zero every block weight (each block is an identity)");

  cli::TapsOptions dump;
  auto* dump_cmd = app.add_subcommand("dump-taps", "Write engine activations in the fixture format");
  dump_cmd->add_option("--model", dump.model)->required();
  dump_cmd->add_option("--out", dump.fixtures)->required();
  dump_cmd->add_option("images", dump.images)->required();

  cli::TapsOptions check;
  auto* check_cmd = app.add_subcommand("check-fixtures", "Compare engine activations to reference fixtures");
  check_cmd->add_option("--model", check.model)->required();
  check_cmd->add_option("--fixtures", check.fixtures)->required();
  check_cmd->add_option("images", check.images)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score_cmd) return cli::cmd_score(score, std::cout, std::cerr);
    if (*edc_cmd) {
      if (!fmr.empty()) edc.fmr_targets = fmr;
      return cli::cmd_eval_edc(edc, std::cout, std::cerr);
    }
    if (*grad_cmd) return cli::cmd_validate_gradient(grad, std::cout, std::cerr);
    if (*inspect_cmd) return cli::cmd_inspect_model(inspect_path, std::cout, std::cerr);
    if (*make_cmd) return cli::cmd_make_model(make, std::cout, std::cerr);
    if (*dump_cmd) return cli::cmd_dump_taps(dump, std::cout, std::cerr);
    if (*check_cmd) return cli::cmd_check_fixtures(check, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
