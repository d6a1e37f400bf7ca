#include <benchmark/benchmark.h>

#include <random>

#include "vitnt/degradation.hpp"
#include "vitnt/evaluation.hpp"
#include "vitnt/model_init.hpp"
#include "vitnt/quality.hpp"
#include "vitnt/vit.hpp"

namespace {

vitnt::VitConfig bench_config(std::size_t image_size, std::size_t blocks) {
  vitnt::VitConfig c;
  c.image_size = image_size;
  c.patch_size = 8;
  c.embed_dim = 64;
  c.num_blocks = blocks;
  c.num_heads = 4;
  return c;
}

vitnt::Image noise_image(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  vitnt::Image img(size, size);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

}  // namespace

static void ForwardWithTaps(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const vitnt::VitModel model = vitnt::make_random_model(bench_config(size, 4), 1);
  const vitnt::ImageTensor img = vitnt::preprocess(noise_image(size, 2), model.config);
  for (auto _ : state) {
    auto taps = vitnt::forward_with_taps(img, model);
    benchmark::DoNotOptimize(taps.final_feature);
  }
  state.SetLabel(std::to_string(model.config.num_patches()) + " patches");
}
BENCHMARK(ForwardWithTaps)->Arg(32)->Arg(64)->Arg(112)->Unit(benchmark::kMillisecond);

static void ScoreTaps(benchmark::State& state) {
  const vitnt::VitModel model = vitnt::make_random_model(bench_config(112, 4), 3);
  const auto taps = vitnt::forward_with_taps(vitnt::preprocess(noise_image(112, 4), model.config), model,
                                             {.retain_all_attention = true});
  const auto cfg = vitnt::QualityConfig::defaults_for(4);
  for (auto _ : state) {
    auto r = vitnt::score_taps(taps, cfg);
    benchmark::DoNotOptimize(r.image_score);
  }
}
BENCHMARK(ScoreTaps);

static void EdcCurve(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::vector<vitnt::VerificationPair> pairs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool genuine = i % 10 == 0;
    pairs[i] = {"a" + std::to_string(i), "b" + std::to_string(i), genuine ? 0.3f + 0.6f * u(rng) : u(rng) - 0.5f,
                genuine, u(rng), u(rng)};
  }
  const auto grid = vitnt::reject_grid(101);
  for (auto _ : state) {
    auto curve = vitnt::edc_curve(pairs, 1e-3, grid);
    benchmark::DoNotOptimize(curve.pauc25);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(EdcCurve)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity()->Unit(benchmark::kMillisecond);

static void GaussianBlur(benchmark::State& state) {
  const vitnt::Image img = noise_image(112, 6);
  const vitnt::DegradationSpec spec{vitnt::DegradationKind::gaussian_blur, static_cast<int>(state.range(0)), 0};
  for (auto _ : state) {
    auto out = vitnt::apply_degradation(img, spec);
    benchmark::DoNotOptimize(out.pixels.data());
  }
}
BENCHMARK(GaussianBlur)->Arg(1)->Arg(5)->Arg(10);
BENCHMARK_MAIN();
