#include <doctest.h>

#include <fstream>
#include <numeric>

#include "support.hpp"
#include "vitnt/degradation.hpp"
#include "vitnt/error.hpp"
#include "vitnt/image.hpp"

using namespace vitnt;
using vitnt::test::random_image;
using vitnt::test::scratch_dir;

TEST_CASE("kind names") {
  for (auto kind : all_degradation_kinds()) CHECK(parse_degradation_kind(to_string(kind)) == kind);
  CHECK(parse_degradation_kind("gaussian_blur") == DegradationKind::gaussian_blur);
  CHECK(parse_degradation_kind("down_up") == DegradationKind::down_up);
  CHECK_THROWS_AS(parse_degradation_kind("jpeg"), ContractViolation);
}

TEST_CASE("level 0 is the identity for every kind") {
  const Image img = random_image(17, 5);
  for (auto kind : all_degradation_kinds()) {
    CHECK(apply_degradation(img, {kind, 0, 99}) == img);
  }
}

TEST_CASE("levels outside 0..10 are rejected") {
  const Image img = random_image(8, 1);
  CHECK_THROWS_AS(apply_degradation(img, {DegradationKind::gaussian_blur, 11, 0}), ContractViolation);
  CHECK_THROWS_AS(apply_degradation(img, {DegradationKind::occlusion, -1, 0}), ContractViolation);
}

TEST_CASE("gaussian kernel") {
  CHECK(gaussian_kernel(0.0) == std::vector<double>{1.0});
  for (double sigma : {0.4, 1.2, 4.0}) {
    const auto k = gaussian_kernel(sigma);
    CHECK(k.size() % 2 == 1);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(k[i] == k[k.size() - 1 - i]);
  }
  const auto k = gaussian_kernel(0.4);
  REQUIRE(k.size() == 5);
  CHECK(k[2] == doctest::Approx(0.9192179156927948).epsilon(1e-12));
  CHECK(k[1] == doctest::Approx(0.04038761654724125).epsilon(1e-12));
}

TEST_CASE("blur and down-up leave a constant image unchanged") {
  const Image flat(23, 19, 137);
  for (int level = 1; level <= 10; ++level) {
    CHECK(apply_degradation(flat, {DegradationKind::gaussian_blur, level, 0}) == flat);
    CHECK(apply_degradation(flat, {DegradationKind::down_up, level, 0}) == flat);
  }
}

TEST_CASE("bilinear resampling to the same size is exact") {
  const Image img = random_image(6, 2);
  const std::vector<double> src(img.pixels.begin(), img.pixels.end());
  CHECK(resample_bilinear(src, 6, 6, 6, 6) == src);
}

TEST_CASE("blur lowers total variation") {
  const Image img = random_image(32, 8);
  auto variation = [](const Image& im) {
    long total = 0;
    for (std::size_t y = 0; y < im.height; ++y)
      for (std::size_t x = 1; x < im.width; ++x)
        for (std::size_t c = 0; c < 3; ++c) total += std::abs(int(im.at(x, y, c)) - int(im.at(x - 1, y, c)));
    return total;
  };
  long previous = variation(img);
  for (int level : {1, 3, 6, 10}) {
    const long v = variation(apply_degradation(img, {DegradationKind::gaussian_blur, level, 0}));
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("occlusion blacks out exactly the requested area") {
  for (std::size_t size : {112u, 37u}) {
    const Image white(size, size, 255);
    for (int level = 1; level <= 10; ++level) {
      const Image out = apply_degradation(white, {DegradationKind::occlusion, level, 1234});
      std::size_t black = 0;
      for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
        const bool is_black = out.pixels[i] == 0 && out.pixels[i + 1] == 0 && out.pixels[i + 2] == 0;
        const bool is_white = out.pixels[i] == 255 && out.pixels[i + 1] == 255 && out.pixels[i + 2] == 255;
        CHECK((is_black || is_white));
        black += is_black;
      }
      CHECK(black == static_cast<std::size_t>(5 * level) * size * size / 100);
    }
  }
  const Image white(112, 112, 255);
  const Image half = apply_degradation(white, {DegradationKind::occlusion, 10, 7});
  std::size_t black = 0;
  for (std::size_t i = 0; i < half.pixels.size(); i += 3) black += half.pixels[i] == 0;
  CHECK(black == 112 * 112 / 2);
}

TEST_CASE("noise statistics follow the level") {
  const Image grey(64, 64, 128);
  for (int level : {2, 6}) {
    const Image out = apply_degradation(grey, {DegradationKind::gaussian_noise, level, 3});
    double sum = 0, sq = 0;
    for (auto v : out.pixels) {
      const double d = double(v) - 128.0;
      sum += d;
      sq += d * d;
    }
    const double n = double(out.pixels.size());
    const double sigma = 2.5 * level;
    CHECK(std::abs(sum / n) < 0.1 * sigma);
    CHECK(std::sqrt(sq / n) == doctest::Approx(sigma).epsilon(0.05));
  }
}

TEST_CASE("degradations are deterministic in the seed") {
  const Image img = random_image(40, 11);
  for (auto kind : all_degradation_kinds()) {
    for (int level : {1, 5, 10}) {
      CHECK(apply_degradation(img, {kind, level, 77}) == apply_degradation(img, {kind, level, 77}));
    }
  }
  CHECK(apply_degradation(img, {DegradationKind::gaussian_noise, 4, 1}) !=
        apply_degradation(img, {DegradationKind::gaussian_noise, 4, 2}));
}

TEST_CASE("quality groups") {
  const std::vector<Image> one{random_image(16, 1)};
  const std::vector<Image> three{random_image(16, 1), random_image(16, 2), random_image(16, 3)};
  std::vector<int> levels(11);
  std::iota(levels.begin(), levels.end(), 0);
  const std::vector<DegradationKind> blur{DegradationKind::gaussian_blur};
  const std::vector<DegradationKind> two{DegradationKind::occlusion, DegradationKind::gaussian_noise};

  CHECK(make_quality_groups(one, blur, levels, 0).size() == 11);
  const auto groups = make_quality_groups(three, two, levels, 5);
  REQUIRE(groups.size() == 66);
  CHECK(groups[0].source_index == 0);
  CHECK(groups[0].kind == DegradationKind::occlusion);
  CHECK(groups[0].image == three[0]);
  CHECK(groups[12].kind == DegradationKind::gaussian_noise);
  CHECK(groups[12].level == 1);
  CHECK(groups[65].source_index == 2);
  CHECK(groups[65].level == 10);

  const auto again = make_quality_groups(three, two, levels, 5);
  for (std::size_t i = 0; i < groups.size(); ++i) CHECK(groups[i].image == again[i].image);

  CHECK_THROWS_AS(make_quality_groups({}, blur, levels, 0), ContractViolation);
  CHECK_THROWS_AS(make_quality_groups(one, {}, levels, 0), ContractViolation);
}

TEST_CASE("PPM round trip") {
  const auto dir = scratch_dir("ppm");
  const Image img = random_image(13, 21);
  write_ppm(img, dir / "a.ppm");
  CHECK(read_ppm(dir / "a.ppm") == img);
  CHECK(pixel_digest(read_ppm(dir / "a.ppm")) == pixel_digest(img));
}

TEST_CASE("PPM hand-written fixture") {
  const auto dir = scratch_dir("ppm_hand");
  {
    std::ofstream out(dir / "hand.ppm", std::ios::binary);
    out << "P6\n# two by two\n2 2\n255\n";
    for (char b = 0; b < 12; ++b) out.put(b);
  }
  const Image img = read_ppm(dir / "hand.ppm");
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.at(1, 0, 2) == 5);
  CHECK(img.at(0, 1, 0) == 6);
  CHECK(pixel_digest(img) == "2d7d4819416d7fb9");
}

TEST_CASE("PPM errors") {
  const auto dir = scratch_dir("ppm_err");
  {
    std::ofstream out(dir / "ascii.ppm");
    out << "P3\n1 1\n255\n0 0 0\n";
  }
  CHECK_THROWS_AS(read_ppm(dir / "ascii.ppm"), FormatError);
  {
    std::ofstream out(dir / "deep.ppm", std::ios::binary);
    out << "P6\n1 1\n65535\n";
  }
  CHECK_THROWS_AS(read_ppm(dir / "deep.ppm"), FormatError);
  {
    std::ofstream out(dir / "short.ppm", std::ios::binary);
    out << "P6\n2 2\n255\nabc";
  }
  CHECK_THROWS_AS(read_ppm(dir / "short.ppm"), LengthError);
  CHECK_THROWS_AS(read_ppm(dir / "missing.ppm"), IoError);
}
