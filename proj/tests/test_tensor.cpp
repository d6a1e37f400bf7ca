#include <doctest.h>

#include <cmath>
#include <random>

#include "vitnt/error.hpp"
#include "vitnt/tensor.hpp"

using namespace vitnt;

namespace {

Tensor random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, float spread = 3.0f) {
  std::uniform_real_distribution<float> u(-spread, spread);
  Tensor t({rows, cols});
  for (auto& v : t.data()) v = u(rng);
  return t;
}

Tensor identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0f;
  return t;
}

}  // namespace

TEST_CASE("tensor construction checks shape against data") {
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), DimensionError);
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
}

TEST_CASE("matmul") {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  SUBCASE("identity") { CHECK(matmul(identity(2), a) == a); }
  SUBCASE("hand-computed 2x2") {
    const Tensor b({2, 2}, {5, 6, 7, 8});
    CHECK(matmul(a, b) == Tensor({2, 2}, {19, 22, 43, 50}));
  }
  SUBCASE("zero annihilates") {
    std::mt19937_64 rng(1);
    const Tensor z({3, 4});
    const Tensor r = matmul(z, random_matrix(4, 5, rng));
    for (float v : r.data()) CHECK(v == 0.0f);
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      matmul(Tensor({2, 3}), Tensor({2, 3}));
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2x3] x [2x3]") != std::string::npos);
    }
  }
  SUBCASE("transposed variant agrees") {
    std::mt19937_64 rng(2);
    const Tensor x = random_matrix(3, 5, rng);
    const Tensor w = random_matrix(4, 5, rng);
    Tensor wt({5, 4});
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 5; ++j) wt(j, i) = w(i, j);
    CHECK(matmul_transposed(x, w) == matmul(x, wt));
  }
}

TEST_CASE("matmul with identity is associative (property)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng() % 6, k = 1 + rng() % 6, n = 1 + rng() % 6;
    const Tensor a = random_matrix(m, k, rng);
    const Tensor b = random_matrix(k, n, rng);
    const Tensor lhs = matmul(matmul(a, identity(k)), b);
    const Tensor rhs = matmul(a, b);
    for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) < 1e-5);
  }
}

TEST_CASE("softmax_rows") {
  SUBCASE("symmetric row") {
    const Tensor s = softmax_rows(Tensor({1, 2}, {0, 0}));
    CHECK(s[0] == 0.5f);
    CHECK(s[1] == 0.5f);
  }
  SUBCASE("large logits do not overflow") {
    const Tensor s = softmax_rows(Tensor({1, 2}, {1000, 1000}));
    CHECK(s[0] == 0.5f);
    CHECK(s[1] == 0.5f);
  }
  SUBCASE("analytic [0, ln 3]") {
    const Tensor s = softmax_rows(Tensor({1, 2}, {0.0f, std::log(3.0f)}));
    CHECK(s[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(s[1] == doctest::Approx(0.75).epsilon(1e-6));
  }
  SUBCASE("rows sum to one and ignore constant shifts (property)") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> shift(-50.0f, 50.0f);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t cols = 1 + rng() % 200;
      Tensor x = random_matrix(3, cols, rng, 20.0f);
      // Dyadic logits and an integer shift keep x + c exact in f32.
      for (auto& v : x.data()) v = std::round(v * 1024.0f) / 1024.0f;
      const Tensor s = softmax_rows(x);
      for (std::size_t r = 0; r < 3; ++r) {
        double sum = 0.0;
        for (float v : s.row(r)) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-6);
      }
      const float c = std::round(shift(rng));
      Tensor shifted = x;
      for (auto& v : shifted.data()) v += c;
      const Tensor s2 = softmax_rows(shifted);
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s[i] - s2[i]) < 1e-6);
    }
  }
}

TEST_CASE("layer_norm") {
  const Tensor ones = Tensor::filled({4}, 1.0f);
  const Tensor zeros({4});
  SUBCASE("constant row collapses to beta") {
    const Tensor y = layer_norm(Tensor({1, 4}, {5, 5, 5, 5}), ones, zeros);
    for (float v : y.data()) CHECK(v == 0.0f);
  }
  SUBCASE("unit-variance row is unchanged as eps -> 0") {
    const Tensor y = layer_norm(Tensor({1, 2}, {1, -1}), Tensor::filled({2}, 1.0f), Tensor({2}), 1e-12f);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("zero gamma gives beta") {
    const Tensor y = layer_norm(Tensor({1, 4}, {1, 7, -2, 3}), Tensor({4}), Tensor::filled({4}, 2.5f));
    for (float v : y.data()) CHECK(v == 2.5f);
  }
  SUBCASE("non-positive eps is a contract violation") {
    CHECK_THROWS_AS(layer_norm(Tensor({1, 4}), ones, zeros, 0.0f), ContractViolation);
  }
  SUBCASE("moments and shift invariance (property)") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 2 + rng() % 64;
      const Tensor g = Tensor::filled({n}, 1.0f), b({n});
      const Tensor x = random_matrix(2, n, rng, 4.0f);
      const Tensor y = layer_norm(x, g, b);
      for (std::size_t r = 0; r < 2; ++r) {
        double mean = 0, var = 0;
        for (float v : y.row(r)) mean += v;
        mean /= static_cast<double>(n);
        for (float v : y.row(r)) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        CHECK(std::abs(mean) < 1e-6);
        CHECK(std::abs(var - 1.0) < 1e-4);
      }
      Tensor shifted = x;
      for (auto& v : shifted.data()) v += 3.0f;
      const Tensor y2 = layer_norm(shifted, g, b);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y[i] - y2[i]) < 1e-5);
    }
  }
}

TEST_CASE("gelu is the exact erf form") {
  const Tensor y = gelu(Tensor({4}, {0.0f, 1.0f, 10.0f, -10.0f}));
  CHECK(y[0] == 0.0f);
  CHECK(y[1] == doctest::Approx(0.8413447460685429).epsilon(1e-7));
  CHECK(std::abs(y[2] - 10.0f) < 1e-4);
  CHECK(std::abs(y[3]) < 1e-4);
  // tanh approximation gives 0.8411920 at 1; the erf form must not.
  CHECK(std::abs(y[1] - 0.8411920f) > 1e-4);
}

TEST_CASE("l2_normalize_rows") {
  SUBCASE("3-4-5 row") {
    const Tensor y = l2_normalize_rows(Tensor({1, 2}, {3, 4}));
    CHECK(y[0] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(y[1] == doctest::Approx(0.8).epsilon(1e-7));
  }
  SUBCASE("unit row is a fixed point") {
    const Tensor u({1, 2}, {0.0f, 1.0f});
    CHECK(l2_normalize_rows(u) == u);
  }
  SUBCASE("zero row stays zero") {
    const Tensor y = l2_normalize_rows(Tensor({1, 2}));
    CHECK(y[0] == 0.0f);
    CHECK(y[1] == 0.0f);
  }
  SUBCASE("unit norm, idempotence and scale invariance (property)") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> scale_dist(1e-3f, 1e3f);
    for (int trial = 0; trial < 100; ++trial) {
      const Tensor x = random_matrix(4, 1 + rng() % 32, rng);
      const Tensor y = l2_normalize_rows(x);
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double sq = 0;
        for (float v : y.row(r)) sq += static_cast<double>(v) * v;
        CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-6);
      }
      const Tensor again = l2_normalize_rows(y);
      const Tensor scaled = l2_normalize_rows(scale(x, scale_dist(rng)));
      for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(again[i] - y[i]) < 1e-6);
        CHECK(std::abs(scaled[i] - y[i]) < 1e-6);
      }
    }
  }
}
