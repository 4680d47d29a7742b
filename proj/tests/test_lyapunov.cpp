#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "radlab/radlab.hpp"

using namespace radlab;

TEST_CASE("cat Birkhoff series is constant") {
  const auto cat = oracles::cat_map();
  const auto plus = birkhoff(cat, TorusPointd{0.123, 0.456}, Sign::Plus, 2000);
  const auto minus = birkhoff(cat, TorusPointd{0.123, 0.456}, Sign::Minus, 2000);
  for (double v : plus.values) CHECK(v == doctest::Approx(oracles::kCatLogLambda).epsilon(1e-12));
  for (double v : minus.values) CHECK(v == doctest::Approx(-oracles::kCatLogLambda).epsilon(1e-12));
  CHECK(tail_oscillation(plus) < 1e-12);
}

TEST_CASE("cat le estimate hits the eigenvalue") {
  const auto cat = oracles::cat_map();
  const auto est = le_estimate(cat, Sign::Plus, 2000, 8, 1);
  CHECK(est.mean == doctest::Approx(oracles::kCatLogLambda).epsilon(1e-9));
  CHECK(est.stddev < 1e-12);
}

TEST_CASE("linear sign flip symmetry") {
  // For a symmetric unimodular matrix psi- = 1/psi+, so the exponents negate.
  const auto cat = oracles::cat_map();
  const auto plus = le_estimate(cat, Sign::Plus, 1000, 4, 3);
  const auto minus = le_estimate(cat, Sign::Minus, 1000, 4, 3);
  CHECK(plus.mean == doctest::Approx(-minus.mean).epsilon(1e-12));
}

TEST_CASE("shear terminal averages stabilize") {
  const auto sys = oracles::shear(0.05);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = RngStream(100, s).point();
    const auto series = birkhoff(sys, x, Sign::Plus, 100000);
    const double at4 = series.values[10000 - 1];
    const double at5 = series.values[100000 - 1];
    CHECK(std::abs(at4 - at5) < 5e-3);
  }
}

TEST_CASE("running averages are bounded by the grid maximum") {
  const auto sys = oracles::shear(0.1);
  const double L = max_log_psi(sys, Sign::Plus, 256);
  RngStream rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto series = birkhoff(sys, rng.point(), Sign::Plus, 5000);
    for (double v : series.values) CHECK(v <= L + 1e-12);
  }
}

TEST_CASE("exponents of area-preserving systems sum to zero") {
  const auto sys = oracles::shear(0.05);
  const auto x = RngStream(42, 0).point();
  const auto plus = birkhoff(sys, x, Sign::Plus, 100000);
  const auto minus = birkhoff(sys, x, Sign::Minus, 100000);
  CHECK(std::abs(plus.values.back() + minus.values.back()) < 1e-6);
}

TEST_CASE("le_estimate is reproducible from its seed") {
  const auto sys = oracles::shear(0.05);
  const auto a = le_estimate(sys, Sign::Plus, 2000, 6, 77);
  const auto b = le_estimate(sys, Sign::Plus, 2000, 6, 77);
  CHECK(a.mean == b.mean);
  CHECK(a.stddev == b.stddev);
  const auto c = le_estimate(sys, Sign::Plus, 2000, 6, 78);
  CHECK(a.mean != c.mean);
}

TEST_CASE("birkhoff rejects bad input") {
  const auto cat = oracles::cat_map();
  CHECK_THROWS_AS(birkhoff(cat, TorusPointd{0, 0}, Sign::Plus, 0), config_error);
  CHECK_THROWS_AS(le_estimate(cat, Sign::Plus, 10, 4, 1), config_error);
}
