#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "radlab/radlab.hpp"

using namespace radlab;

TEST_CASE("zero generations returns the seed segment") {
  const auto cat = oracles::cat_map();
  const auto seg = grow_unstable_segment(cat, TorusPointd{0.4, 0.7}, 1e-5, 0);
  CHECK(seg.generation == 0);
  CHECK(seg.arc_length == doctest::Approx(2e-5).epsilon(1e-10));
  CHECK(seg.polyline.size() == 2);  // straight seed needs no refinement
  // polyline[0] is the forward-iterated base (trivially, zero iterations).
  CHECK(torus_distance(seg.polyline.front(), seg.base) < 1e-9);
}

TEST_CASE("linear segments stay straight and multiply by lambda") {
  // The seed must sit well above coordinate rounding (1e-16 absolute) for the
  // 1e-9 relative comparison to be meaningful.
  const auto cat = oracles::cat_map();
  const double h = 1e-6;
  for (int g : {1, 5, 10, 14}) {
    const auto seg = grow_unstable_segment(cat, TorusPointd{0.3, 0.6}, h, g);
    const double expect = 2 * h * std::pow(oracles::kCatLambda, g);
    CHECK(std::abs(seg.arc_length - expect) / expect < 1e-9);
  }
}

TEST_CASE("polyline start tracks the iterated base") {
  const auto sys = oracles::shear(0.05);
  const auto seg = grow_unstable_segment(sys, TorusPointd{0.25, 0.5}, 1e-5, 6);
  TorusPointd z = seg.base;
  for (int k = 0; k < seg.generation; ++k) z = apply(sys, z);
  CHECK(torus_distance(seg.polyline.front(), z) < 1e-9);
  // Node spacing invariant.
  for (std::size_t i = 1; i < seg.polyline.size(); ++i)
    CHECK(torus_distance(seg.polyline[i - 1], seg.polyline[i]) <= 1e-3 * (1 + 1e-9));
}

TEST_CASE("tangents align with the unstable field") {
  const auto sys = oracles::shear(0.05);
  const auto seg = grow_unstable_segment(sys, TorusPointd{0.37, 0.81}, 1e-6, 12);
  REQUIRE(seg.polyline.size() >= 3);
  double worst = 0;
  for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
    const Vec2d chord = torus_delta(seg.polyline[i - 1], seg.polyline[i]);
    // Compare against the field at the chord midpoint (mapped mid-parameter).
    const double tm = (seg.params[i - 1] + seg.params[i]) / 2;
    const auto mid = segment_point(sys, seg, tm);
    const auto dir = bundle_direction(sys, mid, Sign::Plus);
    REQUIRE(dir.converged);
    worst = std::max(worst, line_angle(chord, dir.dir));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("pushforward length equals the psi product along the orbit") {
  const auto sys = oracles::shear(0.05);
  const TorusPointd x{0.52, 0.18};
  const double h = 1e-12;
  for (int k : {5, 10, 20}) {
    const auto seg = grow_unstable_segment(sys, x, h, k);
    // The seed center is f^{-k}(x); accumulate psi+ along its forward orbit.
    double log_prod = 0;
    TorusPointd z = seg.seed_center;
    for (int i = 0; i < k; ++i) {
      log_prod += log_psi(sys, z, Sign::Plus);
      z = apply(sys, z);
    }
    const double expect = 2 * h * std::exp(log_prod);
    CHECK(std::abs(seg.arc_length - expect) / expect < 1e-3);
  }
}

TEST_CASE("lemaures check on the linear system is tight") {
  const auto cat = oracles::cat_map();
  const auto seg = grow_unstable_segment(cat, TorusPointd{0.6, 0.2}, 1e-5, 3);
  const auto chk = check_lemaures(cat, TorusPointd{0.6, 0.2}, 0.01, seg);
  CHECK(chk.holds);
  CHECK(chk.m0 == doctest::Approx(oracles::kCatLambda).epsilon(1e-12));
  CHECK(chk.length_ratio == doctest::Approx(oracles::kCatLambda).epsilon(1e-9));
}

TEST_CASE("lemaures check never fails on E+ tangent curves") {
  const auto sys = oracles::shear(0.05);
  RngStream rng(14);
  int done = 0;
  while (done < 30) {
    const auto x = rng.point();
    const double r = rng.uniform(0.005, 0.05);
    // Target an arc about 0.6 r so the curve stays inside B_r(x).
    const int gens = std::max(
        1, static_cast<int>(std::log(0.3 * r / 1e-5) / oracles::kCatLogLambda));
    const auto seg = grow_unstable_segment(sys, x, 1e-5, gens);
    bool contained = true;
    for (const auto& p : seg.polyline) contained = contained && torus_distance(p, x) <= r;
    if (!contained) continue;
    const auto chk = check_lemaures(sys, x, r, seg);
    CHECK(chk.holds);
    ++done;
  }
}

TEST_CASE("lemaures ratio converges to the pointwise multiplier as r shrinks") {
  const auto sys = oracles::shear(0.05);
  const TorusPointd x{0.31, 0.64};
  const double psi_x = psi(sys, x, Sign::Plus).value;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double r : {0.04, 0.02, 0.01, 0.005}) {
    const auto seg = grow_unstable_segment(sys, x, 1e-6, 1);
    const auto chk = check_lemaures(sys, x, r, seg);
    const double gap = std::abs(chk.m0 - chk.length_ratio);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
    CHECK(chk.m0 <= psi_x + 1e-12);
  }
  // In the limit both sides meet at ||Df(x) e+(x)||.
  const auto seg = grow_unstable_segment(sys, x, 1e-6, 1);
  const auto tiny = check_lemaures(sys, x, 0.001, seg);
  CHECK(tiny.m0 == doctest::Approx(psi_x).epsilon(1e-2));
  CHECK(tiny.length_ratio == doctest::Approx(psi_x).epsilon(1e-2));
}

TEST_CASE("segments that exit the ball are rejected") {
  const auto sys = oracles::shear(0.05);
  const auto seg = grow_unstable_segment(sys, TorusPointd{0.5, 0.5}, 1e-5, 10);
  CHECK(seg.arc_length > 0.002);
  CHECK_THROWS_AS(check_lemaures(sys, TorusPointd{0.5, 0.5}, 1e-4, seg), config_error);
}

TEST_CASE("refinement bounds and node cap") {
  const auto sys = oracles::shear(0.05);
  CHECK_THROWS_AS(grow_unstable_segment(sys, TorusPointd{0.1, 0.1}, 2e-4, 1), config_error);
  CHECK_THROWS_AS(grow_unstable_segment(sys, TorusPointd{0.1, 0.1}, 1e-5, 10, 1e-3, 100),
                  numerical_error);
}
