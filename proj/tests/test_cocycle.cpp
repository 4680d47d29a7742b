#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "radlab/radlab.hpp"

using namespace radlab;

TEST_CASE("conorm closed form") {
  CHECK(conorm<double>(Mat2d::Identity()) == 1.0);
  Mat2d diag;
  diag << 2, 0, 0, 0.5;
  CHECK(conorm(diag) == doctest::Approx(0.5).epsilon(1e-15));
  const auto cat = oracles::cat_map();
  CHECK(conorm(cat.mat) == doctest::Approx(oracles::svd_conorm(cat.mat)).epsilon(1e-14));
  CHECK(conorm(cat.mat) == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
}

TEST_CASE("conorm times norm equals |det|") {
  RngStream rng(2);
  for (int i = 0; i < 2000; ++i) {
    Mat2d m;
    m << rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (std::abs(det) < 1e-6) continue;
    CHECK(conorm(m) * operator_norm(m) == doctest::Approx(std::abs(det)).epsilon(1e-12));
    CHECK(conorm(m) == doctest::Approx(oracles::svd_conorm(m)).epsilon(1e-11));
  }
  Mat2d singular;
  singular << 1, 2, 2, 4;
  CHECK_THROWS_AS(conorm(singular), numerical_error);
}

TEST_CASE("cat splitting matches the eigenvector oracle") {
  const auto cat = oracles::cat_map();
  const auto s = splitting_at(cat, TorusPointd{0.3, 0.7});
  REQUIRE(s.converged);
  CHECK((s.e_plus - oracles::eigen_dominant_direction(cat.mat)).norm() < 1e-9);
  CHECK((s.e_minus - oracles::eigen_subordinate_direction(cat.mat)).norm() < 1e-9);
  CHECK(s.angle == doctest::Approx(std::numbers::pi / 2).epsilon(1e-8));  // symmetric matrix
  CHECK(s.iterations_used <= kDefaultPowerIterations);
  CHECK(s.e_plus.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.e_minus.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shear splitting equivariance residual") {
  const auto sys = oracles::shear(0.05);
  RngStream rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto p = rng.point();
    CHECK(equivariance_residual(sys, p, Sign::Plus) < 1e-8);
    CHECK(equivariance_residual(sys, p, Sign::Minus) < 1e-8);
  }
}

TEST_CASE("cat psi values") {
  const auto cat = oracles::cat_map();
  RngStream rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto p = rng.point();
    CHECK(psi(cat, p, Sign::Plus).value == doctest::Approx(oracles::kCatLambda).epsilon(1e-12));
    CHECK(psi(cat, p, Sign::Minus).value == doctest::Approx(1 / oracles::kCatLambda).epsilon(1e-12));
  }
}

TEST_CASE("psi plus is multiplicative along orbits") {
  const SystemSpecd systems[] = {oracles::cat_map(), oracles::shear(0.05), oracles::da_example()};
  for (const auto& sys : systems) {
    RngStream rng(8);
    int done = 0;
    while (done < 200) {
      const auto x = rng.point();
      const int n = 1 + static_cast<int>(rng.uniform01() * 19);
      const int m = 1 + static_cast<int>(rng.uniform01() * std::max(1.0, 39.0 - n));
      try {
        const double whole = log_psi(sys, x, Sign::Plus, n + m);
        TorusPointd fx = x;
        for (int k = 0; k < n; ++k) fx = apply(sys, fx);
        const double split = log_psi(sys, x, Sign::Plus, n) + log_psi(sys, fx, Sign::Plus, m);
        CHECK(std::abs(whole - split) < 1e-9 * std::max(1.0, std::abs(whole)));
      } catch (const numerical_error&) {
        continue;  // non-converged sample points are excluded by contract
      }
      ++done;
    }
  }
}

TEST_CASE("psi plus against the cone brute-force oracle") {
  // The cone minimum sits on the cone boundary, a first-order offset away from
  // psi_+ = ||Df e_+||; the discrepancy is bounded by |<Df e_+, Df e_perp>| /
  // ||Df e_+|| times the half-angle, plus curvature. The oracle must also
  // never exceed psi_+ itself (e_+ lies inside the cone).
  const auto sys = oracles::shear(0.05);
  RngStream rng(6);
  for (int i = 0; i < 25; ++i) {
    const auto p = rng.point();
    const auto dir = bundle_direction(sys, p, Sign::Plus);
    REQUIRE(dir.converged);
    const double psi_v = psi(sys, p, Sign::Plus).value;
    const double half_angle = 1e-3;
    const double cone = oracles::cone_min(sys, p, dir.dir, half_angle, 10000);
    CHECK(cone <= psi_v + 1e-12);
    const Mat2d j = jacobian(sys, p);
    const Vec2d perp(-dir.dir(1), dir.dir(0));
    const double slope = std::abs((j * dir.dir).dot(j * perp)) / psi_v;
    CHECK(psi_v - cone <= slope * half_angle + psi_v * half_angle * half_angle + 1e-6);
  }
}

TEST_CASE("psi_ball on a constant field equals psi") {
  const auto cat = oracles::cat_map();
  const TorusPointd p{0.2, 0.8};
  const double pointwise = psi(cat, p, Sign::Plus).value;
  for (double eps : {0.01, 0.1, 0.25}) {
    CHECK(psi_ball(cat, p, Sign::Plus, 1, eps).value == pointwise);
  }
}

TEST_CASE("psi_ball extremizes in the right direction") {
  const auto sys = oracles::shear(0.1);
  RngStream rng(13);
  for (int i = 0; i < 30; ++i) {
    const auto p = rng.point();
    const double eps = rng.uniform(0.01, 0.25);
    CHECK(psi_ball(sys, p, Sign::Plus, 1, eps).value <= psi(sys, p, Sign::Plus).value);
    CHECK(psi_ball(sys, p, Sign::Minus, 1, eps).value >= psi(sys, p, Sign::Minus).value);
  }
}

TEST_CASE("psi_ball against a 10x finer grid") {
  // Both grids sample the same continuous field; their minima can differ by at
  // most the field's Lipschitz bound times the coarse node-capture distance.
  const auto sys = oracles::shear(0.1);
  const double eps = 0.05;
  const TorusPointd p{0.3, 0.55};
  const double coarse = psi_ball(sys, p, Sign::Plus, 1, eps).value;
  double fine = std::numeric_limits<double>::infinity();
  const double h = eps / 160.0;
  for (int i = -160; i <= 160; ++i)
    for (int j = -160; j <= 160; ++j) {
      const double ox = i * h, oy = j * h;
      if (ox * ox + oy * oy > eps * eps * (1 + 1e-12)) continue;
      fine = std::min(fine, psi(sys, TorusPointd::wrapped(p.x + ox, p.y + oy), Sign::Plus).value);
    }
  CHECK(fine <= coarse + 1e-12);
  const auto hoelder = estimate_hoelder(sys, Sign::Plus, 1.0, 20000, 0.25, 7);
  const double lip = hoelder.C * psi(sys, p, Sign::Plus).value;  // |grad psi| <= C psi
  CHECK(coarse - fine <= lip * (1.5 * eps / 16));
}

TEST_CASE("cat domination margin") {
  const auto cat = oracles::cat_map();
  const auto rep = check_domination(cat, 0.5, 64);
  CHECK(rep.gamma_max == doctest::Approx(oracles::kCatLogLambda).epsilon(1e-12));
  CHECK(rep.holds);
  // margin = 2 (gamma_max - gamma) exactly, which gives monotonicity in gamma.
  CHECK(rep.margin == doctest::Approx(2 * (rep.gamma_max - 0.5)).epsilon(1e-12));
  const auto tighter = check_domination(cat, 0.9, 64);
  CHECK(tighter.holds);
  const auto too_much = check_domination(cat, 1.0, 64);
  CHECK_FALSE(too_much.holds);
}

TEST_CASE("shear and da remain dominated") {
  const auto rep = check_domination(oracles::shear(0.05), 0.1, 64);
  CHECK(rep.gamma_max > 0);
  CHECK(rep.holds);
  const auto da = check_domination(oracles::da_example(), 0.1, 64);
  CHECK(da.gamma_max > 0);
}
