#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "radlab/radlab.hpp"

using namespace radlab;

TEST_CASE("torus distance basics") {
  const TorusPointd a{0.9, 0.0};
  const TorusPointd b{0.1, 0.0};
  CHECK(torus_distance(a, a) == 0.0);
  CHECK(torus_distance(a, b) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(torus_distance(TorusPointd{0, 0}, TorusPointd{0.5, 0.5}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
}

TEST_CASE("torus distance is a metric on random triples") {
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto a = rng.point(), b = rng.point(), c = rng.point();
    CHECK(torus_distance(a, b) == doctest::Approx(torus_distance(b, a)).epsilon(1e-15));
    CHECK(torus_distance(a, c) <= torus_distance(a, b) + torus_distance(b, c) + 1e-12);
    CHECK(torus_distance(a, b) <= std::sqrt(2.0) / 2 + 1e-15);
  }
}

TEST_CASE("cat map point images") {
  const auto cat = oracles::cat_map();
  const auto o = apply(cat, TorusPointd{0, 0});
  CHECK(o.x == 0.0);
  CHECK(o.y == 0.0);
  const auto q = apply(cat, TorusPointd{0.5, 0.5});
  CHECK(q.x == 0.5);
  CHECK(q.y == 0.0);
}

TEST_CASE("shear image composes the shear before the matrix") {
  const auto sys = oracles::shear(0.1);
  // S(0.25, 0) = (0.25, 0.1); A (0.25, 0.1) = (0.6, 0.35).
  const auto q = apply(sys, TorusPointd{0.25, 0.0});
  CHECK(q.x == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(q.y == doctest::Approx(0.35).epsilon(1e-14));
}

TEST_CASE("inverse images") {
  const auto cat = oracles::cat_map();
  const auto o = apply_inverse(cat, TorusPointd{0, 0});
  CHECK(o.x == 0.0);
  CHECK(o.y == 0.0);
  // A^-1 = [[1,-1],[-1,2]]: (0.5, 0) -> (0.5, -0.5) = (0.5, 0.5).
  const auto q = apply_inverse(cat, TorusPointd{0.5, 0.0});
  CHECK(q.x == 0.5);
  CHECK(q.y == 0.5);
}

TEST_CASE("round trips for every system") {
  const SystemSpecd systems[] = {oracles::cat_map(), oracles::shear(0.05), oracles::da_example()};
  for (const auto& sys : systems) {
    RngStream rng(3);
    for (int i = 0; i < 1000; ++i) {
      const auto p = rng.point();
      CHECK(torus_distance(apply_inverse(sys, apply(sys, p)), p) < 1e-12);
      CHECK(torus_distance(apply(sys, apply_inverse(sys, p)), p) < 1e-12);
    }
  }
}

TEST_CASE("jacobians are exact") {
  const auto cat = oracles::cat_map();
  const Mat2d jc = jacobian(cat, TorusPointd{0.37, 0.91});
  CHECK(jc(0, 0) == 2.0);
  CHECK(jc(0, 1) == 1.0);
  CHECK(jc(1, 0) == 1.0);
  CHECK(jc(1, 1) == 1.0);

  const auto sys = oracles::shear(0.07);
  const TorusPointd p{0.13, 0.62};
  const double c = 2 * std::numbers::pi * 0.07 * std::cos(2 * std::numbers::pi * p.x);
  Mat2d shear_factor;
  shear_factor << 1, 0, c, 1;
  const Mat2d expected = sys.mat * shear_factor;
  CHECK((jacobian(sys, p) - expected).cwiseAbs().maxCoeff() < 1e-15);

  // Outside the bump the DA Jacobian is the bare matrix.
  const auto da = oracles::da_example();
  const Mat2d jd = jacobian(da, TorusPointd{0.5, 0.5});
  CHECK((jd - da.mat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic jacobians match central finite differences") {
  const SystemSpecd systems[] = {oracles::cat_map(), oracles::shear(0.05), oracles::da_example()};
  for (const auto& sys : systems) {
    RngStream rng(17);
    for (int i = 0; i < 1000; ++i) {
      const auto p = rng.point();
      const Mat2d a = jacobian(sys, p);
      const Mat2d f = oracles::fd_jacobian(sys, p);
      CHECK((a - f).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("area preservation for linear and shear") {
  const SystemSpecd systems[] = {oracles::cat_map(), oracles::shear(0.1)};
  for (const auto& sys : systems) {
    RngStream rng(5);
    for (int i = 0; i < 500; ++i) {
      const auto p = rng.point();
      const Mat2d j = jacobian(sys, p);
      CHECK(std::abs(std::abs(j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0)) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("spec validation rejects bad systems") {
  IntMat2 not_unimodular;
  not_unimodular << 2, 0, 0, 2;
  CHECK_THROWS_AS(SystemSpecd::linear(not_unimodular), config_error);

  IntMat2 not_hyperbolic;  // |trace| = 2
  not_hyperbolic << 1, 1, 0, 1;
  CHECK_THROWS_AS(SystemSpecd::linear(not_hyperbolic), config_error);

  IntMat2 identity = IntMat2::Identity();
  CHECK_THROWS_AS(SystemSpecd::linear(identity), config_error);

  IntMat2 cat;
  cat << 2, 1, 1, 1;
  CHECK_THROWS_AS(SystemSpecd::shear_perturbed(cat, -0.1), config_error);
  CHECK_THROWS_AS(SystemSpecd::derived_from_anosov(cat, 0.5, TorusPointd{0, 0}, 0.3), config_error);
  CHECK_THROWS_AS(SystemSpecd::derived_from_anosov(cat, 0.5, TorusPointd{0, 0}, 0.0), config_error);
  // eps = 1 drives det DB to zero at the bump center.
  CHECK_THROWS_AS(SystemSpecd::derived_from_anosov(cat, 1.0, TorusPointd{0, 0}, 0.2), config_error);
}

TEST_CASE("negative determinant hyperbolic matrices are accepted") {
  IntMat2 m;
  m << 3, 1, 1, 0;  // det -1, trace 3
  const auto sys = SystemSpecd::linear(m);
  RngStream rng(23);
  for (int i = 0; i < 200; ++i) {
    const auto p = rng.point();
    CHECK(torus_distance(apply_inverse(sys, apply(sys, p)), p) < 1e-12);
  }
}

TEST_CASE("unstable direction matches the eigen oracle") {
  const auto cat = oracles::cat_map();
  const Vec2d oracle = oracles::eigen_dominant_direction(cat.mat);
  CHECK((cat.unstable_dir - oracle).norm() < 1e-12);
}
