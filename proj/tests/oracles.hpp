// Test-only oracles, independent of the library's computation paths:
// eigen-decomposition and SVD come from Eigen's iterative solvers (the library
// itself uses closed 2x2 forms and power iteration), derivatives from central
// finite differences, periodic orbits from brute-forced rational lattices.
#pragma once

#include "radlab/radlab.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <map>
#include <vector>

namespace oracles {

using namespace radlab;

/// Unit eigenvector of the (real-eigenvalue) 2x2 matrix for its largest
/// eigenvalue by magnitude, via Eigen's general eigensolver.
inline Vec2d eigen_dominant_direction(const Mat2d& m) {
  Eigen::EigenSolver<Mat2d> es(m);
  const auto& vals = es.eigenvalues();
  const int idx = std::abs(vals(0)) >= std::abs(vals(1)) ? 0 : 1;
  Vec2d v = es.eigenvectors().col(idx).real();
  return canonical_direction<double>(v.normalized());
}

inline Vec2d eigen_subordinate_direction(const Mat2d& m) {
  Eigen::EigenSolver<Mat2d> es(m);
  const auto& vals = es.eigenvalues();
  const int idx = std::abs(vals(0)) >= std::abs(vals(1)) ? 1 : 0;
  Vec2d v = es.eigenvectors().col(idx).real();
  return canonical_direction<double>(v.normalized());
}

inline double eigen_dominant_value(const Mat2d& m) {
  Eigen::EigenSolver<Mat2d> es(m);
  const auto& vals = es.eigenvalues();
  return std::abs(vals(0)) >= std::abs(vals(1)) ? vals(0).real() : vals(1).real();
}

/// Smallest singular value via Eigen's Jacobi SVD.
inline double svd_conorm(const Mat2d& m) {
  Eigen::JacobiSVD<Mat2d> svd(m);
  return svd.singularValues()(1);
}

inline double svd_norm(const Mat2d& m) {
  Eigen::JacobiSVD<Mat2d> svd(m);
  return svd.singularValues()(0);
}

/// Central finite-difference Jacobian of the map, wrap-aware.
inline Mat2d fd_jacobian(const SystemSpecd& spec, const TorusPointd& p, double h = 1e-6) {
  Mat2d j;
  const auto xp = apply(spec, TorusPointd::wrapped(p.x + h, p.y));
  const auto xm = apply(spec, TorusPointd::wrapped(p.x - h, p.y));
  const auto yp = apply(spec, TorusPointd::wrapped(p.x, p.y + h));
  const auto ym = apply(spec, TorusPointd::wrapped(p.x, p.y - h));
  const Vec2d dx = torus_delta(xm, xp) / (2 * h);
  const Vec2d dy = torus_delta(ym, yp) / (2 * h);
  j.col(0) = dx;
  j.col(1) = dy;
  return j;
}

/// Brute-force minimum of ||Df(p) v|| over unit vectors v in the closed cone
/// of the given half-angle around dir.
inline double cone_min(const SystemSpecd& spec, const TorusPointd& p, const Vec2d& dir,
                       double half_angle, int samples) {
  const Mat2d j = jacobian(spec, p);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= samples; ++i) {
    const double t = -half_angle + 2 * half_angle * i / samples;
    const Vec2d v(std::cos(t) * dir(0) - std::sin(t) * dir(1),
                  std::sin(t) * dir(0) + std::cos(t) * dir(1));
    best = std::min(best, (j * v).norm());
  }
  return best;
}

/// Orbit periods of every rational point with denominator q under the map,
/// by direct iteration. Keyed by (i, j) with the point (i/q, j/q).
inline std::map<std::pair<int, int>, int> lattice_periods(const SystemSpecd& spec, int q,
                                                          int max_period = 64) {
  std::map<std::pair<int, int>, int> out;
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      const TorusPointd p0{static_cast<double>(i) / q, static_cast<double>(j) / q};
      TorusPointd z = p0;
      int period = -1;
      for (int n = 1; n <= max_period; ++n) {
        z = apply(spec, z);
        if (torus_distance(z, p0) < 1e-9) {
          period = n;
          break;
        }
      }
      out[{i, j}] = period;
    }
  }
  return out;
}

/// Independent re-implementation of the radius recursion loop: recomputes the
/// ball extremum from scratch at every step through the public psi_ball.
inline std::vector<double> radii_recursion_reference(const SystemSpecd& spec, const TorusPointd& x,
                                                     double r0, long n_steps) {
  std::vector<double> r{r0};
  TorusPointd z = x;
  double cur = r0;
  for (long k = 0; k < n_steps; ++k) {
    const double ball = std::min(cur, 0.25);
    cur = psi_ball(spec, z, Sign::Plus, 1, ball).value * cur;
    r.push_back(cur);
    z = apply(spec, z);
  }
  return r;
}

inline SystemSpecd cat_map() {
  IntMat2 m;
  m << 2, 1, 1, 1;
  return SystemSpecd::linear(m);
}

inline SystemSpecd shear(double eps) {
  IntMat2 m;
  m << 2, 1, 1, 1;
  return SystemSpecd::shear_perturbed(m, eps);
}

inline SystemSpecd da_example() {
  IntMat2 m;
  m << 2, 1, 1, 1;
  return SystemSpecd::derived_from_anosov(m, 0.65, TorusPointd{0, 0}, 0.2);
}

inline constexpr double kCatLambda = 2.6180339887498949;      // (3+sqrt5)/2
inline constexpr double kCatLogLambda = 0.96242365011920687;  // log lambda

}  // namespace oracles
