#pragma once

#include "radlab/errors.hpp"
#include "radlab/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace radlab {

enum class SystemKind { Linear, ShearPerturbed, DerivedFromAnosov };

inline const char* to_string(SystemKind k) {
  switch (k) {
    case SystemKind::Linear: return "linear";
    case SystemKind::ShearPerturbed: return "shear";
    case SystemKind::DerivedFromAnosov: return "da";
  }
  return "?";
}

using IntMat2 = Eigen::Matrix<std::int64_t, 2, 2>;

namespace detail {

// Radial C^2 profile of the DA bump: g(s^2) = (1 - s^2)^3 on s <= 1, zero
// outside. g and its first two derivatives vanish at the support boundary.
template <typename Scalar>
inline Scalar bump_g(Scalar s2) {
  const Scalar t = Scalar(1) - s2;
  return t * t * t;
}

// g'(r)/r with r = s*R; smooth through r = 0.
template <typename Scalar>
inline Scalar bump_gprime_over_r(Scalar s2, Scalar radius) {
  const Scalar t = Scalar(1) - s2;
  return Scalar(-6) / (radius * radius) * t * t;
}

}  // namespace detail

/// Parameterized torus diffeomorphism. All three kinds share a hyperbolic
/// integer matrix A (|det| = 1, |trace| > 2):
///   Linear             p -> A p  (mod 1)
///   ShearPerturbed     p -> A S(p),  S(x,y) = (x, y + eps sin(2 pi x))
///   DerivedFromAnosov  p -> A B(p), where B weakens the coordinate along the
///                      unstable eigendirection inside the da_radius-ball:
///                      with q = p - c and xi = q . u,
///                      B(p) = p - eps g(|q|/R) xi u.
/// Use the factory functions; they validate and precompute derived data.
template <typename Scalar>
struct SystemSpec {
  SystemKind kind{SystemKind::Linear};
  IntMat2 matrix{IntMat2::Identity()};
  Scalar eps{0};
  TorusPoint<Scalar> da_center{};
  Scalar da_radius{0};

  // Derived at construction.
  Mat2<Scalar> mat{Mat2<Scalar>::Identity()};
  Mat2<Scalar> mat_inv{Mat2<Scalar>::Identity()};  // exact: |det| = 1
  Vec2<Scalar> unstable_dir{Vec2<Scalar>(1, 0)};
  Scalar lambda_unstable{1};

  static SystemSpec linear(const IntMat2& m) {
    SystemSpec s;
    s.kind = SystemKind::Linear;
    s.matrix = m;
    s.finish_validation();
    return s;
  }

  static SystemSpec shear_perturbed(const IntMat2& m, Scalar eps) {
    if (eps < Scalar(0)) throw config_error("shear eps must be >= 0");
    SystemSpec s;
    s.kind = SystemKind::ShearPerturbed;
    s.matrix = m;
    s.eps = eps;
    s.finish_validation();
    return s;
  }

  static SystemSpec derived_from_anosov(const IntMat2& m, Scalar eps,
                                        TorusPoint<Scalar> center, Scalar radius) {
    if (eps < Scalar(0)) throw config_error("da eps must be >= 0");
    if (!(radius > Scalar(0) && radius <= Scalar(0.25)))
      throw config_error("da_radius must lie in (0, 0.25]");
    SystemSpec s;
    s.kind = SystemKind::DerivedFromAnosov;
    s.matrix = m;
    s.eps = eps;
    s.da_center = TorusPoint<Scalar>::wrapped(center.x, center.y);
    s.da_radius = radius;
    s.finish_validation();
    s.check_da_diffeomorphism();
    return s;
  }

 private:
  void finish_validation() {
    const std::int64_t det = matrix(0, 0) * matrix(1, 1) - matrix(0, 1) * matrix(1, 0);
    const std::int64_t tr = matrix(0, 0) + matrix(1, 1);
    if (det != 1 && det != -1) throw config_error("matrix must have |det| = 1");
    if (tr <= 2 && tr >= -2) throw config_error("matrix must have |trace| > 2");
    mat = matrix.template cast<Scalar>();
    // Adjugate divided by det; integer because |det| = 1.
    IntMat2 inv;
    inv << matrix(1, 1) * det, -matrix(0, 1) * det, -matrix(1, 0) * det, matrix(0, 0) * det;
    mat_inv = inv.template cast<Scalar>();

    const Scalar trs = static_cast<Scalar>(tr);
    const Scalar disc = std::sqrt(trs * trs - Scalar(4) * static_cast<Scalar>(det));
    const Scalar lam_a = (trs + disc) / Scalar(2);
    const Scalar lam_b = (trs - disc) / Scalar(2);
    lambda_unstable = std::abs(lam_a) >= std::abs(lam_b) ? lam_a : lam_b;
    Vec2<Scalar> v;
    if (matrix(0, 1) != 0)
      v = Vec2<Scalar>(static_cast<Scalar>(matrix(0, 1)), lambda_unstable - mat(0, 0));
    else if (matrix(1, 0) != 0)
      v = Vec2<Scalar>(lambda_unstable - mat(1, 1), static_cast<Scalar>(matrix(1, 0)));
    else
      v = Vec2<Scalar>(1, 0);
    unstable_dir = canonical_direction<Scalar>(v.normalized());
  }

  void check_da_diffeomorphism() const {
    // det DB = 1 - eps (g'(r)/r xi^2 + g); require it positive on a 512x512
    // verification grid so the bump keeps the map a diffeomorphism.
    constexpr int n = 512;
    const Scalar r2max = da_radius * da_radius;
    Scalar min_det = Scalar(1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto p = TorusPoint<Scalar>{Scalar(i) / n, Scalar(j) / n};
        const Vec2<Scalar> q = torus_delta(da_center, p);
        const Scalar r2 = q.squaredNorm();
        if (r2 >= r2max) continue;
        const Scalar s2 = r2 / r2max;
        const Scalar xi = q.dot(unstable_dir);
        const Scalar d = Scalar(1) -
                         eps * (detail::bump_gprime_over_r(s2, da_radius) * xi * xi +
                                detail::bump_g(s2));
        if (d < min_det) min_det = d;
      }
    }
    if (!(min_det > Scalar(1e-6)))
      throw config_error("da bump is not a diffeomorphism: grid min det DJ = " +
                         std::to_string(static_cast<double>(min_det)));
  }
};

using SystemSpecd = SystemSpec<double>;

namespace detail {

template <typename Scalar>
inline TorusPoint<Scalar> apply_matrix(const Mat2<Scalar>& m, const TorusPoint<Scalar>& p) {
  return TorusPoint<Scalar>::wrapped(m(0, 0) * p.x + m(0, 1) * p.y,
                                     m(1, 0) * p.x + m(1, 1) * p.y);
}

template <typename Scalar>
inline TorusPoint<Scalar> bump_forward(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  const Vec2<Scalar> q = torus_delta(spec.da_center, p);
  const Scalar r2 = q.squaredNorm();
  const Scalar r2max = spec.da_radius * spec.da_radius;
  if (r2 >= r2max) return p;
  const Scalar xi = q.dot(spec.unstable_dir);
  const Scalar d = spec.eps * bump_g(r2 / r2max) * xi;
  return translate(p, Vec2<Scalar>(-d * spec.unstable_dir));
}

// Inverse of the bump by damped fixed-point iteration on q = w + eps g xi u.
// The iteration matrix is rank one with spectral radius |1 - det DB| < 1, so
// the undamped step already contracts; damping halves on residual growth.
template <typename Scalar>
inline TorusPoint<Scalar> bump_inverse(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& w) {
  const Vec2<Scalar> wq = torus_delta(spec.da_center, w);
  const Scalar r2max = spec.da_radius * spec.da_radius;
  if (wq.squaredNorm() >= r2max) return w;

  const auto displaced = [&](const Vec2<Scalar>& q) -> Vec2<Scalar> {
    const Scalar r2 = q.squaredNorm();
    if (r2 >= r2max) return q;
    const Scalar xi = q.dot(spec.unstable_dir);
    return q - spec.eps * bump_g(r2 / r2max) * xi * spec.unstable_dir;
  };

  Vec2<Scalar> q = wq;
  Scalar beta = Scalar(1);
  Scalar prev_res = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < 100; ++it) {
    const Vec2<Scalar> res = displaced(q) - wq;
    const Scalar rn = res.norm();
    if (rn < Scalar(5e-14))
      return TorusPoint<Scalar>::wrapped(spec.da_center.x + q(0), spec.da_center.y + q(1));
    if (rn > prev_res) beta *= Scalar(0.5);
    prev_res = rn;
    q -= beta * res;
  }
  throw numerical_error("bump inversion did not converge within 100 iterations");
}

}  // namespace detail

/// One application of the diffeomorphism; coordinates reduced mod 1.
template <typename Scalar>
inline TorusPoint<Scalar> apply(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  switch (spec.kind) {
    case SystemKind::Linear:
      return detail::apply_matrix(spec.mat, p);
    case SystemKind::ShearPerturbed: {
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
      const auto sheared =
          TorusPoint<Scalar>::wrapped(p.x, p.y + spec.eps * std::sin(two_pi * p.x));
      return detail::apply_matrix(spec.mat, sheared);
    }
    case SystemKind::DerivedFromAnosov:
      return detail::apply_matrix(spec.mat, detail::bump_forward(spec, p));
  }
  return p;
}

/// Inverse map. Exact closed form except the DA bump, which is inverted
/// numerically (tolerance 5e-14 in the displacement, at most 100 iterations).
template <typename Scalar>
inline TorusPoint<Scalar> apply_inverse(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  const TorusPoint<Scalar> w = detail::apply_matrix(spec.mat_inv, p);
  switch (spec.kind) {
    case SystemKind::Linear:
      return w;
    case SystemKind::ShearPerturbed: {
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
      return TorusPoint<Scalar>::wrapped(w.x, w.y - spec.eps * std::sin(two_pi * w.x));
    }
    case SystemKind::DerivedFromAnosov:
      return detail::bump_inverse(spec, w);
  }
  return w;
}

/// Exact analytic Jacobian at p (no finite differences anywhere in the core).
template <typename Scalar>
inline Mat2<Scalar> jacobian(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  switch (spec.kind) {
    case SystemKind::Linear:
      return spec.mat;
    case SystemKind::ShearPerturbed: {
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
      const Scalar c = two_pi * spec.eps * std::cos(two_pi * p.x);
      Mat2<Scalar> j;
      j << spec.mat(0, 0) + spec.mat(0, 1) * c, spec.mat(0, 1),
           spec.mat(1, 0) + spec.mat(1, 1) * c, spec.mat(1, 1);
      return j;
    }
    case SystemKind::DerivedFromAnosov: {
      const Vec2<Scalar> q = torus_delta(spec.da_center, p);
      const Scalar r2 = q.squaredNorm();
      const Scalar r2max = spec.da_radius * spec.da_radius;
      if (r2 >= r2max) return spec.mat;
      const Scalar s2 = r2 / r2max;
      const Scalar xi = q.dot(spec.unstable_dir);
      const Vec2<Scalar> grad_h =
          detail::bump_gprime_over_r(s2, spec.da_radius) * xi * q +
          detail::bump_g(s2) * spec.unstable_dir;
      const Mat2<Scalar> db =
          Mat2<Scalar>::Identity() - spec.eps * (spec.unstable_dir * grad_h.transpose());
      return spec.mat * db;
    }
  }
  return spec.mat;
}

/// f(p) together with Df(p). Same values as the separate calls, with the
/// shared trigonometry and bump geometry evaluated once.
template <typename Scalar>
inline std::pair<TorusPoint<Scalar>, Mat2<Scalar>> apply_with_jacobian(
    const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  switch (spec.kind) {
    case SystemKind::Linear:
      return {detail::apply_matrix(spec.mat, p), spec.mat};
    case SystemKind::ShearPerturbed: {
      const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
      const Scalar a = two_pi * p.x;
      const Scalar s = std::sin(a);
      const Scalar c = two_pi * spec.eps * std::cos(a);
      const auto sheared = TorusPoint<Scalar>::wrapped(p.x, p.y + spec.eps * s);
      Mat2<Scalar> j;
      j << spec.mat(0, 0) + spec.mat(0, 1) * c, spec.mat(0, 1),
           spec.mat(1, 0) + spec.mat(1, 1) * c, spec.mat(1, 1);
      return {detail::apply_matrix(spec.mat, sheared), j};
    }
    case SystemKind::DerivedFromAnosov: {
      const Vec2<Scalar> q = torus_delta(spec.da_center, p);
      const Scalar r2 = q.squaredNorm();
      const Scalar r2max = spec.da_radius * spec.da_radius;
      if (r2 >= r2max) return {detail::apply_matrix(spec.mat, p), spec.mat};
      const Scalar s2 = r2 / r2max;
      const Scalar g = detail::bump_g(s2);
      const Scalar xi = q.dot(spec.unstable_dir);
      const auto bumped = translate(p, Vec2<Scalar>(-spec.eps * g * xi * spec.unstable_dir));
      const Vec2<Scalar> grad_h =
          detail::bump_gprime_over_r(s2, spec.da_radius) * xi * q + g * spec.unstable_dir;
      const Mat2<Scalar> db =
          Mat2<Scalar>::Identity() - spec.eps * (spec.unstable_dir * grad_h.transpose());
      return {detail::apply_matrix(spec.mat, bumped), spec.mat * db};
    }
  }
  return {p, spec.mat};
}

/// f^{-1}(p) together with Df(f^{-1}(p)), sharing intermediate work. The
/// backward-orbit cocycle walk needs exactly this pair at every step.
template <typename Scalar>
inline std::pair<TorusPoint<Scalar>, Mat2<Scalar>> apply_inverse_with_jacobian(
    const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p) {
  if (spec.kind == SystemKind::ShearPerturbed) {
    const TorusPoint<Scalar> w = detail::apply_matrix(spec.mat_inv, p);
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    const Scalar a = two_pi * w.x;  // preimage keeps the x coordinate: same angle
    const Scalar s = std::sin(a);
    const Scalar c = two_pi * spec.eps * std::cos(a);
    const auto z = TorusPoint<Scalar>::wrapped(w.x, w.y - spec.eps * s);
    Mat2<Scalar> j;
    j << spec.mat(0, 0) + spec.mat(0, 1) * c, spec.mat(0, 1),
         spec.mat(1, 0) + spec.mat(1, 1) * c, spec.mat(1, 1);
    return {z, j};
  }
  const TorusPoint<Scalar> z = apply_inverse(spec, p);
  return {z, jacobian(spec, z)};
}

/// Inverse Jacobian, closed form.
template <typename Scalar>
inline Mat2<Scalar> jacobian_inverse(const Mat2<Scalar>& j) {
  const Scalar det = j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0);
  if (det == Scalar(0)) throw numerical_error("singular Jacobian");
  Mat2<Scalar> inv;
  inv << j(1, 1) / det, -j(0, 1) / det, -j(1, 0) / det, j(0, 0) / det;
  return inv;
}

}  // namespace radlab
