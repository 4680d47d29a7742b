#pragma once

#include "radlab/errors.hpp"
#include "radlab/parallel.hpp"
#include "radlab/systems.hpp"
#include "radlab/types.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace radlab {

enum class Sign { Plus, Minus };

inline const char* to_string(Sign s) { return s == Sign::Plus ? "plus" : "minus"; }

inline Sign flip(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }

constexpr int kDefaultPowerIterations = 60;
constexpr double kSplittingAngleTol = 1e-10;

/// Chart bound: balls wider than a quarter of the torus leave the injectivity
/// scale, so ball extremization is never evaluated beyond this radius.
constexpr double kChartRadius = 0.25;

/// Largest singular value, from the closed-form 2x2 singular values.
template <typename Scalar>
inline Scalar operator_norm(const Mat2<Scalar>& m) {
  const Scalar t = m.squaredNorm();  // sigma1^2 + sigma2^2
  const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Scalar disc = std::sqrt(std::max(Scalar(0), t * t - Scalar(4) * det * det));
  return std::sqrt((t + disc) / Scalar(2));
}

/// Conorm m(A) = ||A^-1||^-1 = smallest singular value. Computed through the
/// cancellation-free branch sigma_min = |det| sqrt(2 / (t + sqrt(t^2-4 det^2))).
template <typename Scalar>
inline Scalar conorm(const Mat2<Scalar>& m) {
  const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (det == Scalar(0) || !std::isfinite(det)) throw numerical_error("conorm of singular matrix");
  const Scalar t = m.squaredNorm();
  const Scalar disc = std::sqrt(std::max(Scalar(0), t * t - Scalar(4) * det * det));
  return std::abs(det) * std::sqrt(Scalar(2) / (t + disc));
}

/// The invariant splitting at a point: unit directions spanning E^- and E^+,
/// the angle between them, and the state of the power iteration that produced
/// them. `converged` must be checked by callers.
template <typename Scalar>
struct SplittingAt {
  Vec2<Scalar> e_minus{Vec2<Scalar>(1, 0)};
  Vec2<Scalar> e_plus{Vec2<Scalar>(0, 1)};
  Scalar angle{0};
  bool converged{false};
  int iterations_used{0};
};

template <typename Scalar>
struct DirectionResult {
  Vec2<Scalar> dir{Vec2<Scalar>(1, 0)};
  bool converged{false};
  int iterations{0};
};

namespace detail {

// Keeps the accumulated cocycle product in range without touching the
// direction it encodes: rescaling by a power of two is exact.
template <typename Scalar>
inline void rescale_pow2(Mat2<Scalar>& p) {
  const Scalar a = p.cwiseAbs().maxCoeff();
  if (a > Scalar(1e100) || (a > Scalar(0) && a < Scalar(1e-100))) {
    int ex = 0;
    std::frexp(static_cast<double>(a), &ex);
    p *= Scalar(std::ldexp(1.0, -ex));
  }
}

// Incremental power iteration on a right-multiplied matrix product.
// mat_at(m) must return the m-th factor (m = 1, 2, ...). The direction at
// depth m is P_m v0; convergence is declared when the directions from depths
// m-1 and m differ by less than tol in angle.
template <typename Scalar, class MatProvider>
DirectionResult<Scalar> dominant_direction(MatProvider&& mat_at, int n_iter, Scalar tol) {
  Mat2<Scalar> p = Mat2<Scalar>::Identity();
  const Vec2<Scalar> v0(Scalar(0.6), Scalar(0.8));
  Vec2<Scalar> prev = v0;
  const Scalar tan_tol = std::tan(tol);
  for (int m = 1; m <= n_iter; ++m) {
    p = p * mat_at(m);
    rescale_pow2(p);
    const Vec2<Scalar> d = p * v0;
    const Scalar cross = std::abs(prev(0) * d(1) - prev(1) * d(0));
    const Scalar dot = std::abs(prev.dot(d));
    if (m >= 2 && cross < tan_tol * dot)
      return {canonical_direction<Scalar>(d.normalized()), true, m};
    prev = d;
  }
  return {canonical_direction<Scalar>(prev.normalized()), false, n_iter};
}

}  // namespace detail

/// Direction of E^+ (sign Plus) or E^- (sign Minus) at p, by power iteration
/// on the derivative cocycle along the backward (resp. forward) orbit.
template <typename Scalar>
DirectionResult<Scalar> bundle_direction(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p,
                                         Sign sign, int n_iter = kDefaultPowerIterations,
                                         Scalar tol = Scalar(kSplittingAngleTol)) {
  if (sign == Sign::Plus) {
    // E^+(p) attracts the pushforward of any generic direction carried from
    // f^{-m}(p) up to p: P_m = Df(z_1) ... Df(z_m), z_j = f^{-j}(p).
    std::vector<std::pair<TorusPoint<Scalar>, Mat2<Scalar>>> chain;  // {z_m, Df(z_m)}
    chain.reserve(16);
    auto mat_at = [&](int m) {
      while (static_cast<int>(chain.size()) < m) {
        const TorusPoint<Scalar>& prev = chain.empty() ? p : chain.back().first;
        chain.push_back(apply_inverse_with_jacobian(spec, prev));
      }
      return chain[static_cast<std::size_t>(m - 1)].second;
    };
    return detail::dominant_direction<Scalar>(mat_at, n_iter, tol);
  }
  // E^-(p) attracts the inverse cocycle pulled back along the forward orbit:
  // Q_m = Df(w_0)^-1 ... Df(w_{m-1})^-1, w_j = f^j(p).
  std::vector<std::pair<TorusPoint<Scalar>, Mat2<Scalar>>> chain;  // {w_m, Df(w_{m-1})}
  chain.reserve(16);
  auto mat_at = [&](int m) {
    while (static_cast<int>(chain.size()) < m) {
      const TorusPoint<Scalar>& cur = chain.empty() ? p : chain.back().first;
      chain.push_back(apply_with_jacobian(spec, cur));
    }
    return jacobian_inverse(chain[static_cast<std::size_t>(m - 1)].second);
  };
  return detail::dominant_direction<Scalar>(mat_at, n_iter, tol);
}

/// Both bundle directions at p. converged is true only if the last two power
/// iterates of each bundle agree to within 1e-10 in angle.
template <typename Scalar>
SplittingAt<Scalar> splitting_at(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p,
                                 int n_iter = kDefaultPowerIterations) {
  const auto plus = bundle_direction(spec, p, Sign::Plus, n_iter);
  const auto minus = bundle_direction(spec, p, Sign::Minus, n_iter);
  SplittingAt<Scalar> s;
  s.e_plus = plus.dir;
  s.e_minus = minus.dir;
  s.angle = line_angle(s.e_minus, s.e_plus);
  s.converged = plus.converged && minus.converged;
  s.iterations_used = std::max(plus.iterations, minus.iterations);
  return s;
}

/// Angle between Df(x) e_+(x) and the independently computed e_+(f(x)).
template <typename Scalar>
Scalar equivariance_residual(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p, Sign sign,
                             int n_iter = kDefaultPowerIterations) {
  const auto here = bundle_direction(spec, p, sign, n_iter);
  const auto there = bundle_direction(spec, apply(spec, p), sign, n_iter);
  if (!here.converged || !there.converged)
    throw numerical_error("splitting did not converge while checking equivariance");
  const Vec2<Scalar> pushed = jacobian(spec, p) * here.dir;
  return line_angle(pushed, there.dir);
}

/// Value of one of the psi functions. ball_radius = 0 denotes a pointwise
/// evaluation; order is the number of derivative steps N.
template <typename Scalar>
struct PsiValue {
  Scalar value{0};
  Sign sign{Sign::Plus};
  int order{1};
  Scalar ball_radius{0};
};

/// log psi^N_sign(x): log-domain norm of Df^N(x) restricted to the
/// one-dimensional bundle E^sign, i.e. log ||Df^N(x) e_sign(x)||.
template <typename Scalar>
Scalar log_psi(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p, Sign sign,
               int order = 1, int n_iter = kDefaultPowerIterations) {
  if (order < 1) throw config_error("psi order must be >= 1");
  const auto dir = bundle_direction(spec, p, sign, n_iter);
  if (!dir.converged)
    throw numerical_error(std::string("splitting did not converge at (") + std::to_string(p.x) +
                          ", " + std::to_string(p.y) + ")");
  Vec2<Scalar> v = dir.dir;
  TorusPoint<Scalar> z = p;
  Scalar log_accum = 0;
  for (int k = 0; k < order; ++k) {
    const auto [next, jac] = apply_with_jacobian(spec, z);
    v = jac * v;
    const Scalar n = v.norm();
    log_accum += std::log(n);
    v /= n;
    z = next;
  }
  return log_accum;
}

/// psi^N_sign(x) itself. For N = 1 and sign Plus this is the conorm of Df
/// restricted to E^+, since the bundle is a line.
template <typename Scalar>
PsiValue<Scalar> psi(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p, Sign sign,
                     int order = 1, int n_iter = kDefaultPowerIterations) {
  return PsiValue<Scalar>{std::exp(log_psi(spec, p, sign, order, n_iter)), sign, order, Scalar(0)};
}

/// psi^N_+(x, eps) = min over the closed ball B_eps(x) of psi^N_+ (max for
/// the minus sign). The extremum is taken over a deterministic square lattice
/// of spacing eps/16 intersected with the ball; the lattice contains the
/// center and the four cardinal boundary points exactly.
template <typename Scalar>
PsiValue<Scalar> psi_ball(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& p, Sign sign,
                          int order, Scalar eps_ball, int n_iter = kDefaultPowerIterations) {
  if (!(eps_ball > Scalar(0))) throw config_error("psi_ball radius must be positive");
  if (eps_ball > Scalar(kChartRadius) * (Scalar(1) + Scalar(1e-12)))
    throw config_error("psi_ball radius exceeds the chart bound 0.25");
  const Scalar h = eps_ball / Scalar(16);
  const Scalar r2 = eps_ball * eps_ball * (Scalar(1) + Scalar(4) * std::numeric_limits<Scalar>::epsilon());
  bool extremize_min = (sign == Sign::Plus);
  Scalar best = extremize_min ? std::numeric_limits<Scalar>::infinity()
                              : -std::numeric_limits<Scalar>::infinity();
  for (int i = -16; i <= 16; ++i) {
    for (int j = -16; j <= 16; ++j) {
      const Scalar ox = Scalar(i) * h;
      const Scalar oy = Scalar(j) * h;
      if (ox * ox + oy * oy > r2) continue;
      const auto y = TorusPoint<Scalar>::wrapped(p.x + ox, p.y + oy);
      const Scalar v = psi(spec, y, sign, order, n_iter).value;
      if (extremize_min ? (v < best) : (v > best)) best = v;
    }
  }
  return PsiValue<Scalar>{best, sign, order, eps_ball};
}

/// Result of a domination scan over a uniform grid.
template <typename Scalar>
struct DominationReport {
  bool holds{false};
  Scalar margin{0};     // min over grid of log psi+ - log psi- - 2 gamma
  Scalar gamma_max{0};  // min over grid of (log psi+ - log psi-) / 2
};

/// Checks ||Df_-|| < e^{-2 gamma} m(Df_+) pointwise on a grid_n x grid_n grid.
template <typename Scalar>
DominationReport<Scalar> check_domination(const SystemSpec<Scalar>& spec, Scalar gamma, int grid_n,
                                          int n_iter = kDefaultPowerIterations) {
  if (grid_n < 16) throw config_error("domination grid must be at least 16x16");
  const long n = static_cast<long>(grid_n) * grid_n;
  std::vector<Scalar> gap(static_cast<std::size_t>(n));
  std::vector<char> failed(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](long idx) {
    const int i = static_cast<int>(idx / grid_n);
    const int j = static_cast<int>(idx % grid_n);
    const auto p = TorusPoint<Scalar>{Scalar(i) / grid_n, Scalar(j) / grid_n};
    try {
      const Scalar lp = log_psi(spec, p, Sign::Plus, 1, n_iter);
      const Scalar lm = log_psi(spec, p, Sign::Minus, 1, n_iter);
      gap[static_cast<std::size_t>(idx)] = lp - lm;
    } catch (const numerical_error&) {
      failed[static_cast<std::size_t>(idx)] = 1;
    }
  });
  for (long i = 0; i < n; ++i)
    if (failed[static_cast<std::size_t>(i)])
      throw numerical_error("splitting did not converge at a domination grid node");
  Scalar min_gap = gap[0];
  for (long i = 1; i < n; ++i) min_gap = std::min(min_gap, gap[static_cast<std::size_t>(i)]);
  DominationReport<Scalar> rep;
  rep.gamma_max = min_gap / Scalar(2);
  rep.margin = min_gap - Scalar(2) * gamma;
  rep.holds = rep.margin > Scalar(0);
  return rep;
}

/// Max of log psi_sign over a uniform grid; the constant L used by the
/// horizon bound and the Birkhoff upper-bound property.
template <typename Scalar>
Scalar max_log_psi(const SystemSpec<Scalar>& spec, Sign sign, int grid_n = 256,
                   int n_iter = kDefaultPowerIterations) {
  const long n = static_cast<long>(grid_n) * grid_n;
  std::vector<Scalar> vals(static_cast<std::size_t>(n), -std::numeric_limits<Scalar>::infinity());
  parallel_for(n, [&](long idx) {
    const int i = static_cast<int>(idx / grid_n);
    const int j = static_cast<int>(idx % grid_n);
    const auto p = TorusPoint<Scalar>{Scalar(i) / grid_n, Scalar(j) / grid_n};
    vals[static_cast<std::size_t>(idx)] = log_psi(spec, p, sign, 1, n_iter);
  });
  Scalar best = vals[0];
  for (long i = 1; i < n; ++i) best = std::max(best, vals[static_cast<std::size_t>(i)]);
  return best;
}

}  // namespace radlab
