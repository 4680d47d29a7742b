#pragma once

#include "radlab/cocycle.hpp"
#include "radlab/lyapunov.hpp"
#include "radlab/parallel.hpp"
#include "radlab/rng.hpp"
#include "radlab/systems.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace radlab {

/// Empirical Hoelder certificate for log psi_sign: C is the maximal sampled
/// ratio |d log psi| / d^alpha times a safety factor, so every sampled pair
/// satisfies |log psi(x) - log psi(y)| <= C d(x,y)^alpha by construction.
/// C = 0 happens exactly when psi is constant (linear systems); downstream
/// bounds then degenerate to the infinite-radius regime and carry a vacuous
/// flag instead of a number.
template <typename Scalar>
struct HoelderEstimate {
  Scalar C{0};
  Scalar alpha{1};
  long n_pairs{0};
  Scalar d_max{0};
  Scalar max_ratio{0};  // before the safety factor
  Scalar safety{1};
  std::pair<TorusPoint<Scalar>, TorusPoint<Scalar>> worst_pair{};
  Sign sign{Sign::Plus};
};

template <typename Scalar>
HoelderEstimate<Scalar> estimate_hoelder(const SystemSpec<Scalar>& spec, Sign sign, Scalar alpha,
                                         long n_pairs, Scalar d_max, std::uint64_t seed,
                                         Scalar safety = Scalar(1.25),
                                         int n_iter = kDefaultPowerIterations) {
  if (!(alpha > Scalar(0) && alpha <= Scalar(1))) throw config_error("alpha must lie in (0, 1]");
  if (!(d_max > Scalar(0) && d_max <= Scalar(0.25))) throw config_error("d_max must lie in (0, 0.25]");
  if (!(safety >= Scalar(1))) throw config_error("safety factor must be >= 1");
  if (n_pairs < 1) throw config_error("need at least one pair");

  // Pair coordinates are drawn serially from one stream; psi evaluations are
  // indexed and parallel, so the estimate does not depend on worker count.
  std::vector<TorusPoint<Scalar>> xs(static_cast<std::size_t>(n_pairs));
  std::vector<TorusPoint<Scalar>> ys(static_cast<std::size_t>(n_pairs));
  RngStream rng(seed);
  for (long i = 0; i < n_pairs; ++i) {
    const auto p = rng.point();
    const auto off = rng.disk(static_cast<double>(d_max));
    xs[static_cast<std::size_t>(i)] = TorusPoint<Scalar>{Scalar(p.x), Scalar(p.y)};
    ys[static_cast<std::size_t>(i)] =
        TorusPoint<Scalar>::wrapped(Scalar(p.x) + Scalar(off(0)), Scalar(p.y) + Scalar(off(1)));
  }
  std::vector<Scalar> ratio(static_cast<std::size_t>(n_pairs), Scalar(0));
  parallel_for(n_pairs, [&](long i) {
    const auto& a = xs[static_cast<std::size_t>(i)];
    const auto& b = ys[static_cast<std::size_t>(i)];
    const Scalar d = torus_distance(a, b);
    if (d < Scalar(1e-12)) return;
    const Scalar diff = std::abs(log_psi(spec, a, sign, 1, n_iter) - log_psi(spec, b, sign, 1, n_iter));
    ratio[static_cast<std::size_t>(i)] = diff / std::pow(d, alpha);
  });
  HoelderEstimate<Scalar> est;
  est.alpha = alpha;
  est.n_pairs = n_pairs;
  est.d_max = d_max;
  est.safety = safety;
  est.sign = sign;
  long worst = 0;
  for (long i = 0; i < n_pairs; ++i) {
    if (ratio[static_cast<std::size_t>(i)] > est.max_ratio) {
      est.max_ratio = ratio[static_cast<std::size_t>(i)];
      worst = i;
    }
  }
  est.C = safety * est.max_ratio;
  est.worst_pair = {xs[static_cast<std::size_t>(worst)], ys[static_cast<std::size_t>(worst)]};
  return est;
}

enum class RadiusMode { BallExact, PointwiseProxy };

/// Constructive membership certificate for G^+(r): walk `steps` into the past,
/// seed the BallExact recursion with seed_radius there, and return the radius
/// it arrives with at x. The recursion reuses the stored backward orbit (the
/// forward path is not recomputed, which would diverge from x exponentially),
/// so the arrival radius belongs to x itself.
template <typename Scalar>
Scalar certify_arrival_radius(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                              long steps = 200, Scalar seed_radius = Scalar(1e-6),
                              int n_iter = kDefaultPowerIterations) {
  if (steps < 1) throw config_error("certification needs at least one step");
  if (!(seed_radius > Scalar(0))) throw config_error("seed radius must be positive");
  std::vector<TorusPoint<Scalar>> past(static_cast<std::size_t>(steps) + 1);
  past[0] = x;
  for (long j = 1; j <= steps; ++j)
    past[static_cast<std::size_t>(j)] = apply_inverse(spec, past[static_cast<std::size_t>(j - 1)]);
  Scalar r = seed_radius;
  for (long j = steps; j >= 1; --j) {
    const Scalar ball = std::min(r, Scalar(kChartRadius));
    r *= psi_ball(spec, past[static_cast<std::size_t>(j)], Sign::Plus, 1, ball, n_iter).value;
  }
  return r;
}

inline const char* to_string(RadiusMode m) {
  return m == RadiusMode::BallExact ? "ball" : "pointwise";
}

/// The inductive radius sequence r_k = m_{k-1} r_{k-1} along an orbit, with
/// the multipliers m_k that produced it. In BallExact mode the multiplier at
/// step k is the ball minimum psi_+(f^k x, min(r_k, 0.25)): ball extremization
/// is never evaluated beyond the chart radius, and the first step whose r_k
/// exceeded the chart bound is flagged in chart_clamp_from. r_k itself is not
/// capped (for expanding systems it grows without bound, consistent with an
/// infinite internal radius) and may overflow to +inf; log_r stays finite.
template <typename Scalar>
struct RadiusSequence {
  Scalar r0{0};
  std::vector<Scalar> r;      // length N+1
  std::vector<Scalar> m;      // length N
  std::vector<Scalar> log_r;  // length N+1, log-domain accumulation
  TorusPoint<Scalar> start{};
  RadiusMode mode{RadiusMode::BallExact};
  long chart_clamp_from{-1};  // first k with r_k > 0.25; -1 if never
};

/// Generic unfolding of the radius recursion: step advances the orbit point,
/// multiplier(point, r) supplies m_k. Exposed so that constant or synthetic
/// multiplier fields can drive the same recursion the production path uses.
template <typename Scalar, class StepFn, class MultiplierFn>
RadiusSequence<Scalar> unfold_radii(const TorusPoint<Scalar>& start, Scalar r0, long n_steps,
                                    StepFn&& step, MultiplierFn&& multiplier) {
  if (!(r0 > Scalar(0))) throw config_error("r0 must be positive");
  if (n_steps < 0) throw config_error("negative step count");
  RadiusSequence<Scalar> seq;
  seq.r0 = r0;
  seq.start = start;
  seq.r.reserve(static_cast<std::size_t>(n_steps) + 1);
  seq.m.reserve(static_cast<std::size_t>(n_steps));
  seq.log_r.reserve(static_cast<std::size_t>(n_steps) + 1);
  seq.r.push_back(r0);
  seq.log_r.push_back(std::log(r0));
  TorusPoint<Scalar> z = start;
  Scalar r = r0;
  CompensatedSum log_acc;
  log_acc.add(static_cast<double>(std::log(r0)));
  for (long k = 0; k < n_steps; ++k) {
    if (seq.chart_clamp_from < 0 && r > Scalar(kChartRadius)) seq.chart_clamp_from = k;
    const Scalar mk = multiplier(z, r);
    seq.m.push_back(mk);
    r = mk * r;
    log_acc.add(static_cast<double>(std::log(mk)));
    seq.r.push_back(r);
    seq.log_r.push_back(Scalar(log_acc.value()));
    z = step(z);
  }
  if (seq.chart_clamp_from < 0 && r > Scalar(kChartRadius)) seq.chart_clamp_from = n_steps;
  return seq;
}

/// The radius recursion along the forward orbit of x.
template <typename Scalar>
RadiusSequence<Scalar> radii_sequence(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                                      Scalar r0, long n_steps, RadiusMode mode,
                                      int n_iter = kDefaultPowerIterations) {
  auto step = [&](const TorusPoint<Scalar>& p) { return apply(spec, p); };
  RadiusSequence<Scalar> seq;
  if (mode == RadiusMode::BallExact) {
    auto mult = [&](const TorusPoint<Scalar>& p, Scalar r) {
      const Scalar ball = std::min(r, Scalar(kChartRadius));
      return psi_ball(spec, p, Sign::Plus, 1, ball, n_iter).value;
    };
    seq = unfold_radii(x, r0, n_steps, step, mult);
  } else {
    auto mult = [&](const TorusPoint<Scalar>& p, Scalar) {
      return psi(spec, p, Sign::Plus, 1, n_iter).value;
    };
    seq = unfold_radii(x, r0, n_steps, step, mult);
  }
  seq.mode = mode;
  return seq;
}

/// Both sides of the growth inequality
///   (1/N) sum log m_k  >=  (1/N) sum log psi_+(f^k x) - (C/N) sum r_k^alpha
/// for every prefix. For unclamped sequences the left side equals
/// (1/N) log(r_N / r_0).
template <typename Scalar>
struct GrowthCheck {
  std::vector<Scalar> lhs;
  std::vector<Scalar> rhs;
  bool holds{false};
};

template <typename Scalar>
GrowthCheck<Scalar> check_growth_inequality(const SystemSpec<Scalar>& spec,
                                            const RadiusSequence<Scalar>& seq,
                                            const HoelderEstimate<Scalar>& hoelder,
                                            Scalar tolerance = Scalar(1e-9),
                                            int n_iter = kDefaultPowerIterations) {
  if (seq.mode != RadiusMode::BallExact)
    throw config_error("growth inequality requires a BallExact sequence");
  const long n = static_cast<long>(seq.m.size());
  GrowthCheck<Scalar> chk;
  chk.lhs.resize(static_cast<std::size_t>(n));
  chk.rhs.resize(static_cast<std::size_t>(n));
  chk.holds = true;
  CompensatedSum lhs_acc;
  CompensatedSum birk_acc;
  CompensatedSum pow_acc;
  TorusPoint<Scalar> z = seq.start;
  for (long k = 0; k < n; ++k) {
    lhs_acc.add(static_cast<double>(std::log(seq.m[static_cast<std::size_t>(k)])));
    birk_acc.add(static_cast<double>(log_psi(spec, z, Sign::Plus, 1, n_iter)));
    pow_acc.add(static_cast<double>(std::pow(seq.r[static_cast<std::size_t>(k)], hoelder.alpha)));
    const Scalar inv = Scalar(1) / Scalar(k + 1);
    const Scalar lhs = Scalar(lhs_acc.value()) * inv;
    const Scalar rhs = Scalar(birk_acc.value()) * inv - hoelder.C * Scalar(pow_acc.value()) * inv;
    chk.lhs[static_cast<std::size_t>(k)] = lhs;
    chk.rhs[static_cast<std::size_t>(k)] = rhs;
    if (!(lhs >= rhs - tolerance)) chk.holds = false;
    z = apply(spec, z);
  }
  return chk;
}

/// Verdict for the averaged-radius lower bound LE_+ <= C liminf (1/N) sum r_k^alpha,
/// evaluated through the finite-N stand-in min over the last half of the
/// prefix averages. C = 0 reports a vacuous pass (infinite-radius regime).
template <typename Scalar>
struct Theorem3Report {
  bool bound_satisfied{false};
  Scalar tail_min_avg{0};
  bool vacuous{false};
};

template <typename Scalar>
Theorem3Report<Scalar> check_theorem3(const RadiusSequence<Scalar>& seq,
                                      const HoelderEstimate<Scalar>& hoelder, Scalar le_plus,
                                      Scalar slack = Scalar(0)) {
  if (seq.mode != RadiusMode::BallExact)
    throw config_error("theorem-3 check requires a BallExact sequence");
  Theorem3Report<Scalar> rep;
  if (hoelder.C == Scalar(0)) {
    rep.vacuous = true;
    rep.bound_satisfied = true;
    rep.tail_min_avg = std::numeric_limits<Scalar>::infinity();
    return rep;
  }
  const long n = static_cast<long>(seq.m.size());
  if (n < 2) throw config_error("sequence too short");
  CompensatedSum pow_acc;
  Scalar tail_min = std::numeric_limits<Scalar>::infinity();
  for (long k = 0; k < n; ++k) {
    pow_acc.add(static_cast<double>(std::pow(seq.r[static_cast<std::size_t>(k)], hoelder.alpha)));
    const long prefix = k + 1;
    if (prefix >= (n + 1) / 2) {
      const Scalar avg = hoelder.C * Scalar(pow_acc.value()) / Scalar(prefix);
      tail_min = std::min(tail_min, avg);
    }
  }
  rep.tail_min_avg = tail_min;
  rep.bound_satisfied = le_plus <= tail_min + slack;
  return rep;
}

/// First horizon N(x, delta): the smallest n <= n_cap at which both finite-time
/// conditions behind the averaged bound hold, with the Birkhoff condition
/// holding for every later checked n as well. C = 0 returns 1 by convention
/// (the bound is vacuous in the infinite-radius regime).
template <typename Scalar>
struct HorizonResult {
  bool found{false};
  long n{0};
  Scalar L{0};
  bool vacuous{false};
};

template <typename Scalar>
HorizonResult<Scalar> claim_horizon(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                                    Scalar delta, Scalar r0, const HoelderEstimate<Scalar>& hoelder,
                                    Scalar le_plus, long n_cap, int L_grid = 256,
                                    int n_iter = kDefaultPowerIterations) {
  if (!(delta > Scalar(0))) throw config_error("delta must be positive");
  if (!(le_plus > Scalar(0))) throw config_error("claim horizon requires le_plus > 0");
  HorizonResult<Scalar> res;
  if (hoelder.C == Scalar(0)) {
    res.found = true;
    res.n = 1;
    res.vacuous = true;
    return res;
  }
  res.L = max_log_psi(spec, Sign::Plus, L_grid, n_iter);

  const auto series = birkhoff(spec, x, Sign::Plus, n_cap, n_iter);
  // birkhoff_ok[n-1]: condition (a) holds for all n' in [n, n_cap].
  std::vector<char> birkhoff_ok(static_cast<std::size_t>(n_cap), 0);
  bool suffix_ok = true;
  for (long n = n_cap; n >= 1; --n) {
    const bool here = series.values[static_cast<std::size_t>(n - 1)] > le_plus - delta / Scalar(2);
    suffix_ok = suffix_ok && here;
    birkhoff_ok[static_cast<std::size_t>(n - 1)] = suffix_ok ? 1 : 0;
  }
  for (long n = 1; n <= n_cap; ++n) {
    if (!birkhoff_ok[static_cast<std::size_t>(n - 1)]) continue;
    const Scalar bound = hoelder.C / Scalar(n) *
                         std::pow(r0 * std::exp(delta / Scalar(2) * Scalar(n) - res.L), hoelder.alpha);
    if (le_plus <= bound) {
      res.found = true;
      res.n = n;
      return res;
    }
  }
  return res;  // found = false: cap exceeded, reported rather than thrown
}

/// Indicator grid of A^+(N) = { x : log psi^N_+(x) > 0 }. Nodes where the
/// splitting fails to converge are conservatively marked outside, as are nodes
/// with |log psi^N_+| <= 1e-12 (tie-break favouring the distance lower bound).
struct RegionAPlus {
  int N{1};
  int grid_n{0};
  std::vector<std::uint8_t> inside;  // row-major [i * grid_n + j], node (i/g, j/g)
  bool complement_nonempty{false};
  double inside_fraction{0};

  bool at(int i, int j) const { return inside[static_cast<std::size_t>(i) * grid_n + j] != 0; }
};

template <typename Scalar>
RegionAPlus region_a_plus(const SystemSpec<Scalar>& spec, int N, int grid_n,
                          int n_iter = kDefaultPowerIterations) {
  if (N < 1) throw config_error("region order must be >= 1");
  if (grid_n < 2) throw config_error("grid too small");
  RegionAPlus reg;
  reg.N = N;
  reg.grid_n = grid_n;
  const long n = static_cast<long>(grid_n) * grid_n;
  reg.inside.assign(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](long idx) {
    const int i = static_cast<int>(idx / grid_n);
    const int j = static_cast<int>(idx % grid_n);
    const auto p = TorusPoint<Scalar>{Scalar(i) / grid_n, Scalar(j) / grid_n};
    try {
      const Scalar lp = log_psi(spec, p, Sign::Plus, N, n_iter);
      reg.inside[static_cast<std::size_t>(idx)] = lp > Scalar(1e-12) ? 1 : 0;
    } catch (const numerical_error&) {
      reg.inside[static_cast<std::size_t>(idx)] = 0;
    }
  });
  long count = 0;
  for (long i = 0; i < n; ++i) count += reg.inside[static_cast<std::size_t>(i)];
  reg.inside_fraction = static_cast<double>(count) / static_cast<double>(n);
  reg.complement_nonempty = count < n;
  return reg;
}

/// Torus distance from p to the nearest grid node outside A^+(N); +inf when
/// the complement is empty.
template <typename Scalar>
Scalar distance_to_complement(const RegionAPlus& reg, const TorusPoint<Scalar>& p) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (int i = 0; i < reg.grid_n; ++i) {
    for (int j = 0; j < reg.grid_n; ++j) {
      if (reg.at(i, j)) continue;
      const auto node = TorusPoint<Scalar>{Scalar(i) / reg.grid_n, Scalar(j) / reg.grid_n};
      best = std::min(best, torus_distance(p, node));
    }
  }
  return best;
}

/// Newton iteration on f^period - id. The seed must lie near a nondegenerate
/// fixed point of f^period.
template <typename Scalar>
TorusPoint<Scalar> find_periodic(const SystemSpec<Scalar>& spec, int period,
                                 const TorusPoint<Scalar>& seed_point) {
  if (period < 1) throw config_error("period must be >= 1");
  TorusPoint<Scalar> q = seed_point;
  for (int it = 0; it < 50; ++it) {
    TorusPoint<Scalar> z = q;
    Mat2<Scalar> dfp = Mat2<Scalar>::Identity();
    for (int k = 0; k < period; ++k) {
      dfp = jacobian(spec, z) * dfp;
      z = apply(spec, z);
    }
    const Vec2<Scalar> res = torus_delta(q, z);  // f^per(q) - q, nearest translate
    if (res.norm() < Scalar(1e-13)) return q;
    const Mat2<Scalar> df_minus_i = dfp - Mat2<Scalar>::Identity();
    const Scalar det = df_minus_i(0, 0) * df_minus_i(1, 1) - df_minus_i(0, 1) * df_minus_i(1, 0);
    if (std::abs(det) < Scalar(1e-10))
      throw numerical_error("degenerate Jacobian in periodic-point Newton iteration");
    Vec2<Scalar> step;
    step(0) = (df_minus_i(1, 1) * res(0) - df_minus_i(0, 1) * res(1)) / det;
    step(1) = (-df_minus_i(1, 0) * res(0) + df_minus_i(0, 0) * res(1)) / det;
    q = translate(q, Vec2<Scalar>(-step));
  }
  throw numerical_error("periodic-point Newton iteration did not converge in 50 steps");
}

/// Per-orbit data for the periodic-point bounds. le_p is the exponent of the
/// periodic orbit along E^+; proposition_lower is the grid distance from p to
/// the complement of A^+(period) (a certified lower bound for R_+(p), +inf
/// when the complement is empty); corollary_rhs evaluates
/// (C/per) sum proxy_k^alpha with the certified lower proxies substituted for
/// the true radii. Substituting lower bounds does not preserve the corollary's
/// direction, so both sides are reported and nothing is asserted.
template <typename Scalar>
struct PeriodicBounds {
  Scalar le_p{0};
  Scalar corollary_rhs{0};
  Scalar proposition_lower{0};
  bool proposition_infinite{false};
  bool vacuous{false};  // C = 0
  std::vector<Scalar> proxy;
};

template <typename Scalar>
PeriodicBounds<Scalar> periodic_point_bounds(const SystemSpec<Scalar>& spec,
                                             const TorusPoint<Scalar>& p, int period,
                                             const HoelderEstimate<Scalar>& hoelder, int grid_n,
                                             int n_iter = kDefaultPowerIterations) {
  if (period < 1) throw config_error("period must be >= 1");
  // Verify periodicity, and that no proper divisor of the period closes first.
  {
    TorusPoint<Scalar> z = p;
    for (int k = 1; k <= period; ++k) {
      z = apply(spec, z);
      const bool closes = torus_distance(z, p) < Scalar(1e-9);
      if (k == period && !closes) throw config_error("point is not periodic with the given period");
      if (k < period && closes && period % k == 0)
        throw config_error("period mismatch: orbit closes after " + std::to_string(k) + " steps");
    }
  }
  PeriodicBounds<Scalar> out;
  out.vacuous = hoelder.C == Scalar(0);

  // Orbit exponent along E^+.
  CompensatedSum le_acc;
  std::vector<TorusPoint<Scalar>> orbit(static_cast<std::size_t>(period));
  {
    TorusPoint<Scalar> z = p;
    for (int k = 0; k < period; ++k) {
      orbit[static_cast<std::size_t>(k)] = z;
      le_acc.add(static_cast<double>(log_psi(spec, z, Sign::Plus, 1, n_iter)));
      z = apply(spec, z);
    }
  }
  out.le_p = Scalar(le_acc.value()) / Scalar(period);

  const RegionAPlus reg = region_a_plus(spec, period, grid_n, n_iter);
  out.proposition_lower = distance_to_complement(reg, p);
  out.proposition_infinite = std::isinf(static_cast<double>(out.proposition_lower));

  // Certified radius floor: the recursion with the radius capped at the chart
  // bound. Capping keeps every multiplier a genuine full-ball minimum, so the
  // one-step guarantee applies at each step and the floor is a true lower
  // bound for R_+ along the cycle (granted the tiny seed radius).
  const long laps = 50;
  std::vector<Scalar> floor_at(static_cast<std::size_t>(period), Scalar(0));
  {
    Scalar r = Scalar(1e-8);
    for (long lap = 0; lap < laps; ++lap) {
      for (int k = 0; k < period; ++k) {
        floor_at[static_cast<std::size_t>(k)] = r;
        const Scalar ball = std::min(r, Scalar(kChartRadius));
        r = std::min(Scalar(kChartRadius),
                     psi_ball(spec, orbit[static_cast<std::size_t>(k)], Sign::Plus, 1, ball, n_iter)
                             .value *
                         r);
      }
    }
  }
  out.proxy.resize(static_cast<std::size_t>(period));
  for (int k = 0; k < period; ++k) {
    const Scalar prop_k = distance_to_complement(reg, orbit[static_cast<std::size_t>(k)]);
    out.proxy[static_cast<std::size_t>(k)] =
        std::max(floor_at[static_cast<std::size_t>(k)], prop_k);
  }
  CompensatedSum rhs_acc;
  for (int k = 0; k < period; ++k)
    rhs_acc.add(static_cast<double>(std::pow(out.proxy[static_cast<std::size_t>(k)], hoelder.alpha)));
  out.corollary_rhs = hoelder.C / Scalar(period) * Scalar(rhs_acc.value());
  return out;
}

}  // namespace radlab
