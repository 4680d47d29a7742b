#pragma once

#include "radlab/cocycle.hpp"
#include "radlab/parallel.hpp"
#include "radlab/radii.hpp"
#include "radlab/rng.hpp"
#include "radlab/systems.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace radlab {

/// Measurable set on the torus: a metric ball or a node-indicator grid
/// (membership of a point is the indicator at its nearest node).
template <typename Scalar>
class Region {
 public:
  enum class Kind { Ball, Grid };

  static Region ball(TorusPoint<Scalar> center, Scalar radius) {
    if (!(radius > Scalar(0))) throw config_error("region ball radius must be positive");
    Region r;
    r.kind_ = Kind::Ball;
    r.center_ = center;
    r.radius_ = radius;
    return r;
  }

  static Region grid(int grid_n, std::vector<std::uint8_t> inside) {
    if (grid_n < 1 || inside.size() != static_cast<std::size_t>(grid_n) * grid_n)
      throw config_error("region grid size mismatch");
    Region r;
    r.kind_ = Kind::Grid;
    r.grid_n_ = grid_n;
    r.inside_ = std::move(inside);
    return r;
  }

  Kind kind() const { return kind_; }
  const TorusPoint<Scalar>& center() const { return center_; }
  Scalar radius() const { return radius_; }
  int grid_n() const { return grid_n_; }
  const std::vector<std::uint8_t>& indicator() const { return inside_; }

  bool contains(const TorusPoint<Scalar>& p) const {
    if (kind_ == Kind::Ball) return torus_distance(p, center_) <= radius_;
    const int i = static_cast<int>(std::lround(p.x * grid_n_)) % grid_n_;
    const int j = static_cast<int>(std::lround(p.y * grid_n_)) % grid_n_;
    return inside_[static_cast<std::size_t>(i) * grid_n_ + j] != 0;
  }

  /// Lebesgue measure. Balls are exact for every admissible radius (closed
  /// form for the lens overlaps up to sqrt(2)/2); grids report node fraction.
  Scalar area() const {
    if (kind_ == Kind::Grid) {
      long c = 0;
      for (auto v : inside_) c += v;
      return Scalar(c) / Scalar(static_cast<long>(grid_n_) * grid_n_);
    }
    const Scalar r = radius_;
    const Scalar half_diag = std::numbers::sqrt2_v<Scalar> / Scalar(2);
    if (r >= half_diag) return Scalar(1);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    if (r <= Scalar(0.5)) return pi * r * r;
    const Scalar seg = r * r * std::acos(Scalar(0.5) / r) -
                       Scalar(0.5) * std::sqrt(r * r - Scalar(0.25));
    return pi * r * r - Scalar(4) * seg;
  }

 private:
  Kind kind_{Kind::Ball};
  TorusPoint<Scalar> center_{};
  Scalar radius_{0};
  int grid_n_{0};
  std::vector<std::uint8_t> inside_;
};

enum class Direction { Forward, Backward };

/// First return time with the strict convention phi = min{ n > 1 : f^n(x) in A }
/// (f^{-n} for Backward). The n = 1 image is deliberately never tested; with a
/// full-measure A this makes phi identically 2.
struct ReturnRecord {
  TorusPoint<double> x{};
  long phi{0};
  bool orbit_cap_hit{false};
};

template <typename Scalar>
ReturnRecord return_time(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                         const Region<Scalar>& A, Direction direction, long cap) {
  if (cap < 2) throw config_error("return-time cap must be >= 2");
  ReturnRecord rec;
  rec.x = TorusPoint<double>{static_cast<double>(x.x), static_cast<double>(x.y)};
  TorusPoint<Scalar> z =
      direction == Direction::Forward ? apply(spec, x) : apply_inverse(spec, x);
  for (long n = 2; n <= cap; ++n) {
    z = direction == Direction::Forward ? apply(spec, z) : apply_inverse(spec, z);
    if (A.contains(z)) {
      rec.phi = n;
      return rec;
    }
  }
  rec.phi = cap;
  rec.orbit_cap_hit = true;
  return rec;
}

template <typename Scalar>
struct KacReport {
  Scalar lhs{0};
  Scalar rhs{0};
  Scalar rel_err{0};
  long n_in_A{0};       // conditioned samples actually used
  long n_capped{0};     // towers that hit the orbit cap (excluded)
  bool low_confidence{false};
};

/// Monte-Carlo check of the return-sum identity
///   int psi dmu = int_A sum_{k=0}^{phi_A(x)-1} psi(f^k x) dmu.
/// lhs averages the observable over n_samples uniform points. rhs draws
/// n_samples points conditioned to A by rejection (at most 1000 attempts per
/// accepted sample; fewer than 100 acceptances flags low confidence) and
/// multiplies the mean return sum by the exact area of A.
template <typename Scalar, class Observable>
KacReport<Scalar> kac_verify(const SystemSpec<Scalar>& spec, const Region<Scalar>& A,
                             Observable&& observable, long n_samples, long orbit_cap,
                             std::uint64_t seed) {
  if (n_samples < 1) throw config_error("kac_verify needs samples");
  KacReport<Scalar> rep;

  // Plain side.
  std::vector<TorusPoint<Scalar>> pts(static_cast<std::size_t>(n_samples));
  {
    RngStream rng(seed, 0);
    for (long i = 0; i < n_samples; ++i) {
      const auto p = rng.point();
      pts[static_cast<std::size_t>(i)] = TorusPoint<Scalar>{Scalar(p.x), Scalar(p.y)};
    }
  }
  std::vector<Scalar> vals(static_cast<std::size_t>(n_samples));
  parallel_for(n_samples, [&](long i) {
    vals[static_cast<std::size_t>(i)] = observable(pts[static_cast<std::size_t>(i)]);
  });
  CompensatedSum lhs_acc;
  for (long i = 0; i < n_samples; ++i) lhs_acc.add(static_cast<double>(vals[static_cast<std::size_t>(i)]));
  rep.lhs = Scalar(lhs_acc.value()) / Scalar(n_samples);

  // A side, conditioned to A.
  std::vector<TorusPoint<Scalar>> base;
  base.reserve(static_cast<std::size_t>(n_samples));
  {
    RngStream rng(seed, 1);
    const long max_attempts = 1000 * n_samples;
    for (long a = 0; a < max_attempts && static_cast<long>(base.size()) < n_samples; ++a) {
      const auto p = rng.point();
      const auto tp = TorusPoint<Scalar>{Scalar(p.x), Scalar(p.y)};
      if (A.contains(tp)) base.push_back(tp);
    }
  }
  rep.n_in_A = static_cast<long>(base.size());
  if (rep.n_in_A == 0) throw config_error("region has no sampled mass");
  if (rep.n_in_A < 100) rep.low_confidence = true;

  std::vector<Scalar> tower(base.size(), Scalar(0));
  std::vector<char> capped(base.size(), 0);
  parallel_for(static_cast<long>(base.size()), [&](long i) {
    const auto& x0 = base[static_cast<std::size_t>(i)];
    // Walk to the first return (n > 1) accumulating the observable on the way.
    CompensatedSum acc;
    acc.add(static_cast<double>(observable(x0)));
    TorusPoint<Scalar> z = apply(spec, x0);
    long phi = -1;
    for (long n = 2; n <= orbit_cap; ++n) {
      acc.add(static_cast<double>(observable(z)));  // k = n-1 term
      z = apply(spec, z);
      if (A.contains(z)) {
        phi = n;
        break;
      }
    }
    if (phi < 0) {
      capped[static_cast<std::size_t>(i)] = 1;
      return;
    }
    tower[static_cast<std::size_t>(i)] = Scalar(acc.value());
  });
  CompensatedSum rhs_acc;
  long used = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (capped[i]) {
      ++rep.n_capped;
      continue;
    }
    rhs_acc.add(static_cast<double>(tower[i]));
    ++used;
  }
  if (used == 0) throw numerical_error("every return-time walk hit the orbit cap");
  if (rep.n_capped > 0) rep.low_confidence = true;
  rep.rhs = A.area() * Scalar(rhs_acc.value()) / Scalar(used);
  rep.rel_err = std::abs(rep.lhs - rep.rhs) /
                std::max(std::abs(rep.lhs), Scalar(1e-12));
  return rep;
}

inline auto observable_one() {
  return [](const auto&) { return 1.0; };
}

template <typename Scalar>
auto observable_log_psi_plus(const SystemSpec<Scalar>& spec, int n_iter = kDefaultPowerIterations) {
  return [&spec, n_iter](const TorusPoint<Scalar>& p) { return log_psi(spec, p, Sign::Plus, 1, n_iter); };
}

/// One evaluation of the measurable radius function r_+: r0 on the base set,
/// otherwise the radius the inductive recursion reaches at x when started
/// with r0 at the first backward return into the base set. The recursion
/// replays the stored backward path, so the entry is exactly recomputable.
template <typename Scalar>
struct MeasurableRadiusEntry {
  TorusPoint<Scalar> x{};
  long phi{0};  // 0 on the base set
  bool capped{false};
  Scalar r_plus{0};
};

template <typename Scalar>
MeasurableRadiusEntry<Scalar> measurable_radius(const SystemSpec<Scalar>& spec, Scalar r0,
                                                const Region<Scalar>& A_r0,
                                                const TorusPoint<Scalar>& x, long orbit_cap,
                                                int n_iter = kDefaultPowerIterations) {
  if (!(r0 > Scalar(0))) throw config_error("r0 must be positive");
  MeasurableRadiusEntry<Scalar> entry;
  entry.x = x;
  if (A_r0.contains(x)) {
    entry.r_plus = r0;
    return entry;
  }
  std::vector<TorusPoint<Scalar>> path{x};  // path[j] = f^{-j}(x)
  path.push_back(apply_inverse(spec, x));
  long phi = -1;
  for (long n = 2; n <= orbit_cap; ++n) {
    path.push_back(apply_inverse(spec, path.back()));
    if (A_r0.contains(path.back())) {
      phi = n;
      break;
    }
  }
  if (phi < 0) {
    entry.capped = true;
    entry.phi = orbit_cap;
    return entry;
  }
  entry.phi = phi;
  Scalar r = r0;
  for (long j = phi; j >= 1; --j) {
    const Scalar ball = std::min(r, Scalar(kChartRadius));
    r *= psi_ball(spec, path[static_cast<std::size_t>(j)], Sign::Plus, 1, ball, n_iter).value;
  }
  entry.r_plus = r;
  return entry;
}

/// Constructive stand-in for the positive-measure base set of the stable
/// manifold theorem: nodes of base_region whose 200-step arrival radius
/// certifies G^+(r0) membership.
template <typename Scalar>
Region<Scalar> build_a_r0_region(const SystemSpec<Scalar>& spec, Scalar r0,
                                 const Region<Scalar>& base_region, int grid_n,
                                 long certify_steps = 200, Scalar certify_seed_radius = Scalar(1e-6),
                                 int n_iter = kDefaultPowerIterations) {
  const long n = static_cast<long>(grid_n) * grid_n;
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](long idx) {
    const int i = static_cast<int>(idx / grid_n);
    const int j = static_cast<int>(idx % grid_n);
    const auto p = TorusPoint<Scalar>{Scalar(i) / grid_n, Scalar(j) / grid_n};
    if (!base_region.contains(p)) return;
    const Scalar arrived = certify_arrival_radius(spec, p, certify_steps, certify_seed_radius, n_iter);
    inside[static_cast<std::size_t>(idx)] = arrived >= r0 ? 1 : 0;
  });
  return Region<Scalar>::grid(grid_n, std::move(inside));
}

/// Monte-Carlo verdicts for the integrated radius inequality, its Jensen
/// variant, and the small-r0 mean consequence. Capped entries are excluded
/// and counted.
template <typename Scalar>
struct IntegratedInequalityReport {
  Scalar le_plus{0};
  Scalar mean_log_ratio{0};  // int log(r_+/r0) dmu estimate
  Scalar mean_pow{0};        // int r_+^alpha dmu estimate
  Scalar mean_ratio{0};      // int (r_+/r0) dmu estimate
  Scalar mean_r{0};          // int r_+ dmu estimate
  Scalar rhs_main{0};
  Scalar rhs_jensen{0};
  bool holds_main{false};
  bool holds_jensen{false};
  bool r0_qualifies{false};
  bool holds_r0_consequence{false};
  long n_used{0};
  long n_capped{0};
};

template <typename Scalar>
IntegratedInequalityReport<Scalar> check_integrated_inequality(
    Scalar le_plus, const HoelderEstimate<Scalar>& hoelder, Scalar r0,
    const std::vector<MeasurableRadiusEntry<Scalar>>& entries) {
  if (entries.size() < 1000) throw config_error("integrated inequality needs >= 1000 samples");
  IntegratedInequalityReport<Scalar> rep;
  rep.le_plus = le_plus;
  CompensatedSum log_acc, pow_acc, ratio_acc, r_acc;
  for (const auto& e : entries) {
    if (e.capped) {
      ++rep.n_capped;
      continue;
    }
    ++rep.n_used;
    log_acc.add(static_cast<double>(std::log(e.r_plus / r0)));
    pow_acc.add(static_cast<double>(std::pow(e.r_plus, hoelder.alpha)));
    ratio_acc.add(static_cast<double>(e.r_plus / r0));
    r_acc.add(static_cast<double>(e.r_plus));
  }
  if (rep.n_used == 0) throw numerical_error("no usable measurable-radius entries");
  const Scalar inv = Scalar(1) / Scalar(rep.n_used);
  rep.mean_log_ratio = Scalar(log_acc.value()) * inv;
  rep.mean_pow = Scalar(pow_acc.value()) * inv;
  rep.mean_ratio = Scalar(ratio_acc.value()) * inv;
  rep.mean_r = Scalar(r_acc.value()) * inv;
  rep.rhs_main = rep.mean_log_ratio + hoelder.C * rep.mean_pow;
  rep.rhs_jensen = std::log(rep.mean_ratio) + hoelder.C * std::pow(rep.mean_r, hoelder.alpha);
  rep.holds_main = le_plus <= rep.rhs_main;
  rep.holds_jensen = le_plus <= rep.rhs_jensen;
  rep.r0_qualifies = hoelder.C == Scalar(0) ||
                     r0 <= std::pow(le_plus / hoelder.C, Scalar(1) / hoelder.alpha);
  rep.holds_r0_consequence = !rep.r0_qualifies || rep.mean_r >= r0 * (Scalar(1) - Scalar(1e-12));
  return rep;
}

}  // namespace radlab
