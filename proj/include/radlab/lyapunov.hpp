#pragma once

#include "radlab/cocycle.hpp"
#include "radlab/parallel.hpp"
#include "radlab/rng.hpp"
#include "radlab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace radlab {

/// Running Birkhoff averages (1/n) sum_{k<n} log psi_sign(f^k x), n = 1..n_max.
template <typename Scalar>
struct BirkhoffSeries {
  std::vector<Scalar> values;
  long n_max{0};
  Sign sign{Sign::Plus};
  TorusPoint<Scalar> start{};
};

/// Birkhoff series of log psi_sign along the forward orbit of x. The bundle
/// direction is recomputed independently at every orbit point; a convergence
/// failure is reported with the offending orbit index.
template <typename Scalar>
BirkhoffSeries<Scalar> birkhoff(const SystemSpec<Scalar>& spec, const TorusPoint<Scalar>& x,
                                Sign sign, long n_max, int n_iter = kDefaultPowerIterations) {
  if (n_max < 1) throw config_error("birkhoff needs n_max >= 1");
  BirkhoffSeries<Scalar> out;
  out.n_max = n_max;
  out.sign = sign;
  out.start = x;
  out.values.resize(static_cast<std::size_t>(n_max));
  CompensatedSum acc;
  TorusPoint<Scalar> z = x;
  for (long k = 0; k < n_max; ++k) {
    try {
      acc.add(static_cast<double>(log_psi(spec, z, sign, 1, n_iter)));
    } catch (const numerical_error&) {
      throw numerical_error("splitting did not converge at orbit index " + std::to_string(k));
    }
    out.values[static_cast<std::size_t>(k)] = Scalar(acc.value()) / Scalar(k + 1);
    z = apply(spec, z);
  }
  return out;
}

/// Max - min of the running averages over the trailing 10% of the series; the
/// reported stand-in for the limsup/liminf gap at finite time.
template <typename Scalar>
Scalar tail_oscillation(const BirkhoffSeries<Scalar>& series) {
  const std::size_t n = series.values.size();
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  Scalar lo = series.values[n - tail];
  Scalar hi = lo;
  for (std::size_t k = n - tail; k < n; ++k) {
    lo = std::min(lo, series.values[k]);
    hi = std::max(hi, series.values[k]);
  }
  return hi - lo;
}

template <typename Scalar>
struct LeEstimate {
  Scalar mean{0};
  Scalar stddev{0};          // sample standard deviation over starts
  Scalar tail_oscillation{0};  // worst tail oscillation among the samples
  long n_orbit{0};
  long n_samples{0};
};

/// Terminal Birkhoff averages over uniform random starts (mu = Lebesgue).
/// Per-sample RNG streams derive from (seed, sample index), so the estimate is
/// identical under any parallel schedule.
template <typename Scalar>
LeEstimate<Scalar> le_estimate(const SystemSpec<Scalar>& spec, Sign sign, long n_orbit,
                               long n_samples, std::uint64_t seed,
                               int n_iter = kDefaultPowerIterations) {
  if (n_orbit < 1000) throw config_error("le_estimate needs n_orbit >= 1000");
  if (n_samples < 1) throw config_error("le_estimate needs n_samples >= 1");
  std::vector<TorusPoint<Scalar>> starts(static_cast<std::size_t>(n_samples));
  for (long i = 0; i < n_samples; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    const auto p = rng.point();
    starts[static_cast<std::size_t>(i)] = TorusPoint<Scalar>{Scalar(p.x), Scalar(p.y)};
  }
  std::vector<Scalar> terminal(static_cast<std::size_t>(n_samples));
  std::vector<Scalar> osc(static_cast<std::size_t>(n_samples));
  parallel_for(n_samples, [&](long i) {
    const auto series = birkhoff(spec, starts[static_cast<std::size_t>(i)], sign, n_orbit, n_iter);
    terminal[static_cast<std::size_t>(i)] = series.values.back();
    osc[static_cast<std::size_t>(i)] = tail_oscillation(series);
  });
  CompensatedSum mean_acc;
  for (long i = 0; i < n_samples; ++i) mean_acc.add(static_cast<double>(terminal[static_cast<std::size_t>(i)]));
  const Scalar mean = Scalar(mean_acc.value()) / Scalar(n_samples);
  CompensatedSum var_acc;
  for (long i = 0; i < n_samples; ++i) {
    const double d = static_cast<double>(terminal[static_cast<std::size_t>(i)] - mean);
    var_acc.add(d * d);
  }
  LeEstimate<Scalar> est;
  est.mean = mean;
  est.stddev = n_samples > 1 ? Scalar(std::sqrt(var_acc.value() / static_cast<double>(n_samples - 1)))
                             : Scalar(0);
  est.tail_oscillation = *std::max_element(osc.begin(), osc.end());
  est.n_orbit = n_orbit;
  est.n_samples = n_samples;
  return est;
}

}  // namespace radlab
