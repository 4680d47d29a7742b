#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

namespace radlab {

/// Worker count: RADIUS_LAB_THREADS if set, hardware concurrency otherwise.
inline int thread_count() {
  if (const char* env = std::getenv("RADIUS_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks per
/// worker. Callers must write results into per-index slots and reduce serially
/// afterwards; with that discipline output is identical for any worker count.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  const long block = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    const long lo = w * block;
    const long hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Neumaier compensated accumulator; keeps long Birkhoff and Monte-Carlo sums
/// reproducible to ~1e-15 relative regardless of length.
struct CompensatedSum {
  double sum{0};
  double comp{0};

  void add(double v) {
    const double t = sum + v;
    if (std::isinf(t)) {  // compensation of an infinite sum would produce NaN
      sum = t;
      return;
    }
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }

  double value() const { return sum + comp; }
};

}  // namespace radlab
