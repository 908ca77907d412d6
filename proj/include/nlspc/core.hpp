#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nlspc {

inline constexpr double kPi = 3.14159265358979323846;

/// Fixed-order pairwise reduction. Deterministic for a given term order and
/// more accurate than a running sum on long arrays.
template <class F>
double sum_terms(std::size_t n, F&& term) {
  struct Rec {
    F& f;
    double operator()(std::size_t lo, std::size_t hi) const {
      if (hi - lo <= 32) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
      }
      std::size_t mid = lo + (hi - lo) / 2;
      return (*this)(lo, mid) + (*this)(mid, hi);
    }
  } rec{term};
  return n == 0 ? 0.0 : rec(0, n);
}

inline double pairwise_sum(std::span<const double> v) {
  return sum_terms(v.size(), [&](std::size_t i) { return v[i]; });
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool finite(double x) { return std::isfinite(x); }

/// Deterministic 64-bit generator (SplitMix64); identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Adaptive Simpson quadrature on [a,b]; used by oracles and 1-D setup code.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int depth = 60) {
  struct Impl {
    const std::function<double(double)>& f;
    double run(double a0, double b0, double fa, double fm, double fb,
               double whole, double tol, int depth) const {
      double m = 0.5 * (a0 + b0);
      double lm = 0.5 * (a0 + m), rm = 0.5 * (m + b0);
      double flm = f(lm), frm = f(rm);
      double left = (m - a0) / 6.0 * (fa + 4.0 * flm + fm);
      double right = (b0 - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return run(a0, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             run(m, b0, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } impl{f};
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return impl.run(a, b, fa, fm, fb, whole, tol, depth);
}

inline double sq(double x) { return x * x; }

/// Work-stealing loop over [0, n).  Results must be written to pre-sized
/// slots so the merge order is independent of the thread count.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  int nt = std::min(threads, n);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) f(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace nlspc
