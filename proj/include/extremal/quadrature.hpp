#pragma once

#include <array>
#include <cmath>
#include <string>

#include "extremal/error.hpp"

namespace extremal {

struct QuadratureOptions {
  double rtol = 1e-8;
  double atol = 0.0;
  int min_levels = 2;
  int max_levels = 18;
};

/// Integral of g over [a, b] by composite trapezoid rules with panel doubling.
/// Successive trapezoid sums are Richardson-extrapolated (Romberg table) and
/// refinement stops once two consecutive extrapolated estimates agree.
template <class G>
double integrate_t(G&& g, double a, double b, QuadratureOptions opts = {}) {
  if (a == b) return 0.0;
  constexpr int kMaxLevels = 24;
  const int levels = std::min(opts.max_levels, kMaxLevels);
  std::array<double, kMaxLevels> prev{};
  std::array<double, kMaxLevels> cur{};
  const double h0 = b - a;
  double trap = 0.5 * h0 * (g(a) + g(b));
  prev[0] = trap;
  long panels = 1;
  for (int level = 1; level < levels; ++level) {
    const double h = h0 / static_cast<double>(panels);
    double mid = 0.0;
    for (long k = 0; k < panels; ++k)
      mid += g(a + (static_cast<double>(k) + 0.5) * h);
    trap = 0.5 * trap + 0.5 * h * mid;
    panels *= 2;
    cur[0] = trap;
    double pow4 = 1.0;
    for (int j = 1; j <= level; ++j) {
      pow4 *= 4.0;
      cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (pow4 - 1.0);
    }
    const double est = cur[level];
    const double last = prev[level - 1];
    if (level >= opts.min_levels &&
        std::abs(est - last) <= opts.rtol * std::abs(est) + opts.atol)
      return est;
    prev = cur;
  }
  throw SolverError("quadrature did not converge on [" + std::to_string(a) +
                    ", " + std::to_string(b) + "]");
}

/// Integral of fn(r) dr over [exp(ta), exp(tb)], computed in t with weight e^t.
template <class Fn>
double integrate_r(Fn&& fn, double ta, double tb, QuadratureOptions opts = {}) {
  return integrate_t(
      [&](double t) {
        const double r = std::exp(t);
        return fn(r) * r;
      },
      ta, tb, opts);
}

}  // namespace extremal
