#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/profile.hpp"
#include "extremal/quadrature.hpp"
#include "extremal/scaled.hpp"

namespace extremal {

/// Discontinuity of -Δu recorded at a breakpoint: right limit minus left.
struct LaplacianJump {
  std::size_t node;
  double t;
  Scaled jump;
};

/// -Δu for a radial u, evaluated in t: -(u_tt + (N-2) u_t) e^{-2t}.
///
/// u_tt comes from seven-point differences of the stored slopes within each
/// breakpoint segment. At breakpoints the two one-sided values are averaged
/// and their difference appended to `jumps` when requested.
inline RadialProfile radial_laplacian(const RadialProfile& u,
                                      std::vector<LaplacianJump>* jumps =
                                          nullptr) {
  const LogRadialGrid& grid = u.grid();
  detail::require(grid.size() >= 3,
                  "grid too coarse for second differences (need 3 nodes)");
  const double n_minus_2 = grid.dim() - 2.0;
  const std::size_t n = grid.size();
  std::vector<double> second(n, 0.0);
  std::vector<double> left_second(n, 0.0);
  std::vector<bool> has_left(n, false);

  for (const auto& [first, last] : grid.segments()) {
    auto slope_in_segment = [&, first = first, last = last](std::size_t j) {
      if (j == last && j != first) return u.scaled_slope_left(j);
      return u.scaled_slope(j);
    };
    for (std::size_t i = first; i <= last; ++i) {
      const double d = detail::stencil_derivative(
          grid, i, first, last, [&](std::size_t j) {
            const Scaled s = slope_in_segment(j);
            return s.mantissa() * std::exp(s.exponent() - u.log_scale(i));
          });
      if (i == last && last + 1 < n) {
        left_second[i] = d;
        has_left[i] = true;
      } else {
        second[i] = d;
      }
    }
  }

  std::vector<double> mant(n);
  std::vector<double> scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double slope_right = u.mantissa_slope(i);
    double utt = second[i];
    double ut = slope_right;
    if (has_left[i]) {
      const double slope_left = u.scaled_slope_left(i).mantissa();
      const double lap_left = -(left_second[i] + n_minus_2 * slope_left);
      const double lap_right = -(second[i] + n_minus_2 * slope_right);
      if (jumps) {
        jumps->push_back({i, grid[i],
                          Scaled(lap_right - lap_left,
                                 u.log_scale(i) - 2.0 * grid[i])});
      }
      utt = 0.5 * (left_second[i] + second[i]);
      ut = 0.5 * (slope_left + slope_right);
    }
    mant[i] = -(utt + n_minus_2 * ut);
    scale[i] = u.log_scale(i) - 2.0 * grid[i];
  }
  return RadialProfile(grid, std::move(mant), {}, std::move(scale));
}

/// u(r) = ∫_r^1 w(ρ) dρ on the grid of w, so u(1) = 0 and u_t = -w r at
/// every node. Interval integrals use the Hermite interpolant of w.
inline RadialProfile integrate_inward(const RadialProfile& w,
                                      QuadratureOptions opts = {}) {
  const LogRadialGrid& grid = w.grid();
  const std::size_t n = grid.size();
  std::vector<double> u(n, 0.0);
  std::vector<double> ut(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Scaled wi = w.scaled(i);
    const double s = wi.mantissa() * std::exp(wi.exponent() + grid[i]);
    detail::require(std::isfinite(s), "integrand w*r overflows at node " +
                                          std::to_string(i));
    ut[i] = -s;
  }
  double acc = 0.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double piece = integrate_t(
        [&](double t) {
          const Scaled v = w.at_in(k, t);
          return v.mantissa() * std::exp(v.exponent() + t);
        },
        a, b, opts);
    acc += piece;
    if (!std::isfinite(acc))
      throw SolverError("inward integral overflows at node " +
                        std::to_string(k));
    u[k] = acc;
  }
  return RadialProfile(grid, std::move(u), std::move(ut));
}

}  // namespace extremal
