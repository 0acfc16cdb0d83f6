#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/grid.hpp"
#include "extremal/ode.hpp"
#include "extremal/potentials.hpp"
#include "extremal/power_law.hpp"
#include "extremal/profile.hpp"
#include "extremal/scaled.hpp"

namespace extremal {

struct LinearSolveOptions {
  ode::Options ode{};
  /// (W, W') is rescaled when |W| leaves [1/limit, limit].
  double rescale_limit = 1e150;
};

struct LinearSolveStats {
  double inner_level = 0.0;
  double inner_exponent = 0.0;
  std::size_t rescalings = 0;
  double boundary_slope = 0.0;
};

/// Radial solution ω of -Δω = (Ψ - (N-1)/r²)ω with ω(1) = 1, as W(t) = ω(e^t).
///
/// W'' + (N-2)W' + (c(t) - (N-1))W = 0 is integrated outward from t_min with
/// W'(t_min) = β₊ W(t_min), β₊ the larger power-law exponent of the level
/// there, then scaled so that W(0) = 1.
inline RadialProfile solve_linearized(const PotentialSpec& psi,
                                      const LogRadialGrid& grid,
                                      const LinearSolveOptions& opts = {},
                                      LinearSolveStats* stats = nullptr) {
  detail::require(psi.dim() == grid.dim(),
                  "potential and grid dimensions differ");
  check_admissible(psi, grid);
  const int dim = grid.dim();
  const double n_minus_2 = dim - 2.0;
  const double n_minus_1 = dim - 1.0;
  const std::size_t n = grid.size();

  const double c_inner = psi.level(grid.t_min(), Side::Above);
  const PowerLawRoots roots = power_law_solution(c_inner, dim);

  std::vector<double> mant(n), slope(n), scale(n);
  ode::State<2> y{1.0, roots.beta_plus};
  double offset = 0.0;
  std::size_t rescalings = 0;
  mant[0] = y[0];
  slope[0] = y[1];
  scale[0] = 0.0;
  double h = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double mid = 0.5 * (a + b);
    auto rhs = [&](double t, const ode::State<2>& s) {
      const double c = psi.level(t, t < mid ? Side::Above : Side::Below);
      return ode::State<2>{s[1], -n_minus_2 * s[1] - (c - n_minus_1) * s[0]};
    };
    const auto stepper = ode::make_stepper<2>(rhs, opts.ode);
    if (h == 0.0) h = std::min(b - a, 1e-2);
    y = stepper.advance(a, y, b, h);
    const double mag = std::abs(y[0]);
    if (!(mag > 0.0) || !std::isfinite(mag))
      throw SolverError("linearized solution lost positivity at t = " +
                        std::to_string(b));
    if (mag > opts.rescale_limit || mag < 1.0 / opts.rescale_limit) {
      offset += std::log(mag);
      y[0] /= mag;
      y[1] /= mag;
      ++rescalings;
    }
    mant[k + 1] = y[0];
    slope[k + 1] = y[1];
    scale[k + 1] = offset;
  }

  const double w_end = mant[n - 1];
  if (!(w_end > 0.0))
    throw SolverError("normalization impossible: W(0) is not positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(mant[i] > 0.0))
      throw SolverError("linearized solution not positive at node " +
                        std::to_string(i));
    mant[i] /= w_end;
    slope[i] /= w_end;
    scale[i] -= offset;
  }
  if (stats) {
    stats->inner_level = c_inner;
    stats->inner_exponent = roots.beta_plus;
    stats->rescalings = rescalings;
    stats->boundary_slope = slope[n - 1];
  }
  return RadialProfile(grid, std::move(mant), std::move(slope),
                       std::move(scale));
}

/// Solve on the potential's default grid.
inline RadialProfile solve_linearized(const PotentialSpec& psi,
                                      double points_per_unit_t = 100.0) {
  return solve_linearized(psi, grid_for(psi, points_per_unit_t));
}

/// ω'(1) of the normalized solution.
inline double boundary_slope(const PotentialSpec& psi,
                             const LogRadialGrid& grid) {
  LinearSolveStats stats;
  solve_linearized(psi, grid, {}, &stats);
  return stats.boundary_slope;
}

namespace detail {

struct WindowCoefficients {
  double inner;        // ω = inner * r on (0, A)
  double middle_a;     // ω = (B²/r)(middle_a - middle_b (A/r)^{N-4}) on [A, B]
  double middle_b;
  double outer_r;      // ω = outer_r * r + outer_rn * r^{1-N} on (B, 1]
  double outer_rn;
};

inline WindowCoefficients window_coefficients(double a_rad, double b_rad,
                                              int dim) {
  const double n = dim;
  const double a = a_rad / b_rad;
  const double an4 = std::pow(a, n - 4.0);
  const double bn = std::pow(b_rad, n);
  const double d = (n - 2.0) * (n - 2.0) - 4.0 * an4 +
                   2.0 * (n - 2.0) * bn * (1.0 - an4);
  return {n * (n - 4.0) / (a * a * d),
          n * (n - 2.0) / d,
          2.0 * n / d,
          ((n - 2.0) * (n - 2.0) - 4.0 * an4) / d,
          2.0 * (n - 2.0) * bn * (1.0 - an4) / d};
}

}  // namespace detail

/// Closed-form solution for the window potential Ψ_{A,B}, piecewise in
/// (0, A), [A, B], (B, 1].
inline double closed_form_window(double a, double b, int dim, double r) {
  detail::require(std::isfinite(a) && std::isfinite(b) && std::isfinite(r),
                  "window arguments must be finite");
  detail::require(a > 0.0, "window inner radius must be positive");
  detail::require(a < b && b <= 1.0, "window needs A < B <= 1");
  detail::require(dim >= 10, "window closed form needs N >= 10");
  detail::require(r > 0.0 && r <= 1.0, "radius must lie in (0, 1]");
  const auto k = detail::window_coefficients(a, b, dim);
  const double n = dim;
  if (r < a) return k.inner * r;
  if (r <= b)
    return (b * b / r) * (k.middle_a - k.middle_b * std::pow(a / r, n - 4.0));
  return k.outer_r * r + k.outer_rn * std::pow(r, 1.0 - n);
}

/// d/dr of closed_form_window (right-sided at A and B).
inline double closed_form_window_slope(double a, double b, int dim, double r) {
  detail::require(a > 0.0 && a < b && b <= 1.0 && dim >= 10 && r > 0 &&
                      r <= 1.0,
                  "invalid window slope arguments");
  const auto k = detail::window_coefficients(a, b, dim);
  const double n = dim;
  if (r < a) return k.inner;
  if (r < b)
    return -(b * b / (r * r)) *
           (k.middle_a - (n - 3.0) * k.middle_b * std::pow(a / r, n - 4.0));
  return k.outer_r + (1.0 - n) * k.outer_rn * std::pow(r, -n);
}

struct ComparisonReport {
  RadialProfile lower;
  RadialProfile upper;
  /// max over nodes of ω1 - ω2 (may overflow to ±inf on very deep grids).
  double max_difference = 0.0;
  /// max over nodes of (ω1 - ω2)/ω2.
  double max_relative_excess = 0.0;
  std::size_t worst_node = 0;
};

/// Solves for c1 <= c2 and measures how far ω1 rises above ω2.
inline ComparisonReport compare_potentials(const PotentialSpec& psi1,
                                           const PotentialSpec& psi2,
                                           const LogRadialGrid& grid,
                                           const LinearSolveOptions& opts = {}) {
  detail::require(psi1.dim() == psi2.dim(), "potential dimensions differ");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (Side side : {Side::Below, Side::Above}) {
      const double c1 = psi1.level(grid[i], side);
      const double c2 = psi2.level(grid[i], side);
      if (c1 > c2)
        throw PreconditionError("potential ordering violated at node " +
                                std::to_string(i) + " (t = " +
                                std::to_string(grid[i]) + ")");
    }
  }
  RadialProfile w1 = solve_linearized(psi1, grid, opts);
  RadialProfile w2 = solve_linearized(psi2, grid, opts);
  double max_diff = -std::numeric_limits<double>::infinity();
  double max_rel = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Scaled a = w1.scaled(i);
    const Scaled b = w2.scaled(i);
    const double rel = std::expm1(a.log_abs() - b.log_abs());
    const double diff = (a - b).value();
    if (rel > max_rel) {
      max_rel = rel;
      worst = i;
    }
    max_diff = std::max(max_diff, diff);
  }
  return {std::move(w1), std::move(w2), max_diff, max_rel, worst};
}

}  // namespace extremal
