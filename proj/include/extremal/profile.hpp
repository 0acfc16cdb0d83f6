#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/grid.hpp"
#include "extremal/scaled.hpp"

namespace extremal {

namespace detail {

// Fornberg's recursion: weights w[k] such that sum w[k] f(x[k]) approximates
// the derivative of order `order` at x0.
template <std::size_t MaxPoints = 7>
std::array<double, MaxPoints> fd_weights(std::span<const double> x, double x0,
                                         int order) {
  const std::size_t n = x.size();
  std::array<std::array<double, MaxPoints>, 3> c{};
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c[order];
}

// Up to seven consecutive node indices inside [first, last], centred on i when
// the segment allows.
inline std::pair<std::size_t, std::size_t> stencil(std::size_t i,
                                                   std::size_t first,
                                                   std::size_t last,
                                                   std::size_t width = 7) {
  const std::size_t count = std::min(width, last - first + 1);
  std::size_t lo = i >= first + count / 2 ? i - count / 2 : first;
  if (lo + count - 1 > last) lo = last + 1 - count;
  return {lo, lo + count - 1};
}

// First derivative at node i from samples value(j) restricted to [first, last].
template <class Value>
double stencil_derivative(const LogRadialGrid& grid, std::size_t i,
                          std::size_t first, std::size_t last, Value&& value) {
  const auto [lo, hi] = stencil(i, first, last);
  const std::span<const double> xs = grid.nodes().subspan(lo, hi - lo + 1);
  const auto w = fd_weights(xs, grid[i], 1);
  double d = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) d += w[j - lo] * value(j);
  return d;
}

}  // namespace detail

/// A radial function sampled on a log grid, with d/dt slopes at nodes and
/// piecewise-cubic Hermite interpolation in t between nodes.
///
/// Each node carries a natural-log offset: the represented value is
/// mantissa * exp(log_scale). Slopes share the node's offset. At breakpoint
/// nodes the slope used by the interval to the left may differ.
class RadialProfile {
 public:
  RadialProfile(LogRadialGrid grid, std::vector<double> mantissas,
                std::vector<double> slopes = {},
                std::vector<double> log_scale = {})
      : grid_(std::move(grid)),
        mantissa_(std::move(mantissas)),
        slope_(std::move(slopes)),
        log_scale_(std::move(log_scale)) {
    detail::require(mantissa_.size() == grid_.size(),
                    "profile length does not match grid");
    detail::require(log_scale_.empty() || log_scale_.size() == grid_.size(),
                    "log-scale length does not match grid");
    for (std::size_t i = 0; i < mantissa_.size(); ++i) {
      detail::require(std::isfinite(mantissa_[i]) &&
                          (log_scale_.empty() || std::isfinite(log_scale_[i])),
                      "profile value not finite at node " + std::to_string(i));
    }
    if (slope_.empty()) {
      differentiate();
    } else {
      detail::require(slope_.size() == grid_.size(),
                      "slope length does not match grid");
    }
  }

  /// Samples fn(r) at every node; slopes by finite differences.
  template <class Fn>
  static RadialProfile sample(const LogRadialGrid& grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = fn(grid.radius(i));
    return RadialProfile(grid, std::move(v));
  }

  /// Samples a function of t together with its exact t-derivative.
  template <class Fn, class Dfn>
  static RadialProfile sample_t(const LogRadialGrid& grid, Fn&& fn,
                                Dfn&& dfn) {
    std::vector<double> v(grid.size());
    std::vector<double> d(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      v[i] = fn(grid[i]);
      d[i] = dfn(grid[i]);
    }
    return RadialProfile(grid, std::move(v), std::move(d));
  }

  const LogRadialGrid& grid() const { return grid_; }
  std::size_t size() const { return mantissa_.size(); }
  bool has_log_scale() const { return !log_scale_.empty(); }

  double mantissa(std::size_t i) const { return mantissa_[i]; }
  double mantissa_slope(std::size_t i) const { return slope_[i]; }
  double log_scale(std::size_t i) const {
    return log_scale_.empty() ? 0.0 : log_scale_[i];
  }

  Scaled scaled(std::size_t i) const { return {mantissa_[i], log_scale(i)}; }
  Scaled scaled_slope(std::size_t i) const { return {slope_[i], log_scale(i)}; }
  Scaled scaled_slope_left(std::size_t i) const {
    return {left_slope_mantissa(i), log_scale(i)};
  }
  double value(std::size_t i) const { return scaled(i).value(); }
  /// d/dt at node i (right-sided at breakpoints).
  double slope(std::size_t i) const { return scaled_slope(i).value(); }
  double slope_left(std::size_t i) const { return scaled_slope_left(i).value(); }

  /// Value at log-radius t (clamped to the grid range).
  Scaled at(double t) const {
    const auto [i, m, d] = hermite(t);
    (void)d;
    return {m, log_scale(i)};
  }
  double operator()(double t) const { return at(t).value(); }
  /// Value at t using the cubic of interval [i, i+1].
  Scaled at_in(std::size_t i, double t) const {
    const auto r = hermite_in(i, t);
    return {r.mantissa, log_scale(i)};
  }
  Scaled slope_at(double t) const {
    const auto [i, m, d] = hermite(t);
    (void)m;
    return {d, log_scale(i)};
  }

  /// Same grid, values multiplied by exp(log_factor).
  RadialProfile rescaled(double log_factor) const {
    std::vector<double> ls(size(), log_factor);
    for (std::size_t i = 0; i < size(); ++i) ls[i] += log_scale(i);
    auto out = *this;
    out.log_scale_ = std::move(ls);
    return out;
  }

 private:
  double left_slope_mantissa(std::size_t i) const {
    auto it = std::lower_bound(
        left_slope_.begin(), left_slope_.end(), i,
        [](const auto& p, std::size_t k) { return p.first < k; });
    if (it != left_slope_.end() && it->first == i) return it->second;
    return slope_[i];
  }

  struct HermiteResult {
    std::size_t interval;
    double mantissa;
    double slope;
  };

  HermiteResult hermite(double t) const { return hermite_in(grid_.locate(t), t); }

  HermiteResult hermite_in(std::size_t i, double t) const {
    const double t0 = grid_[i];
    const double h = grid_[i + 1] - t0;
    const double s = std::clamp((t - t0) / h, 0.0, 1.0);
    const double rel = std::exp(log_scale(i + 1) - log_scale(i));
    const double y0 = mantissa_[i];
    const double y1 = mantissa_[i + 1] * rel;
    const double d0 = slope_[i] * h;
    const double d1 = left_slope_mantissa(i + 1) * rel * h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double m = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * d0 +
                     (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * d1;
    const double dm = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * d0 +
                       (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * d1) /
                      h;
    return {i, m, dm};
  }

  void differentiate() {
    slope_.assign(size(), 0.0);
    for (const auto& [first, last] : grid_.segments()) {
      for (std::size_t i = first; i <= last; ++i) {
        const double d = detail::stencil_derivative(
            grid_, i, first, last, [&](std::size_t j) {
              return mantissa_[j] * std::exp(log_scale(j) - log_scale(i));
            });
        if (i == first && i != 0) {
          // Breakpoint: this segment supplies the right-sided slope; the
          // previous pass already wrote the left-sided one.
          left_slope_.emplace_back(i, slope_[i]);
        }
        slope_[i] = d;
      }
    }
  }

  LogRadialGrid grid_;
  std::vector<double> mantissa_;
  std::vector<double> slope_;
  std::vector<double> log_scale_;
  std::vector<std::pair<std::size_t, double>> left_slope_;
};

}  // namespace extremal
