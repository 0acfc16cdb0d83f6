#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "extremal/error.hpp"

namespace extremal::ode {

template <std::size_t D>
using State = std::array<double, D>;

struct Options {
  double rtol = 1e-10;
  double atol = 0.0;
  double h_min = 1e-13;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

/// Dormand–Prince 5(4) pair, propagating the fifth-order solution.
///
/// The error norm uses one magnitude shared by all components,
/// atol + rtol * max_i max(|y_i|, |y_new_i|), which suits linear systems in
/// (value, slope) form where the slope may pass through zero.
template <std::size_t D, class Rhs>
class DormandPrince {
 public:
  DormandPrince(Rhs rhs, Options opts) : rhs_(std::move(rhs)), opts_(opts) {}

  struct Trial {
    State<D> y;
    double error;  // <= 1 means acceptable
  };

  Trial trial(double t, const State<D>& y, double h) const {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    State<D> k1 = rhs_(t, y), k2, k3, k4, k5, k6, k7, tmp;
    for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    k2 = rhs_(t + c2 * h, tmp);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs_(t + c3 * h, tmp);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs_(t + c4 * h, tmp);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                           a54 * k4[i]);
    k5 = rhs_(t + c5 * h, tmp);
    for (std::size_t i = 0; i < D; ++i)
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
    k6 = rhs_(t + h, tmp);
    State<D> out;
    for (std::size_t i = 0; i < D; ++i)
      out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                           b6 * k6[i]);
    k7 = rhs_(t + h, out);
    double mag = 0.0;
    for (std::size_t i = 0; i < D; ++i)
      mag = std::max({mag, std::abs(y[i]), std::abs(out[i])});
    const double scale = opts_.atol + opts_.rtol * mag;
    double err = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                            e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = std::max(err, std::abs(e));
    }
    const double norm = scale > 0 ? err / scale : (err > 0 ? 1e300 : 0.0);
    for (double v : out)
      if (!std::isfinite(v)) return {out, std::numeric_limits<double>::infinity()};
    return {out, norm};
  }

  /// Step-size multiplier after a trial with the given error norm.
  static double factor(double error) {
    if (error == 0.0) return 5.0;
    if (!std::isfinite(error)) return 0.2;
    return std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
  }

  /// Integrates exactly from t0 to t1 (either direction). `h` carries the
  /// step-size hint in and the last successful magnitude out.
  State<D> advance(double t0, State<D> y, double t1, double& h) const {
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    double t = t0;
    h = std::min(std::abs(h), opts_.h_max);
    if (!(h > 0)) h = std::min(std::abs(t1 - t0), 1e-2);
    std::size_t steps = 0;
    while (dir * (t1 - t) > 0) {
      if (++steps > opts_.max_steps)
        throw SolverError("ODE integration exceeded the step budget");
      const double remaining = std::abs(t1 - t);
      const bool last = h >= remaining;
      const double step = last ? remaining : h;
      const Trial tr = trial(t, y, dir * step);
      if (tr.error <= 1.0) {
        t = last ? t1 : t + dir * step;
        y = tr.y;
        const double grown = std::min(step * factor(tr.error), opts_.h_max);
        // Keep the hint from collapsing when the final sliver was short.
        h = last ? std::max(h, grown) : grown;
      } else {
        h = step * factor(tr.error);
        if (h < opts_.h_min * std::max(1.0, std::abs(t)))
          throw SolverError("ODE step size underflow near t = " +
                            std::to_string(t));
      }
    }
    return y;
  }

  const Options& options() const { return opts_; }

 private:
  Rhs rhs_;
  Options opts_;
};

template <std::size_t D, class Rhs>
DormandPrince<D, Rhs> make_stepper(Rhs rhs, Options opts = {}) {
  return DormandPrince<D, Rhs>(std::move(rhs), opts);
}

}  // namespace extremal::ode
