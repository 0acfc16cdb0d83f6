#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "extremal/error.hpp"

namespace extremal {

/// Value and first derivative of a curve at one end of a segment.
struct EndpointData {
  double t;
  double value;
  double slope;
};

/// Strictly monotone C^k fill between two endpoints.
///
/// The slope runs d0 -> m over a ramp of width w, stays at m, then m -> d1
/// over a second ramp. Ramps use the smoothstep of order k, so derivatives
/// 2..k of the curve vanish at both ends: endpoint data taken from a curve
/// that is linear in t (a constant level, or log Ψ on the borderline branch)
/// is matched to order k.
class MonotoneSegment {
 public:
  MonotoneSegment(EndpointData left, EndpointData right, int order,
                  double ramp_width)
      : left_(left), right_(right), order_(order), width_(ramp_width) {
    const double len = right_.t - left_.t;
    plateau_ = (right_.value - left_.value -
                width_ * 0.5 * (left_.slope + right_.slope)) /
               (len - width_);
    coeffs_ = smoothstep_coefficients(order_);
  }

  double t0() const { return left_.t; }
  double t1() const { return right_.t; }
  double ramp_width() const { return width_; }
  double plateau_slope() const { return plateau_; }
  int order() const { return order_; }
  const EndpointData& left() const { return left_; }
  const EndpointData& right() const { return right_; }

  /// Interior points where the polynomial pieces meet.
  std::array<double, 2> knots() const {
    return {left_.t + width_, right_.t - width_};
  }

  double value(double t) const {
    if (t <= left_.t) return left_.value;
    if (t >= right_.t) return right_.value;
    const double w = width_;
    const double a = left_.t + w;
    const double b = right_.t - w;
    if (t < a) {
      const double tau = (t - left_.t) / w;
      return left_.value +
             w * (left_.slope * tau + (plateau_ - left_.slope) * integral(tau));
    }
    const double at_a = left_.value + 0.5 * w * (left_.slope + plateau_);
    if (t <= b) return at_a + plateau_ * (t - a);
    // Integrate backwards from the right end so the endpoint value is exact.
    const double tau = (right_.t - t) / w;
    return right_.value -
           w * (right_.slope * tau + (plateau_ - right_.slope) * integral(tau));
  }

  double slope(double t) const {
    const double w = width_;
    if (t <= left_.t) return left_.slope;
    if (t >= right_.t) return right_.slope;
    if (t < left_.t + w)
      return left_.slope +
             (plateau_ - left_.slope) * step((t - left_.t) / w);
    if (t <= right_.t - w) return plateau_;
    return right_.slope +
           (plateau_ - right_.slope) * step((right_.t - t) / w);
  }

  /// Smoothstep S_k in monomial form: S(0)=0, S(1)=1, derivatives 1..k-1 vanish
  /// at both ends.
  static std::vector<double> smoothstep_coefficients(int k) {
    const int deg = 2 * k - 1;
    std::vector<double> coeff(static_cast<std::size_t>(deg) + 1, 0.0);
    auto binom = [](int n, int r) {
      double b = 1.0;
      for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
      return b;
    };
    // sum_{j=k}^{deg} C(deg,j) τ^j (1-τ)^{deg-j}
    for (int j = k; j <= deg; ++j) {
      const double cj = binom(deg, j);
      for (int i = 0; i <= deg - j; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        coeff[static_cast<std::size_t>(j + i)] += cj * binom(deg - j, i) * sign;
      }
    }
    return coeff;
  }

 private:
  double step(double tau) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * tau + coeffs_[i];
    return acc;
  }
  double integral(double tau) const {
    double acc = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;)
      acc = acc * tau + coeffs_[i] / static_cast<double>(i + 1);
    return acc * tau;
  }

  EndpointData left_;
  EndpointData right_;
  int order_;
  double width_;
  double plateau_ = 0.0;
  std::vector<double> coeffs_;
};

namespace detail {
inline bool same_direction(double a, double b) {
  return a == 0.0 || b == 0.0 || (a > 0) == (b > 0);
}
}  // namespace detail

/// Builds a strictly monotone C^order segment joining `left` to `right` and
/// matching both values and slopes. The ramp width defaults to a quarter of
/// the segment and is halved until the plateau slope agrees in sign with the
/// endpoint slopes; failing that there is no monotone fill of this shape.
inline MonotoneSegment interpolate_smooth_decreasing(EndpointData left,
                                                     EndpointData right,
                                                     int order = 2,
                                                     double ramp_width = -1.0) {
  detail::require(std::isfinite(left.t) && std::isfinite(right.t) &&
                      right.t > left.t,
                  "segment endpoints must satisfy t_left < t_right");
  detail::require(order >= 1 && order <= 8, "smoothness order out of range");
  const double len = right.t - left.t;
  const double delta = right.value - left.value;
  if (delta == 0.0) {
    detail::require(left.slope == 0.0 && right.slope == 0.0,
                    "no monotone interpolant: equal values with nonzero slope");
    return MonotoneSegment(left, right, order, 0.25 * len);
  }
  if (!detail::same_direction(delta, left.slope) ||
      !detail::same_direction(delta, right.slope))
    throw PreconditionError(
        "no monotone interpolant: endpoint slopes oppose the value change");
  double w = ramp_width > 0 ? std::min(ramp_width, 0.5 * len) : 0.25 * len;
  for (int attempt = 0; attempt < 60; ++attempt, w *= 0.5) {
    MonotoneSegment seg(left, right, order, w);
    const double m = seg.plateau_slope();
    if (m != 0.0 && detail::same_direction(delta, m)) return seg;
  }
  throw PreconditionError("no monotone interpolant for the supplied slopes");
}

}  // namespace extremal
