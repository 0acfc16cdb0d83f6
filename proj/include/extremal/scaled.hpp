#pragma once

#include <cmath>
#include <compare>
#include <limits>

namespace extremal {

// Real number held as mantissa * exp(exponent). Profiles on log-radius grids
// span hundreds of thousands of e-folds, far outside double range, so values
// carry their own natural-log offset.
class Scaled {
 public:
  constexpr Scaled() = default;
  constexpr Scaled(double value) : mantissa_(value) {}  // NOLINT(implicit)
  constexpr Scaled(double mantissa, double exponent)
      : mantissa_(mantissa), exponent_(exponent) {}

  static Scaled from_log(double log_abs, int sign = 1) {
    return Scaled(sign < 0 ? -1.0 : 1.0, log_abs);
  }

  constexpr double mantissa() const { return mantissa_; }
  constexpr double exponent() const { return exponent_; }

  int sign() const { return (mantissa_ > 0) - (mantissa_ < 0); }
  bool is_zero() const { return mantissa_ == 0.0; }

  /// log|x|; -inf for zero.
  double log_abs() const {
    if (mantissa_ == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(mantissa_)) + exponent_;
  }

  /// Plain double; overflows to +-inf and underflows to 0 outside range.
  double value() const {
    if (mantissa_ == 0.0) return 0.0;
    if (exponent_ == 0.0) return mantissa_;
    return sign() * std::exp(log_abs());
  }

  Scaled normalized() const {
    if (mantissa_ == 0.0 || !std::isfinite(mantissa_)) return Scaled(mantissa_);
    return Scaled(sign(), log_abs());
  }

  friend Scaled operator*(Scaled a, Scaled b) {
    return Scaled(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_)
        .normalized();
  }
  friend Scaled operator/(Scaled a, Scaled b) {
    return Scaled(a.mantissa_ / b.mantissa_, a.exponent_ - b.exponent_)
        .normalized();
  }
  Scaled operator-() const { return Scaled(-mantissa_, exponent_); }

  friend Scaled operator+(Scaled a, Scaled b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double e = std::max(a.exponent_, b.exponent_);
    return Scaled(a.mantissa_ * std::exp(a.exponent_ - e) +
                      b.mantissa_ * std::exp(b.exponent_ - e),
                  e)
        .normalized();
  }
  friend Scaled operator-(Scaled a, Scaled b) { return a + (-b); }

  friend std::partial_ordering operator<=>(Scaled a, Scaled b) {
    const int sa = a.sign();
    const int sb = b.sign();
    if (sa != sb) return sa <=> sb;
    if (sa == 0) return std::partial_ordering::equivalent;
    const auto mag = a.log_abs() <=> b.log_abs();
    return sa > 0 ? mag : 0 <=> mag;
  }
  friend bool operator==(Scaled a, Scaled b) {
    return (a <=> b) == std::partial_ordering::equivalent;
  }

 private:
  double mantissa_ = 0.0;
  double exponent_ = 0.0;
};

}  // namespace extremal
