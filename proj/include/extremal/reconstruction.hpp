#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/linear_ode.hpp"
#include "extremal/potentials.hpp"
#include "extremal/profile.hpp"
#include "extremal/radial_ops.hpp"
#include "extremal/scaled.hpp"

namespace extremal {

struct AuditOptions {
  double rtol = 1e-8;
  /// Superlinearity marker: f'(s_max) > multiple * f(s_max)/s_max, and f(s)/s
  /// nondecreasing on the top tenth [0.9 s_max, s_max].
  double superlinear_multiple = 1.0;
};

/// Condition (1) audit: f(0) > 0, nondecreasing, convex, superlinear.
struct AuditReport {
  bool positive = false;
  bool monotone = false;
  bool convex = false;
  bool superlinear = false;
  std::optional<std::size_t> first_violation;
  std::string failing_flag;
  double growth_ratio = 0.0;  // f'(s_max) s_max / f(s_max)

  bool passed() const { return positive && monotone && convex && superlinear; }
};

/// Where a table came from.
struct Provenance {
  std::string tag;
  std::shared_ptr<const PotentialSpec> potential;
  std::shared_ptr<const RadialProfile> omega;
  std::shared_ptr<const RadialProfile> u;
};

/// Samples (s_j, f_j, f'_j, f''_j) with s_0 = 0 < s_1 < ... = s_max.
///
/// Values are kept as Scaled because f grows like e^{-2t} on deep grids.
/// Between samples log f is a monotone cubic in s; beyond s_max it continues
/// along the last segment's exponential fit, but only when extrapolation has
/// been enabled.
class NonlinearityTable {
 public:
  NonlinearityTable(std::vector<double> s, std::vector<Scaled> f,
                    std::vector<Scaled> fp, std::vector<Scaled> fpp,
                    std::vector<double> t, Provenance prov)
      : s_(std::move(s)),
        f_(std::move(f)),
        fp_(std::move(fp)),
        fpp_(std::move(fpp)),
        t_(std::move(t)),
        prov_(std::move(prov)) {
    const std::size_t n = s_.size();
    detail::require(n >= 2, "table needs at least two samples");
    detail::require(f_.size() == n && fp_.size() == n && fpp_.size() == n &&
                        (t_.empty() || t_.size() == n),
                    "table columns differ in length");
    detail::require(s_[0] == 0.0, "table must start at s = 0");
    for (std::size_t j = 1; j < n; ++j)
      detail::require(s_[j] > s_[j - 1], "table s-values must increase (index " +
                                             std::to_string(j) + ")");
    build_interpolant();
  }

  std::size_t size() const { return s_.size(); }
  double s(std::size_t j) const { return s_[j]; }
  const Scaled& f(std::size_t j) const { return f_[j]; }
  const Scaled& fprime(std::size_t j) const { return fp_[j]; }
  const Scaled& fsecond(std::size_t j) const { return fpp_[j]; }
  /// Generating log-radius of sample j (empty for analytic tables).
  std::optional<double> t(std::size_t j) const {
    if (t_.empty()) return std::nullopt;
    return t_[j];
  }
  double s_max() const { return s_.back(); }
  const Provenance& provenance() const { return prov_; }
  const AuditReport& audit() const { return audit_; }
  void set_audit(AuditReport a) { audit_ = std::move(a); }

  bool extrapolation_enabled() const { return extrapolate_; }
  void enable_extrapolation(bool on = true) { extrapolate_ = on; }
  bool is_extrapolated(double s) const { return s > s_max(); }

  /// log f(s). Below 0 the first segment's exponential continues (shooting
  /// overshoot); above s_max only with extrapolation enabled.
  double log_value(double s) const {
    if (s > s_max()) {
      if (!extrapolate_)
        throw PreconditionError("f evaluated at s = " + std::to_string(s) +
                                " beyond the table end " +
                                std::to_string(s_max()) +
                                " with extrapolation disabled");
      const std::size_t n = s_.size();
      return logf_[n - 1] + tail_rate_ * (s - s_[n - 1]);
    }
    if (s <= 0.0) return logf_[0] + head_rate_ * s;
    const std::size_t j = segment(s);
    const double h = s_[j + 1] - s_[j];
    const double x = (s - s_[j]) / h;
    const double x2 = x * x;
    const double x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * logf_[j] + (x3 - 2 * x2 + x) * h * dlog_[j] +
           (-2 * x3 + 3 * x2) * logf_[j + 1] + (x3 - x2) * h * dlog_[j + 1];
  }
  double value(double s) const { return std::exp(log_value(s)); }
  double operator()(double s) const { return value(s); }

  /// d log f/ds of the interpolant.
  double log_slope(double s) const {
    if (s > s_max()) {
      (void)log_value(s);  // extrapolation guard
      return tail_rate_;
    }
    if (s < 0.0) return head_rate_;
    const std::size_t j = segment(s);
    const double h = s_[j + 1] - s_[j];
    const double x = (s - s_[j]) / h;
    const double x2 = x * x;
    return ((6 * x2 - 6 * x) * (logf_[j] - logf_[j + 1])) / h +
           (3 * x2 - 4 * x + 1) * dlog_[j] + (3 * x2 - 2 * x) * dlog_[j + 1];
  }
  double derivative(double s) const { return value(s) * log_slope(s); }

 private:
  std::size_t segment(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t j = static_cast<std::size_t>(it - s_.begin());
    j = j == 0 ? 0 : j - 1;
    return std::min(j, s_.size() - 2);
  }

  void build_interpolant() {
    const std::size_t n = s_.size();
    logf_.resize(n);
    dlog_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      logf_[j] = f_[j].log_abs();
      dlog_[j] = f_[j].is_zero() ? 0.0 : (fp_[j] / f_[j]).value();
    }
    // Fritsch–Carlson limiter keeps each cubic monotone.
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double sec = (logf_[j + 1] - logf_[j]) / (s_[j + 1] - s_[j]);
      if (sec == 0.0) {
        dlog_[j] = dlog_[j + 1] = 0.0;
        continue;
      }
      const double a = dlog_[j] / sec;
      const double b = dlog_[j + 1] / sec;
      if (a < 0) dlog_[j] = 0.0;
      if (b < 0) dlog_[j + 1] = 0.0;
      const double mag = a * a + b * b;
      if (mag > 9.0) {
        const double tau = 3.0 / std::sqrt(mag);
        dlog_[j] = tau * a * sec;
        dlog_[j + 1] = tau * b * sec;
      }
    }
    head_rate_ = (logf_[1] - logf_[0]) / (s_[1] - s_[0]);
    tail_rate_ = (logf_[n - 1] - logf_[n - 2]) / (s_[n - 1] - s_[n - 2]);
  }

  std::vector<double> s_;
  std::vector<Scaled> f_;
  std::vector<Scaled> fp_;
  std::vector<Scaled> fpp_;
  std::vector<double> t_;
  Provenance prov_;
  AuditReport audit_;
  bool extrapolate_ = false;
  std::vector<double> logf_;
  std::vector<double> dlog_;
  double head_rate_ = 0.0;
  double tail_rate_ = 0.0;
};

/// Audit of condition (1) on the samples.
inline AuditReport check_condition_one(const NonlinearityTable& table,
                                       const AuditOptions& opts = {}) {
  AuditReport a;
  const std::size_t n = table.size();
  auto violate = [&](std::size_t j, const char* flag) {
    if (!a.first_violation || j < *a.first_violation) {
      a.first_violation = j;
      a.failing_flag = flag;
    }
  };

  a.positive = table.f(0).sign() > 0;
  if (!a.positive) violate(0, "positive");

  a.monotone = true;
  for (std::size_t j = 0; j < n; ++j) {
    const bool slope_ok = table.fprime(j).sign() >= 0;
    const bool step_ok =
        j == 0 || table.f(j) >= table.f(j - 1) * Scaled(1.0 - opts.rtol);
    if (!slope_ok || !step_ok) {
      a.monotone = false;
      violate(j, "monotone");
      break;
    }
  }

  a.convex = true;
  for (std::size_t j = 0; j < n; ++j) {
    const Scaled floor = -(table.fprime(j) * Scaled(opts.rtol));
    const bool curvature_ok = table.fsecond(j) >= floor;
    const bool slope_growth_ok =
        j == 0 || table.fprime(j) >= table.fprime(j - 1) * Scaled(1.0 - opts.rtol);
    if (!curvature_ok || !slope_growth_ok) {
      a.convex = false;
      violate(j, "convex");
      break;
    }
  }

  const double s_max = table.s_max();
  const Scaled f_end = table.f(n - 1);
  a.growth_ratio =
      f_end.is_zero() ? 0.0 : (table.fprime(n - 1) * Scaled(s_max) / f_end).value();
  bool ratio_grows = true;
  std::optional<std::size_t> ratio_fail;
  for (std::size_t j = 1; j < n; ++j) {
    if (table.s(j - 1) < 0.9 * s_max) continue;
    const Scaled prev = table.f(j - 1) / Scaled(table.s(j - 1));
    const Scaled cur = table.f(j) / Scaled(table.s(j));
    if (cur < prev * Scaled(1.0 - opts.rtol)) {
      ratio_grows = false;
      ratio_fail = j;
      break;
    }
  }
  a.superlinear = a.growth_ratio > opts.superlinear_multiple && ratio_grows;
  if (!a.superlinear) violate(ratio_fail.value_or(n - 1), "superlinear");
  return a;
}

/// f = (-Δu)∘u^{-1} for u(r) = ∫_r^1 ω, with f' = Ψ∘u^{-1} and
/// f'' = (Ψ'/u')∘u^{-1} taken from the potential directly.
inline NonlinearityTable reconstruct_nonlinearity(const RadialProfile& omega,
                                                  const PotentialSpec& psi,
                                                  const AuditOptions& audit = {}) {
  const LogRadialGrid& grid = omega.grid();
  detail::require(psi.dim() == grid.dim(), "potential and profile dimensions differ");
  detail::require(grid.dim() >= 10, "reconstruction needs N >= 10");
  check_admissible(psi, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(omega.mantissa(i) > 0.0))
      throw PreconditionError(
          "u is not injective: ω is not positive at node " + std::to_string(i));

  auto u = std::make_shared<const RadialProfile>(integrate_inward(omega));
  const std::size_t n = grid.size();
  const double n_minus_1 = grid.dim() - 1.0;

  std::vector<double> s(n), t(n);
  std::vector<Scaled> f(n), fp(n), fpp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = n - 1 - k;  // s ascends as t descends
    const double ti = grid[i];
    const double w = omega.mantissa(i);
    const double ls = omega.log_scale(i);
    s[k] = u->value(i);
    t[k] = ti;
    f[k] = Scaled(omega.mantissa_slope(i) + n_minus_1 * w, ls - ti).normalized();
    // Side::Below: the limit from smaller r, i.e. larger s.
    const double log_c = psi.log_level(ti, Side::Below);
    if (std::isinf(log_c)) {
      fp[k] = Scaled(0.0);
      fpp[k] = Scaled(0.0);
    } else {
      fp[k] = Scaled::from_log(log_c - 2.0 * ti);
      const double dlog = psi.level_log_slope(ti, Side::Below);
      fpp[k] = Scaled((2.0 - dlog) / w, log_c - 3.0 * ti - ls).normalized();
    }
  }
  for (std::size_t k = 1; k < n; ++k)
    if (!(s[k] > s[k - 1]))
      throw PreconditionError(
          "u stops increasing in double precision at t = " + std::to_string(t[k]) +
          " (u = " + std::to_string(s[k]) + "); ω is integrable at the origin, "
          "so use a grid starting above this depth");
  if (!(f[0].sign() > 0))
    throw AuditError("reconstructed f(0) = " + std::to_string(f[0].value()) +
                     " is not positive");
  Provenance prov{psi.tag(), std::make_shared<const PotentialSpec>(psi),
                  std::make_shared<const RadialProfile>(omega), u};
  NonlinearityTable table(std::move(s), std::move(f), std::move(fp),
                          std::move(fpp), std::move(t), std::move(prov));
  table.set_audit(check_condition_one(table, audit));
  return table;
}

/// Solve (P_Ψ) on the grid, then reconstruct.
inline NonlinearityTable reconstruct_nonlinearity(const PotentialSpec& psi,
                                                  const LogRadialGrid& grid,
                                                  const AuditOptions& audit = {}) {
  return reconstruct_nonlinearity(solve_linearized(psi, grid), psi, audit);
}

/// Max over nodes of |f'(u(r)) - Ψ(r)|/Ψ(r), with f' obtained independently
/// from seven-point differences of log f along the grid and u' = -ω. The
/// stored f' column is checked as well.
inline double verify_fprime_equals_psi(const NonlinearityTable& table,
                                       const PotentialSpec& psi,
                                       const RadialProfile& u) {
  const Provenance& prov = table.provenance();
  detail::require(prov.u && prov.omega, "table carries no generating profile");
  detail::require(prov.u->size() == u.size() && prov.u->size() == table.size() &&
                      prov.potential && prov.potential->tag() == psi.tag() &&
                      prov.potential->dim() == psi.dim(),
                  "table provenance does not match the supplied potential/profile");
  const LogRadialGrid& grid = u.grid();
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i)
    detail::require(u.value(i) == table.s(n - 1 - i),
                    "table provenance does not match the supplied profile");
  const RadialProfile& omega = *prov.omega;

  double worst = 0.0;
  for (const auto& [first, last] : grid.segments()) {
    for (std::size_t i = first; i <= last; ++i) {
      if (i == 0 || i + 1 == n) continue;  // no two-sided limit of Ψ at the ends
      const double log_c = psi.log_level(grid[i], Side::Below);
      const double log_c_above = psi.log_level(grid[i], Side::Above);
      if (std::isinf(log_c) || log_c != log_c_above) continue;
      const double log_psi = log_c - 2.0 * grid[i];
      const double dlogf_dt = detail::stencil_derivative(
          grid, i, first, last,
          [&](std::size_t j) { return table.f(n - 1 - j).log_abs(); });
      // f' = (df/dt)/(du/dt) = f (dlogf/dt) / (-ω r).
      const double log_fp = table.f(n - 1 - i).log_abs() + std::log(-dlogf_dt) -
                            (omega.scaled(i).log_abs() + grid[i]);
      worst = std::max(worst, std::abs(std::expm1(log_fp - log_psi)));
      const double stored = table.fprime(n - 1 - i).log_abs();
      worst = std::max(worst, std::abs(std::expm1(stored - log_psi)));
    }
  }
  return worst;
}

/// u(r_min) for a sequence of truncation depths; increasing values with no
/// sign of saturation are the finite-depth trace of ∫_0^1 ω = +∞.
struct DepthTrend {
  std::vector<double> t_min;
  std::vector<double> u_at_rmin;
  bool increasing = false;
};

inline DepthTrend unboundedness_trend(const PotentialSpec& psi,
                                      const std::vector<double>& t_mins,
                                      double points_per_unit_t) {
  DepthTrend d;
  for (double tm : t_mins) {
    const auto g = grid_for(psi, points_per_unit_t, tm);
    const auto u = integrate_inward(solve_linearized(psi, g));
    d.t_min.push_back(tm);
    d.u_at_rmin.push_back(u.value(0));
  }
  d.increasing = true;
  for (std::size_t k = 1; k < d.u_at_rmin.size(); ++k)
    if (!(d.u_at_rmin[k] > d.u_at_rmin[k - 1])) d.increasing = false;
  return d;
}

}  // namespace extremal
