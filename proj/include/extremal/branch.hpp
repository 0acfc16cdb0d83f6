#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/grid.hpp"
#include "extremal/ode.hpp"
#include "extremal/profile.hpp"
#include "extremal/radial_ops.hpp"
#include "extremal/reconstruction.hpp"

namespace extremal {

/// A nonlinearity f with its derivative: analytic, or backed by a table.
class Nonlinearity {
 public:
  using Fn = std::function<double(double)>;

  struct Properties {
    bool positive = true;
    bool monotone = true;
    bool convex = true;
    bool superlinear = true;
  };

  Nonlinearity(std::string tag, Fn f, Fn fprime, Properties props)
      : tag_(std::move(tag)), f_(std::move(f)), fp_(std::move(fprime)), props_(props) {}

  /// scale * e^{rate s}.
  static Nonlinearity exponential(double scale = 1.0, double rate = 1.0) {
    detail::require(scale > 0 && rate > 0, "exponential needs positive scale and rate");
    return {"exp", [=](double s) { return scale * std::exp(rate * s); },
            [=](double s) { return scale * rate * std::exp(rate * s); }, {}};
  }
  /// f ≡ c: torsion.
  static Nonlinearity constant(double c) {
    detail::require(c > 0, "constant nonlinearity must be positive");
    return {"constant", [=](double) { return c; }, [](double) { return 0.0; },
            {true, true, true, false}};
  }
  static Nonlinearity from_table(std::shared_ptr<const NonlinearityTable> table) {
    detail::require(table != nullptr, "null table");
    const AuditReport& a = table->audit();
    Nonlinearity out("table:" + table->provenance().tag,
                     [table](double s) { return table->value(s); },
                     [table](double s) { return table->derivative(s); },
                     {a.positive, a.monotone, a.convex, a.superlinear});
    out.table_ = std::move(table);
    return out;
  }

  double operator()(double s) const { return f_(s); }
  double derivative(double s) const { return fp_(s); }
  const std::string& tag() const { return tag_; }
  const Properties& properties() const { return props_; }
  const NonlinearityTable* table() const { return table_.get(); }
  /// True when f(s) lies past the end of the backing table.
  bool extrapolated(double s) const { return table_ && table_->is_extrapolated(s); }

 private:
  std::string tag_;
  Fn f_;
  Fn fp_;
  Properties props_;
  std::shared_ptr<const NonlinearityTable> table_;
};

struct ShootOptions {
  ode::Options ode{};
  /// Start radius: min(start_radius, start_fraction * natural length scale).
  double start_radius = 1e-6;
  double start_fraction = 1e-4;
  /// |v(R)| <= root_tol * m after polishing.
  double root_tol = 1e-10;
  double radius_cap = 1e12;
};

struct ShootResult {
  double m = 0.0;
  double R = 0.0;
  double lambda = 0.0;
  double start_radius = 0.0;
  double residual = 0.0;  // |v(R)| after polishing
  bool extrapolated = false;
  std::optional<RadialProfile> profile;  // u(x) = v(R x) on the unit ball
};

namespace detail {

struct ShootState {
  double t;
  ode::State<2> y;  // v and r v'
};

inline double start_radius(const Nonlinearity& f, double m, int dim,
                           const ShootOptions& opts) {
  const double fm = f(m);
  double scale = std::sqrt(2.0 * dim * m / fm);
  const double fpm = f.derivative(m);
  if (fpm > 0) scale = std::min(scale, std::sqrt(2.0 * dim / fpm));
  return std::min(opts.start_radius, opts.start_fraction * scale);
}

}  // namespace detail

/// -Δv = f(v), v(0) = m, v'(0) = 0, integrated in t = log r until v = 0.
/// R is the first zero and λ = R² by the scaling u(x) = v(R x).
inline ShootResult shoot_ivp(const Nonlinearity& f, double m, int dim,
                             const ShootOptions& opts = {},
                             std::optional<double> profile_points_per_unit_t =
                                 std::nullopt) {
  detail::require(std::isfinite(m) && m > 0, "interior value m must be positive");
  detail::require(dim >= 2, "dimension must be at least 2");
  const double fm = f(m);
  if (!(fm > 0))
    throw PreconditionError("f(m) = " + std::to_string(fm) + " is not positive");

  const double nm2 = dim - 2.0;
  auto rhs = [&](double t, const ode::State<2>& y) -> ode::State<2> {
    return {y[1], -nm2 * y[1] - std::exp(2.0 * t) * f(y[0])};
  };
  const auto stepper = ode::make_stepper<2>(rhs, opts.ode);

  ShootResult res;
  res.m = m;
  res.extrapolated = f.extrapolated(m);
  const double r0 = detail::start_radius(f, m, dim, opts);
  res.start_radius = r0;
  const double t0 = std::log(r0);
  const ode::State<2> y0{m - fm * r0 * r0 / (2.0 * dim), -fm * r0 * r0 / dim};

  const double t_cap = std::log(opts.radius_cap);
  detail::ShootState cur{t0, y0};
  double h = 0.05;
  std::size_t steps = 0;
  std::optional<double> t_root;
  while (!t_root) {
    if (cur.t > t_cap)
      throw SolverError("no zero of v before radius " +
                        std::to_string(opts.radius_cap) + " (m = " +
                        std::to_string(m) + ")");
    if (++steps > opts.ode.max_steps) throw SolverError("shooting exceeded the step budget");
    const auto tr = stepper.trial(cur.t, cur.y, h);
    if (!(tr.error <= 1.0)) {
      h *= stepper.factor(tr.error);
      if (h < opts.ode.h_min * std::max(1.0, std::abs(cur.t)))
        throw SolverError("shooting step size underflow near r = " +
                          std::to_string(std::exp(cur.t)));
      continue;
    }
    if (tr.y[0] > 0.0) {
      cur = {cur.t + h, tr.y};
      h *= stepper.factor(tr.error);
      continue;
    }
    // Zero inside (cur.t, cur.t + h]: Newton on the sub-step, kept in a bracket.
    double lo = 0.0, hi = h;
    double x = h * cur.y[0] / (cur.y[0] - tr.y[0]);
    for (int it = 0; it < 200; ++it) {
      const auto y = stepper.trial(cur.t, cur.y, x).y;
      if (std::abs(y[0]) <= opts.root_tol * m) {
        res.residual = std::abs(y[0]);
        t_root = cur.t + x;
        break;
      }
      (y[0] > 0 ? lo : hi) = x;
      double next = x - y[0] / y[1];
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (hi - lo <= 1e-15 * std::max(1.0, std::abs(cur.t))) {
        res.residual = std::abs(y[0]);
        t_root = cur.t + x;
        break;
      }
      x = next;
    }
    if (!t_root) throw SolverError("root polish for the first zero did not converge");
  }
  res.R = std::exp(*t_root);
  res.lambda = res.R * res.R;

  if (profile_points_per_unit_t) {
    detail::require(dim >= 3, "profiles need N >= 3");
    const double shift = *t_root;
    const auto grid =
        make_log_grid(dim, t0 - shift, *profile_points_per_unit_t, {});
    std::vector<double> v(grid.size()), d(grid.size());
    ode::State<2> y = y0;
    double hh = 0.05;
    double t = t0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double target = i + 1 == grid.size() ? shift : grid[i] + shift;
      if (i > 0) y = stepper.advance(t, y, target, hh);
      t = target;
      v[i] = y[0];
      d[i] = y[1];
    }
    res.profile.emplace(grid, std::move(v), std::move(d));
  }
  return res;
}

/// max over interior nodes of |-Δu - λ f(u)| / (λ f(u)) for a shooting profile.
inline double branch_residual(const Nonlinearity& f, const ShootResult& r) {
  detail::require(r.profile.has_value(), "shooting result carries no profile");
  const auto lap = radial_laplacian(*r.profile);
  double worst = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const double rhs = r.lambda * f(r.profile->value(i));
    worst = std::max(worst, std::abs(lap.value(i) - rhs) / rhs);
  }
  return worst;
}

struct BranchPoint {
  double m;
  double R;
  double lambda;
};

struct BranchOptions {
  ShootOptions shoot{};
  bool refine = true;
  /// Golden-section refinement stops once the λ spread inside the bracket is
  /// below this relative amount.
  double refine_rtol = 1e-4;
  /// λ differences below this relative size are treated as shooting noise
  /// by the monotone flag and the local-maximum count.
  double shape_rtol = 1e-8;
  /// Allow f without superlinear growth; λ* may then be unbounded.
  bool waive_superlinear = false;
};

/// λ(m) over an m-grid with the λ* estimate.
struct BranchDiagram {
  std::vector<BranchPoint> points;
  double lambda_star_estimate = 0.0;
  double m_at_max = 0.0;
  bool monotone = true;
  /// False when λ is still climbing at the end of the range for f without
  /// superlinear growth: "no finite λ*".
  bool finite_lambda_star = true;
  std::size_t interior_maxima = 0;
  /// d log λ / d log m over the last two points.
  double tail_slope = 0.0;
  bool extrapolated = false;
};

namespace detail {

// Changes of λ below `tol` (relative) count as level for the shape flags.
inline void summarize(BranchDiagram& d, bool superlinear, double tol) {
  const auto& p = d.points;
  std::size_t k = 0;
  for (std::size_t j = 1; j < p.size(); ++j)
    if (p[j].lambda > p[k].lambda) k = j;
  d.lambda_star_estimate = p[k].lambda;
  d.m_at_max = p[k].m;
  d.monotone = true;
  d.interior_maxima = 0;
  for (std::size_t j = 1; j < p.size(); ++j) {
    const double slack = tol * p[j].lambda;
    if (p[j].lambda < p[j - 1].lambda - slack) d.monotone = false;
    if (j + 1 < p.size() && p[j].lambda > p[j - 1].lambda + slack &&
        p[j].lambda > p[j + 1].lambda + slack)
      ++d.interior_maxima;
  }
  if (p.size() >= 2) {
    const auto& a = p[p.size() - 2];
    const auto& b = p.back();
    d.tail_slope = std::log(b.lambda / a.lambda) / std::log(b.m / a.m);
  }
  d.finite_lambda_star = superlinear || k + 1 < p.size();
}

}  // namespace detail

inline BranchDiagram minimal_branch(const Nonlinearity& f, int dim,
                                    std::vector<double> m_grid,
                                    const BranchOptions& opts = {}) {
  detail::require(!m_grid.empty(), "m-grid is empty");
  for (std::size_t j = 0; j < m_grid.size(); ++j) {
    detail::require(std::isfinite(m_grid[j]) && m_grid[j] > 0, "m-grid values must be positive");
    if (j > 0) detail::require(m_grid[j] > m_grid[j - 1], "m-grid must increase strictly");
  }
  const auto& props = f.properties();
  if (!props.positive || !props.monotone || !props.convex)
    throw PreconditionError("f fails condition (1) (positive, nondecreasing, convex)");
  if (!props.superlinear && !opts.waive_superlinear)
    throw PreconditionError("f is not superlinear; set waive_superlinear to continue");

  BranchDiagram d;
  auto shoot = [&](double m) {
    const auto r = shoot_ivp(f, m, dim, opts.shoot);
    d.extrapolated = d.extrapolated || r.extrapolated;
    return BranchPoint{m, r.R, r.lambda};
  };
  for (double m : m_grid) d.points.push_back(shoot(m));
  detail::summarize(d, props.superlinear, opts.shape_rtol);

  std::size_t k = 0;
  for (std::size_t j = 1; j < d.points.size(); ++j)
    if (d.points[j].lambda > d.points[k].lambda) k = j;
  if (opts.refine && k > 0 && k + 1 < d.points.size()) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = d.points[k - 1].m, b = d.points[k + 1].m;
    double c = b - inv_phi * (b - a), e = a + inv_phi * (b - a);
    BranchPoint pc = shoot(c), pe = shoot(e);
    std::vector<BranchPoint> extra{pc, pe};
    for (int it = 0; it < 200; ++it) {
      if (std::abs(pc.lambda - pe.lambda) <=
          opts.refine_rtol * std::max(pc.lambda, pe.lambda))
        break;
      if (pc.lambda > pe.lambda) {
        b = e;
        e = c;
        pe = pc;
        c = b - inv_phi * (b - a);
        pc = shoot(c);
        extra.push_back(pc);
      } else {
        a = c;
        c = e;
        pc = pe;
        e = a + inv_phi * (b - a);
        pe = shoot(e);
        extra.push_back(pe);
      }
    }
    for (const auto& p : extra) d.points.push_back(p);
    std::sort(d.points.begin(), d.points.end(),
              [](const BranchPoint& x, const BranchPoint& y) { return x.m < y.m; });
    d.points.erase(std::unique(d.points.begin(), d.points.end(),
                               [](const BranchPoint& x, const BranchPoint& y) {
                                 return x.m == y.m;
                               }),
                   d.points.end());
    detail::summarize(d, props.superlinear, opts.shape_rtol);
  }
  return d;
}

/// m-grid with `count` points spaced evenly on [lo, hi].
inline std::vector<double> linear_m_grid(double lo, double hi, std::size_t count) {
  detail::require(count >= 2 && lo > 0 && hi > lo, "bad m-grid request");
  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j)
    out[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  out.back() = hi;
  return out;
}

/// The minimal solution for a given λ: the smallest m on the diagram with
/// λ(m) = λ, located by bisection, with its profile.
inline ShootResult minimal_solution(const Nonlinearity& f, int dim, double lambda,
                                    const BranchDiagram& d,
                                    std::optional<double> profile_points_per_unit_t = 100.0,
                                    const ShootOptions& opts = {}) {
  detail::require(lambda > 0 && lambda < d.lambda_star_estimate,
                  "λ must lie in (0, λ*)");
  std::size_t j = 0;
  while (d.points[j].lambda < lambda) ++j;
  double lo = j == 0 ? 0.0 : d.points[j - 1].m;
  double hi = d.points[j].m;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot_ivp(f, mid, dim, opts).lambda < lambda ? lo : hi) = mid;
  }
  return shoot_ivp(f, hi, dim, opts, profile_points_per_unit_t);
}

/// For f reconstructed from Ψ the extremal solution is the construction's own
/// u, with λ* = 1.
inline const RadialProfile& extremal_profile(const NonlinearityTable& table) {
  const auto& u = table.provenance().u;
  if (!u) throw PreconditionError("table has no generating profile (provenance missing)");
  return *u;
}

}  // namespace extremal
