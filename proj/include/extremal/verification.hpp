#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "extremal/branch.hpp"
#include "extremal/error.hpp"
#include "extremal/grid.hpp"
#include "extremal/linear_ode.hpp"
#include "extremal/ode.hpp"
#include "extremal/potentials.hpp"
#include "extremal/profile.hpp"
#include "extremal/quadrature.hpp"

namespace extremal {

// ---------------------------------------------------------------------------
// First Dirichlet eigenvalue of the unit ball

struct EigenOptions {
  ode::Options ode{};
  double rtol = 1e-12;
  /// Sample count of the returned eigenfunction on [0, 1].
  std::size_t samples = 201;
};

struct Eigenpair {
  double lambda = 0.0;
  std::vector<double> r;
  std::vector<double> phi;  // φ(0) = 1, positive on [0, 1)
};

namespace detail {

inline constexpr double kEigenStart = 1e-3;

// φ'' + (N-1)/r φ' + λφ = 0 from the series start, sampled at r-nodes.
inline std::vector<double> radial_helmholtz(int dim, double lambda,
                                            const std::vector<double>& nodes,
                                            const ode::Options& opts) {
  const double n = dim;
  const double r0 = kEigenStart;
  auto rhs = [&](double r, const ode::State<2>& y) -> ode::State<2> {
    return {y[1], -(n - 1.0) / r * y[1] - lambda * y[0]};
  };
  const auto stepper = ode::make_stepper<2>(rhs, opts);
  const double q = lambda * r0 * r0;
  ode::State<2> y{1.0 - q / (2 * n) + q * q / (8 * n * (n + 2)),
                  -lambda * r0 / n + lambda * q * r0 / (2 * n * (n + 2))};
  std::vector<double> out(nodes.size());
  double r = r0, h = 1e-3;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] <= r0) {
      const double qk = lambda * nodes[k] * nodes[k];
      out[k] = 1.0 - qk / (2 * n) + qk * qk / (8 * n * (n + 2));
      continue;
    }
    y = stepper.advance(r, y, nodes[k], h);
    r = nodes[k];
    out[k] = y[0];
  }
  return out;
}

}  // namespace detail

/// λ₁ of -Δ on the unit ball in R^N with its radial eigenfunction, by
/// shooting from the centre and bisection on [0, 4N²].
inline Eigenpair first_eigenvalue(int dim, const EigenOptions& opts = {}) {
  detail::require(dim >= 1, "dimension must be at least 1");
  detail::require(opts.samples >= 2, "need at least two eigenfunction samples");
  // Coarse nodes to detect the first sign change; the half-period at
  // λ = 4N² is π/(2N), well above the spacing.
  std::vector<double> probe(400);
  for (std::size_t k = 0; k < probe.size(); ++k)
    probe[k] = static_cast<double>(k + 1) / static_cast<double>(probe.size());
  auto has_zero = [&](double lambda) {
    const auto v = detail::radial_helmholtz(dim, lambda, probe, opts.ode);
    return std::any_of(v.begin(), v.end(), [](double x) { return x <= 0.0; });
  };
  double lo = 0.0, hi = 4.0 * dim * dim;
  if (!has_zero(hi)) throw SolverError("no eigenvalue below 4N^2");
  while (hi - lo > opts.rtol * hi) {
    const double mid = 0.5 * (lo + hi);
    (has_zero(mid) ? hi : lo) = mid;
  }
  Eigenpair e;
  e.lambda = 0.5 * (lo + hi);
  e.r.resize(opts.samples);
  for (std::size_t k = 0; k < opts.samples; ++k)
    e.r[k] = static_cast<double>(k) / static_cast<double>(opts.samples - 1);
  e.phi = detail::radial_helmholtz(dim, e.lambda, e.r, opts.ode);
  e.phi.back() = 0.0;
  return e;
}

// ---------------------------------------------------------------------------
// Two-sided bound on r² λ* f'(u*)

/// r² f'(u*(r)) at grid nodes, with the two one-sided values where it jumps.
struct LevelSamples {
  std::vector<double> t;
  std::vector<double> below;
  std::vector<double> above;
  double lo(std::size_t i) const { return std::min(below[i], above[i]); }
  double hi(std::size_t i) const { return std::max(below[i], above[i]); }
};

/// For f reconstructed from Ψ, r² f'(u*) = r² Ψ = c(t).
inline LevelSamples levels_from_potential(const PotentialSpec& psi,
                                          const LogRadialGrid& grid) {
  LevelSamples s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s.t.push_back(grid[i]);
    s.below.push_back(psi.level(grid[i], Side::Below));
    s.above.push_back(psi.level(grid[i], Side::Above));
  }
  return s;
}

/// r² f'(u*(r)) from a nonlinearity and the singular profile u*.
inline LevelSamples levels_from_solution(const Nonlinearity& f,
                                         const RadialProfile& u) {
  LevelSamples s;
  const auto& g = u.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::exp(2.0 * g[i]) * f.derivative(u.value(i));
    s.t.push_back(g[i]);
    s.below.push_back(v);
    s.above.push_back(v);
  }
  return s;
}

struct BoundOptions {
  double window = 5.0;
  /// Windows are [-k w - w, -k w] for k = 0, 1, ...; only windows lying
  /// entirely below `depth` enter the lower-bound check.
  double depth = 0.0;
  double tolerance = 1e-6;
  std::optional<double> lambda1;  // computed when absent
  double min_depth = -10.0;
};

struct WindowExtrema {
  double t0;
  double t1;
  double sup;
  double inf;
};

struct Check {
  bool passed = false;
  double margin = 0.0;  // >= 0 when passed
};

struct VerificationReport {
  std::string case_id;
  int dim = 0;
  double lambda_star = 0.0;
  double lower_constant = 0.0;  // 2(N-2)
  double upper_constant = 0.0;  // λ₁
  double hardy_constant = 0.0;  // (N-2)²/4
  double window = 0.0;
  double depth = 0.0;
  double t_min = 0.0;
  std::size_t nodes = 0;
  std::vector<WindowExtrema> windows;
  Check pointwise_upper;  // c* <= λ₁ at every node
  Check windowed_lower;   // sup over each window >= 2(N-2) - tol
  double max_level = 0.0;
  bool passed() const { return pointwise_upper.passed && windowed_lower.passed; }
};

/// Checks λ* r² f'(u*) against 2(N-2) from below (per window, as a limsup
/// proxy) and against λ₁ pointwise.
inline VerificationReport bound_check(const LevelSamples& levels, double lambda_star,
                                      int dim, const BoundOptions& opts = {},
                                      std::string case_id = {}) {
  detail::require(lambda_star > 0, "λ* must be positive");
  detail::require(opts.window > 0, "window width must be positive");
  const std::size_t n = levels.t.size();
  detail::require(n >= 2 && levels.below.size() == n && levels.above.size() == n,
                  "level samples are malformed");
  if (!(levels.t.front() <= opts.min_depth))
    throw PreconditionError("grid reaches only t = " + std::to_string(levels.t.front()) +
                            "; bound checks need t_min <= " +
                            std::to_string(opts.min_depth));
  VerificationReport rep;
  rep.case_id = std::move(case_id);
  rep.dim = dim;
  rep.lambda_star = lambda_star;
  rep.lower_constant = 2.0 * (dim - 2.0);
  rep.upper_constant = opts.lambda1 ? *opts.lambda1 : first_eigenvalue(dim).lambda;
  rep.hardy_constant = (dim - 2.0) * (dim - 2.0) / 4.0;
  rep.window = opts.window;
  rep.depth = opts.depth;
  rep.t_min = levels.t.front();
  rep.nodes = n;

  double max_level = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) max_level = std::max(max_level, lambda_star * levels.hi(i));
  rep.max_level = max_level;
  rep.pointwise_upper.margin = rep.upper_constant - max_level;
  rep.pointwise_upper.passed = rep.pointwise_upper.margin >= 0.0;

  double worst = std::numeric_limits<double>::infinity();
  std::size_t i = n;
  for (int k = 0;; ++k) {
    const double t1 = -opts.window * k;
    const double t0 = t1 - opts.window;
    if (t0 < rep.t_min) break;
    WindowExtrema w{t0, t1, -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
    while (i > 0 && levels.t[i - 1] >= t0) --i;
    for (std::size_t j = i; j < n && levels.t[j] <= t1; ++j) {
      w.sup = std::max(w.sup, lambda_star * levels.hi(j));
      w.inf = std::min(w.inf, lambda_star * levels.lo(j));
    }
    rep.windows.push_back(w);
    if (t1 <= opts.depth) worst = std::min(worst, w.sup - rep.lower_constant);
  }
  detail::require(std::isfinite(worst), "no complete window below the requested depth");
  rep.windowed_lower.margin = worst;
  rep.windowed_lower.passed = worst >= -opts.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Integral lower bound for window potentials

struct WindowIntegral {
  double numeric = 0.0;
  double bound = 0.0;
  double intermediate = 0.0;
};

/// ∫₀¹ ω[A, B] dr for B = s, A = s e^{-1/s³}, from the closed form, against
/// N(N-4)/(s((N-2)² + 2(N-2)s^N)) and N(N-4)B² log(B/A)/((N-2)² + 2(N-2)B^N).
inline WindowIntegral window_integral_bound(double s, int dim,
                                            double points_per_unit_t = 100.0) {
  detail::require(s > 0 && s <= 1, "scale must lie in (0, 1]");
  detail::require(dim >= 10, "window bound needs N >= 10");
  const double log_a = std::log(s) - 1.0 / (s * s * s);
  const double a = std::exp(log_a);
  if (!(a > std::numeric_limits<double>::min()))
    throw PreconditionError("A = s e^{-1/s^3} is not representable for s = " +
                            std::to_string(s));
  const double n = dim;
  const double b = s;
  const double denom = (n - 2) * (n - 2) + 2 * (n - 2) * std::pow(b, n);
  WindowIntegral out;
  out.bound = n * (n - 4) / (s * denom);
  out.intermediate = n * (n - 4) * b * b * (-log_a + std::log(b)) / denom;

  const auto k = detail::window_coefficients(a, b, dim);
  double total = 0.5 * k.inner * a * a;
  std::vector<double> bps{std::log(b)};
  if (bps[0] == 0.0) bps.clear();
  const auto grid = make_log_grid(dim, log_a, points_per_unit_t, bps);
  QuadratureOptions q;
  q.rtol = 1e-12;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    total += integrate_r([&](double r) { return closed_form_window(a, b, dim, r); },
                         grid[i], grid[i + 1], q);
  out.numeric = total;
  return out;
}

// ---------------------------------------------------------------------------
// Stability quadratic form

enum class RayleighWeight {
  Volume,  // ∫ ξ² r^{N-1} dr
  Hardy,   // ∫ ξ² r^{N-3} dr
};

struct StabilityOptions {
  RayleighWeight weight = RayleighWeight::Volume;
  double rtol = 1e-10;
};

struct StabilityReport {
  double min_quotient = 0.0;
  std::size_t basis_size = 0;
  std::size_t bisection_steps = 0;
};

namespace detail {

// Negative pivots of the symmetric tridiagonal K - μM: the number of
// generalized eigenvalues below μ.
inline std::size_t count_below(const std::vector<double>& kd, const std::vector<double>& ko,
                               const std::vector<double>& md, const std::vector<double>& mo,
                               double mu) {
  std::size_t neg = 0;
  double pivot = 1.0;
  for (std::size_t i = 0; i < kd.size(); ++i) {
    const double off = i == 0 ? 0.0 : ko[i - 1] - mu * mo[i - 1];
    double p = (kd[i] - mu * md[i]) - (i == 0 ? 0.0 : off * off / pivot);
    if (p == 0.0) p = -std::numeric_limits<double>::min();
    if (p < 0) ++neg;
    pivot = p;
  }
  return neg;
}

}  // namespace detail

/// min over hat functions in t (vanishing at both grid ends) of
/// Q(ξ)/∫ξ² w, Q(ξ) = ∫ (ξ'² - c(t) ξ²/r²) r^{N-1} dr.
///
/// The basis is rescaled by e^{-N t_i/2} so that entries stay in double range
/// on deep grids; the generalized eigenvalues do not change.
inline StabilityReport stability_quadratic_form(
    const std::function<double(double, Side)>& level, const LogRadialGrid& grid,
    const StabilityOptions& opts = {}) {
  const std::size_t n = grid.size();
  detail::require(n >= 3, "need at least one interior node");
  const double dim = grid.dim();
  const double mass_power = opts.weight == RayleighWeight::Volume ? dim : dim - 2.0;
  detail::require(grid.t_min() * (dim - 2.0) / 2.0 > -600.0,
                  "grid too deep for the quadratic form (t_min too negative)");
  const std::size_t m = n - 2;
  std::vector<double> kd(m, 0.0), ko(m > 0 ? m - 1 : 0, 0.0), md(m, 0.0),
      mo(m > 0 ? m - 1 : 0, 0.0);
  QuadratureOptions q;
  q.rtol = 1e-12;
  q.atol = 0.0;
  auto shift = [&](std::size_t node) { return 0.5 * dim * grid[node]; };
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double a = grid[e], b = grid[e + 1], h = b - a;
    // Hats: left node e decreasing, right node e+1 increasing.
    auto left = [&](double t) { return (b - t) / h; };
    auto right = [&](double t) { return (t - a) / h; };
    for (int p = 0; p < 2; ++p) {
      for (int r = p; r < 2; ++r) {
        const std::size_t ip = e + p, ir = e + r;
        if (ip == 0 || ir == 0 || ip == n - 1 || ir == n - 1) continue;
        const double sp = p == 0 ? -1.0 / h : 1.0 / h;
        const double sr = r == 0 ? -1.0 / h : 1.0 / h;
        const double off = shift(ip) + shift(ir);
        auto phi_p = [&](double t) { return p == 0 ? left(t) : right(t); };
        auto phi_r = [&](double t) { return r == 0 ? left(t) : right(t); };
        const double kval = integrate_t(
            [&](double t) {
              const Side side = t <= a ? Side::Above : Side::Below;
              return (sp * sr - level(t, side) * phi_p(t) * phi_r(t)) *
                     std::exp((dim - 2.0) * t - off);
            },
            a, b, q);
        const double mval = integrate_t(
            [&](double t) {
              return phi_p(t) * phi_r(t) * std::exp(mass_power * t - off);
            },
            a, b, q);
        if (p == r) {
          kd[ip - 1] += kval;
          md[ip - 1] += mval;
        } else {
          ko[ip - 1] += kval;
          mo[ip - 1] += mval;
        }
      }
    }
  }
  // Mass must be positive definite: K - μM with K = 0 reduces to inertia of -μM.
  {
    const std::vector<double> zd(m, 0.0), zo(ko.size(), 0.0);
    if (detail::count_below(zd, zo, md, mo, -1.0) != 0)
      throw PreconditionError("mass matrix is not positive definite (grid defect)");
  }
  StabilityReport rep;
  rep.basis_size = m;
  double lo = -1.0, hi = 1.0;
  while (detail::count_below(kd, ko, md, mo, lo) > 0) lo *= 2.0;
  while (detail::count_below(kd, ko, md, mo, hi) == 0) hi *= 2.0;
  while (hi - lo > opts.rtol * std::max(1.0, std::abs(hi)) && rep.bisection_steps < 400) {
    const double mid = 0.5 * (lo + hi);
    (detail::count_below(kd, ko, md, mo, mid) > 0 ? hi : lo) = mid;
    ++rep.bisection_steps;
  }
  rep.min_quotient = 0.5 * (lo + hi);
  return rep;
}

inline StabilityReport stability_quadratic_form(const PotentialSpec& psi,
                                                const LogRadialGrid& grid,
                                                const StabilityOptions& opts = {}) {
  detail::require(psi.dim() == grid.dim(), "potential and grid dimensions differ");
  check_admissible(psi, grid);
  return stability_quadratic_form(
      [&](double t, Side side) { return psi.level(t, side); }, grid, opts);
}

/// Linearized operator at a solution u of -Δu = λ f(u): c(t) = λ r² f'(u).
inline StabilityReport stability_at_solution(const Nonlinearity& f, double lambda,
                                             const RadialProfile& u,
                                             const StabilityOptions& opts = {}) {
  return stability_quadratic_form(
      [&](double t, Side) { return lambda * std::exp(2.0 * t) * f.derivative(u(t)); },
      u.grid(), opts);
}

/// Q(ξ) = ∫ (ξ'² - c ξ²/r²) r^{N-1} dr for one test function of r, over
/// [e^{t_min}, 1] with the potential's breakpoints as panel edges.
template <class Xi, class DXi>
double quadratic_form_value(const PotentialSpec& psi, Xi&& xi, DXi&& dxi,
                            double t_min = -40.0) {
  std::vector<double> edges{t_min};
  for (double b : psi.breakpoints())
    if (b > t_min) edges.push_back(b);
  edges.push_back(0.0);
  const double n = psi.dim();
  QuadratureOptions q;
  q.rtol = 1e-12;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    total += integrate_t(
        [&, a = edges[k]](double t) {
          const double r = std::exp(t);
          const double v = xi(r), d = dxi(r);
          const Side side = t <= a ? Side::Above : Side::Below;
          return (d * d * r * r - psi.level(t, side) * v * v) *
                 std::exp((n - 2.0) * t);
        },
        edges[k], edges[k + 1], q);
  return total;
}

}  // namespace extremal
