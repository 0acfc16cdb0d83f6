#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/potentials.hpp"
#include "extremal/smooth_segment.hpp"

namespace extremal {

/// How the stage gap log(x_n) - log(x_n e^{-1/x_n^3}) is chosen.
enum class GapRule {
  Exact,  // e^{-3 log x_n}
  Fixed,  // constant width in t, for experiments
};

struct OscillationOptions {
  GapRule gap = GapRule::Exact;
  double fixed_gap = 1.0;
  /// y_n = y_fraction * y_max, x_{n+1} = x_fraction * y_n.
  double y_fraction = 0.5;
  double x_fraction = 0.5;
  /// Smoothness order of the joins.
  int order = 2;
};

namespace detail {

inline double stage_gap(double tx, const OscillationOptions& opts) {
  if (opts.gap == GapRule::Fixed) return opts.fixed_gap;
  return std::exp(-3.0 * tx);
}

// log of min(φ, 2(N-2)/r²): capping keeps every stage value below the
// borderline level.
inline double log_phi_capped(const PhiTarget& phi, int dim, double t) {
  return std::min(phi.log_phi(t), std::log(2.0 * (dim - 2)) - 2.0 * t);
}

// Selection threshold in log form: log φ(y) > thr(n, tg).
inline double selection_threshold(int n, int dim, double tg) {
  return std::log(n + 1.0) + std::log(2.0 * (dim - 2)) - 2.0 * tg;
}

// Largest t <= tg with log φ̄(t) > thr, by bisection on the decreasing
// function log φ̄.
inline double largest_admissible_t(const PhiTarget& phi, int dim, int n,
                                   double tg) {
  const double thr = selection_threshold(n, dim, tg);
  auto ok = [&](double t) { return log_phi_capped(phi, dim, t) > thr; };
  double hi = tg;
  double step = 1.0;
  double lo = tg - step;
  int expand = 0;
  while (!ok(lo)) {
    hi = lo;
    step *= 2.0;
    lo = tg - step;
    if (++expand > 60 || !std::isfinite(lo))
      throw PreconditionError(
          "target φ never satisfies the selection rule for stage " +
          std::to_string(n));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

/// Stage points x_n, x_n e^{-1/x_n^3}, y_n for n = 1..K, starting at x_1 = 1.
/// Throws when K exceeds the largest count whose stage gap is representable.
inline OscillationSchedule make_schedule(const PhiTarget& phi, int dim,
                                         int stages,
                                         const OscillationOptions& opts = {}) {
  detail::require(dim >= 10, "oscillatory construction needs N >= 10");
  detail::require(stages >= 0, "stage count must be nonnegative");
  detail::require(phi.exponent > 0 && phi.scale > 0 && std::isfinite(phi.scale),
                  "target φ must be positive and unbounded as r -> 0");
  detail::require(opts.y_fraction > 0 && opts.y_fraction < 1 &&
                      opts.x_fraction > 0 && opts.x_fraction < 1,
                  "selection fractions must lie in (0, 1)");
  detail::require(opts.gap == GapRule::Exact ||
                      (opts.fixed_gap > 0 && std::isfinite(opts.fixed_gap)),
                  "fixed gap must be positive");
  OscillationSchedule s;
  s.dim = dim;
  s.phi = phi;
  double tx = 0.0;
  for (int n = 1; n <= stages; ++n) {
    const double gap = detail::stage_gap(tx, opts);
    const double tg = tx - gap;
    if (!std::isfinite(gap) || !std::isfinite(tg) || !(tg < tx))
      throw PreconditionError(
          "stage " + std::to_string(n) +
          " gap is not representable in double precision; maximal feasible "
          "stage count is " +
          std::to_string(n - 1));
    const double t_max = detail::largest_admissible_t(phi, dim, n, tg);
    const double ty = t_max + std::log(opts.y_fraction);
    const double log_r2phi = detail::log_phi_capped(phi, dim, ty) + 2.0 * ty;
    s.stages.push_back({tx, tg, ty, std::exp(log_r2phi) / (n + 1.0),
                        log_r2phi - std::log(n + 1.0)});
    tx = ty + std::log(opts.x_fraction);
  }
  s.tx_next = tx;
  return s;
}

/// Largest K accepted by make_schedule (probing stage gaps only).
inline int max_feasible_stages(const PhiTarget& phi, int dim,
                               const OscillationOptions& opts = {},
                               int limit = 64) {
  int k = 0;
  while (k < limit) {
    try {
      make_schedule(phi, dim, k + 1, opts);
    } catch (const PreconditionError&) {
      break;
    }
    ++k;
  }
  return k;
}

/// Throws unless tx_{n+1} < ty_n < tg_n < tx_n and the φ selection inequality
/// hold on the stored log-values.
inline void check_schedule(const OscillationSchedule& s) {
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    const double next = k + 1 < s.stages.size() ? s.stages[k + 1].tx : s.tx_next;
    if (!(next < st.ty && st.ty < st.tg && st.tg < st.tx))
      throw PreconditionError("stage " + std::to_string(k + 1) +
                              " violates x_{n+1} < y_n < gap point < x_n");
    const int n = static_cast<int>(k) + 1;
    if (!(s.phi.log_phi(st.ty) > detail::selection_threshold(n, s.dim, st.tg)))
      throw PreconditionError("stage " + std::to_string(n) +
                              " violates the φ selection inequality");
  }
}

struct OscillatoryBuild {
  PotentialSpec potential;
  OscillationSchedule schedule;
};

/// Potential equal to 2(N-2)/r² on every (gap point, x_n), passing through
/// φ(y_n)/(n+1) at y_n, strictly decreasing, borderline below x_{K+1}.
/// Written as c = 2(N-2) e^{-q(t)}; ramps of q stay above slope -2.
inline OscillatoryBuild build_oscillatory(const PhiTarget& phi, int dim,
                                          int stages,
                                          const OscillationOptions& opts = {}) {
  OscillationSchedule sched = make_schedule(phi, dim, stages, opts);
  check_schedule(sched);
  if (stages == 0) return {borderline_potential(dim), std::move(sched)};

  const double top = 2.0 * (dim - 2);
  using Piece = form::Oscillatory::Piece;
  std::vector<Piece> pieces;
  for (std::size_t k = sched.stages.size(); k-- > 0;) {
    const auto& st = sched.stages[k];
    const double tx_next =
        k + 1 < sched.stages.size() ? sched.stages[k + 1].tx : sched.tx_next;
    const double log_top = std::log(top);
    const double depth = log_top - st.log_level_y;

    auto down = interpolate_smooth_decreasing({tx_next, 0.0, 0.0},
                                              {st.ty, depth, 0.0}, opts.order);
    pieces.push_back({tx_next, st.ty, down, top, st.level_y, log_top,
                      st.log_level_y});

    const double len = st.tg - st.ty;
    const double width = std::min(0.25 * len, 0.5 * (len - 0.5 * depth));
    if (!(width > 0))
      throw SolverError("stage " + std::to_string(k + 1) +
                        " too short for a decreasing potential");
    MonotoneSegment up({st.ty, depth, 0.0}, {st.tg, 0.0, 0.0}, opts.order,
                       width);
    if (!(up.plateau_slope() > -2.0 && up.plateau_slope() < 0.0))
      throw SolverError("stage " + std::to_string(k + 1) +
                        " ramp would make the potential increase");
    pieces.push_back({st.ty, st.tg, up, st.level_y, top, st.log_level_y,
                      log_top});

    if (st.tg < st.tx)
      pieces.push_back({st.tg, st.tx, std::nullopt, top, top, log_top, log_top});
  }
  form::Oscillatory f{sched, std::move(pieces)};
  return {PotentialSpec(dim, std::move(f)), std::move(sched)};
}

}  // namespace extremal
