#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/grid.hpp"
#include "extremal/profile.hpp"
#include "extremal/smooth_segment.hpp"

namespace extremal {

/// Which one-sided limit to take at a breakpoint.
enum class Side { Below, Above };

class PotentialSpec;

/// Target φ(r) = scale * r^(-exponent) for the oscillatory construction.
struct PhiTarget {
  double exponent = 2.0;
  double scale = 1.0;

  double log_phi(double t) const { return std::log(scale) - exponent * t; }
  bool monotone() const { return exponent > 0; }
};

/// One stage of the oscillation schedule, all in log-radius.
struct ScheduleStage {
  double tx;       // log x_n
  double tg;       // log(x_n e^{-1/x_n^3})
  double ty;       // log y_n
  double level_y;      // r²Ψ at y_n
  double log_level_y;  // its logarithm, finite even when level_y underflows
};

struct OscillationSchedule {
  int dim = 10;
  PhiTarget phi;
  std::vector<ScheduleStage> stages;
  double tx_next = 0.0;  // log x_{K+1}; equals 0 when there are no stages
};

namespace form {

struct Zero {};
struct Borderline {};
struct Hardy {};
struct Shifted {
  double epsilon;
};
/// Borderline level on [log a, log b], zero elsewhere.
struct Window {
  double a;
  double b;
};
/// Piecewise-constant level: levels[k] on (edges[k-1], edges[k]).
struct Steps {
  std::vector<double> edges;
  std::vector<double> levels;
};
/// Stage-built level 2(N-2) exp(-q(t)) with q >= 0 made of flat pieces and
/// monotone ramps.
struct Oscillatory {
  struct Piece {
    double t0;
    double t1;
    std::optional<MonotoneSegment> ramp;  // empty: q = 0 (borderline)
    double level_t0 = 0.0;  // exact levels at the ends
    double level_t1 = 0.0;
    double log_level_t0 = 0.0;
    double log_level_t1 = 0.0;
  };
  OscillationSchedule schedule;
  std::vector<Piece> pieces;  // increasing in t, covering [pieces[0].t0, 0]
};
/// ((C2-C1)/(2(N-2))) c_inner + C1.
struct Blend {
  double c1;
  double c2;
  std::shared_ptr<const PotentialSpec> inner;
};
/// Sampled level c(t); constant extension below the first node.
struct Table {
  std::shared_ptr<const RadialProfile> levels;
};

}  // namespace form

/// A radial potential Ψ in the canonical form c(t) = r²Ψ(r), t = log r.
class PotentialSpec {
 public:
  using Form =
      std::variant<form::Zero, form::Borderline, form::Hardy, form::Shifted,
                   form::Window, form::Steps, form::Oscillatory, form::Blend,
                   form::Table>;

  PotentialSpec(int dim, Form f) : dim_(dim), form_(std::move(f)) {
    detail::require(dim_ >= 3, "potential dimension must be at least 3");
  }

  int dim() const { return dim_; }
  const Form& form() const { return form_; }
  double borderline_level() const { return 2.0 * (dim_ - 2); }
  double hardy_level() const { return 0.25 * (dim_ - 2.0) * (dim_ - 2.0); }

  std::string tag() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, form::Zero>) return "zero";
          else if constexpr (std::is_same_v<T, form::Borderline>) return "borderline";
          else if constexpr (std::is_same_v<T, form::Hardy>) return "hardy";
          else if constexpr (std::is_same_v<T, form::Shifted>) return "shifted";
          else if constexpr (std::is_same_v<T, form::Window>) return "window";
          else if constexpr (std::is_same_v<T, form::Steps>) return "steps";
          else if constexpr (std::is_same_v<T, form::Oscillatory>) return "oscillatory";
          else if constexpr (std::is_same_v<T, form::Blend>) return "blend";
          else return "table";
        },
        form_);
  }

  /// Level if c is constant in t.
  std::optional<double> constant_level() const {
    if (std::holds_alternative<form::Zero>(form_)) return 0.0;
    if (std::holds_alternative<form::Borderline>(form_))
      return borderline_level();
    if (std::holds_alternative<form::Hardy>(form_)) return hardy_level();
    if (auto* s = std::get_if<form::Shifted>(&form_))
      return borderline_level() - s->epsilon;
    if (auto* b = std::get_if<form::Blend>(&form_)) {
      if (b->c1 == b->c2) return b->c1;
    }
    return std::nullopt;
  }

  /// c(t) = r²Ψ(r). At breakpoints `side` selects the one-sided limit.
  double level(double t, Side side = Side::Above) const {
    return eval(t, side).level;
  }
  /// dc/dt, one-sided at breakpoints.
  double level_slope(double t, Side side = Side::Above) const {
    return eval(t, side).slope;
  }
  /// log c(t); stays finite where c underflows.
  double log_level(double t, Side side = Side::Above) const {
    return eval(t, side).log_level;
  }
  /// d log c/dt; 0 where c vanishes identically.
  double level_log_slope(double t, Side side = Side::Above) const {
    return eval(t, side).log_slope;
  }
  /// log Ψ(e^t) = log c(t) - 2t.
  double log_psi(double t, Side side = Side::Above) const {
    return log_level(t, side) - 2.0 * t;
  }

  /// Interior points of non-smoothness in t, increasing, all <= 0.
  std::vector<double> breakpoints() const {
    std::vector<double> out = std::visit(
        [&](const auto& f) -> std::vector<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, form::Window>) {
            return {std::log(f.a), std::log(f.b)};
          } else if constexpr (std::is_same_v<T, form::Steps>) {
            return f.edges;
          } else if constexpr (std::is_same_v<T, form::Oscillatory>) {
            std::vector<double> v;
            for (const auto& p : f.pieces) {
              v.push_back(p.t0);
              if (p.ramp) {
                const auto k = p.ramp->knots();
                v.push_back(k[0]);
                v.push_back(k[1]);
              }
            }
            return v;
          } else if constexpr (std::is_same_v<T, form::Blend>) {
            if (f.c1 == f.c2) return {};
            return f.inner->breakpoints();
          } else if constexpr (std::is_same_v<T, form::Table>) {
            std::vector<double> v{f.levels->grid().t_min()};
            for (auto i : f.levels->grid().breakpoint_indices())
              v.push_back(f.levels->grid()[i]);
            return v;
          } else {
            return {};
          }
        },
        form_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](double t) { return !(t < 0.0); }),
              out.end());
    return out;
  }

 private:
  struct Eval {
    double level;
    double slope;
    double log_level;
    double log_slope;
  };
  static Eval flat(double c) { return {c, 0.0, std::log(c), 0.0}; }
  static Eval with_log(double c, double d) {
    return {c, d, std::log(c), c != 0.0 ? d / c : 0.0};
  }

  Eval eval(double t, Side side) const {
    return std::visit(
        [&](const auto& f) -> Eval {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, form::Zero>) {
            return flat(0.0);
          } else if constexpr (std::is_same_v<T, form::Borderline>) {
            return flat(borderline_level());
          } else if constexpr (std::is_same_v<T, form::Hardy>) {
            return flat(hardy_level());
          } else if constexpr (std::is_same_v<T, form::Shifted>) {
            return flat(borderline_level() - f.epsilon);
          } else if constexpr (std::is_same_v<T, form::Window>) {
            const double la = std::log(f.a);
            const double lb = std::log(f.b);
            const bool inside = side == Side::Above ? (t >= la && t < lb)
                                                    : (t > la && t <= lb);
            return flat(inside ? borderline_level() : 0.0);
          } else if constexpr (std::is_same_v<T, form::Steps>) {
            auto it = side == Side::Above
                          ? std::upper_bound(f.edges.begin(), f.edges.end(), t)
                          : std::lower_bound(f.edges.begin(), f.edges.end(), t);
            return flat(f.levels[static_cast<std::size_t>(it - f.edges.begin())]);
          } else if constexpr (std::is_same_v<T, form::Oscillatory>) {
            return eval_oscillatory(f, t, side);
          } else if constexpr (std::is_same_v<T, form::Blend>) {
            const double w = (f.c2 - f.c1) / borderline_level();
            if (w == 0.0) return flat(f.c1);
            const Eval in = f.inner->eval(t, side);
            const double c = w * in.level + f.c1;
            if (f.c1 > 0.0) return with_log(c, w * in.slope);
            return {c, w * in.slope, std::log(w) + in.log_level, in.log_slope};
          } else {
            const RadialProfile& p = *f.levels;
            if (t <= p.grid().t_min()) {
              if (t < p.grid().t_min() || side == Side::Below)
                return flat(p.value(0));
            }
            std::size_t i = p.grid().locate(t);
            if (side == Side::Below && i > 0 && t == p.grid()[i]) --i;
            return with_log(p.at_in(i, t).value(), slope_in(p, i, t));
          }
        },
        form_);
  }

  static double slope_in(const RadialProfile& p, std::size_t i, double t) {
    // Derivative of the interval cubic by a symmetric difference of width
    // h/1000 clipped to the interval.
    const double a = p.grid()[i];
    const double b = p.grid()[i + 1];
    const double h = 1e-3 * (b - a);
    const double lo = std::max(a, t - h);
    const double hi = std::min(b, t + h);
    return (p.at_in(i, hi).value() - p.at_in(i, lo).value()) / (hi - lo);
  }

  Eval eval_oscillatory(const form::Oscillatory& f, double t,
                        Side side) const {
    const double top = borderline_level();
    if (f.pieces.empty() || t < f.pieces.front().t0 ||
        (t == f.pieces.front().t0 && side == Side::Below))
      return flat(top);
    // Piece with t0 <= t < t1 (Above) or t0 < t <= t1 (Below).
    auto it = std::upper_bound(
        f.pieces.begin(), f.pieces.end(), t,
        [](double v, const form::Oscillatory::Piece& p) { return v < p.t0; });
    std::size_t k = static_cast<std::size_t>(it - f.pieces.begin()) - 1;
    if (side == Side::Below && t == f.pieces[k].t0 && k > 0) --k;
    const auto& piece = f.pieces[k];
    const double dq = piece.ramp ? piece.ramp->slope(t) : 0.0;
    if (t == piece.t0)
      return {piece.level_t0, -piece.level_t0 * dq, piece.log_level_t0, -dq};
    if (t == piece.t1)
      return {piece.level_t1, -piece.level_t1 * dq, piece.log_level_t1, -dq};
    if (!piece.ramp) return flat(top);
    const double q = piece.ramp->value(t);
    const double c = top * std::exp(-q);
    return {c, -c * dq, std::log(top) - q, -dq};
  }

  int dim_;
  Form form_;
};

inline PotentialSpec zero_potential(int dim) { return {dim, form::Zero{}}; }
inline PotentialSpec borderline_potential(int dim) {
  return {dim, form::Borderline{}};
}
inline PotentialSpec hardy_potential(int dim) { return {dim, form::Hardy{}}; }
/// Level 2(N-2) - ε.
inline PotentialSpec shifted_potential(int dim, double epsilon) {
  detail::require(std::isfinite(epsilon), "shift must be finite");
  return {dim, form::Shifted{epsilon}};
}

/// Ψ_{A,B}: 2(N-2)/r² on [A, B], zero elsewhere. A = 0 is the degenerate
/// limit, returned as the borderline potential when B = 1.
inline PotentialSpec window_potential(double a, double b, int dim) {
  detail::require(dim >= 10,
                  "window potential needs N >= 10 (2(N-2) <= (N-2)^2/4)");
  detail::require(std::isfinite(a) && std::isfinite(b), "radii must be finite");
  detail::require(a >= 0.0 && a < b && b <= 1.0, "window needs 0 < A < B <= 1");
  if (a == 0.0) {
    if (b == 1.0) return borderline_potential(dim);
    return {dim, form::Steps{{std::log(b)}, {2.0 * (dim - 2), 0.0}}};
  }
  return {dim, form::Window{a, b}};
}

/// Piecewise-constant level in t: levels.size() == edges.size() + 1.
inline PotentialSpec steps_potential(int dim, std::vector<double> edges,
                                     std::vector<double> levels) {
  detail::require(levels.size() == edges.size() + 1,
                  "steps potential needs one more level than edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    detail::require(std::isfinite(edges[k]) && edges[k] < 0.0,
                    "step edges must be finite and negative");
    if (k > 0)
      detail::require(edges[k] > edges[k - 1], "step edges must increase");
  }
  for (double l : levels)
    detail::require(std::isfinite(l), "step levels must be finite");
  return {dim, form::Steps{std::move(edges), std::move(levels)}};
}

/// Φ = ((C2-C1)/(2(N-2))) Ψ + C1/r² over an oscillatory (or borderline) Ψ.
inline PotentialSpec blend(double c1, double c2, const PotentialSpec& inner,
                           int dim) {
  detail::require(inner.dim() == dim, "blend dimension mismatch");
  const double border = 2.0 * (dim - 2);
  const double hardy = 0.25 * (dim - 2.0) * (dim - 2.0);
  detail::require(std::isfinite(c1) && std::isfinite(c2), "levels must be finite");
  detail::require(c1 >= 0.0, "C1 must be nonnegative");
  detail::require(c1 <= c2, "C1 must not exceed C2");
  detail::require(c2 >= border && c2 <= hardy,
                  "C2 must lie in [2(N-2), (N-2)^2/4]");
  return {dim, form::Blend{c1, c2, std::make_shared<const PotentialSpec>(inner)}};
}

/// Potential sampled as a level profile c(t).
inline PotentialSpec table_potential(RadialProfile levels) {
  const int dim = levels.grid().dim();
  return {dim, form::Table{std::make_shared<const RadialProfile>(std::move(levels))}};
}

/// Throws unless 0 <= c <= (N-2)²/4 at every node (both sides of breakpoints).
inline void check_admissible(const PotentialSpec& psi,
                             const LogRadialGrid& grid) {
  const double hardy = psi.hardy_level();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (Side side : {Side::Below, Side::Above}) {
      const double c = psi.level(grid[i], side);
      if (!std::isfinite(c))
        throw PreconditionError("potential level not finite at node " +
                                std::to_string(i));
      if (c < 0.0)
        throw PreconditionError(
            "sign-changing potential (c < 0 at node " + std::to_string(i) +
            ", t = " + std::to_string(grid[i]) + ") is unsupported");
      if (c > hardy * (1.0 + 1e-12))
        throw PreconditionError(
            "potential exceeds the Hardy level (N-2)^2/4 at node " +
            std::to_string(i) + ", t = " + std::to_string(grid[i]) +
            ": c = " + std::to_string(c));
    }
  }
}

/// Throws unless Ψ > 0 and Ψ(r_i) > Ψ(r_{i+1}) across consecutive nodes.
inline void check_strictly_decreasing(const PotentialSpec& psi,
                                      const LogRadialGrid& grid) {
  double prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c = psi.log_level(grid[i], Side::Below);
    if (!(c > -std::numeric_limits<double>::infinity()))
      throw PreconditionError("potential must be positive (node " +
                              std::to_string(i) + ")");
    const double lp = psi.log_psi(grid[i], Side::Below);
    if (i > 0 && !(lp < prev))
      throw PreconditionError("potential not strictly decreasing in r at node " +
                              std::to_string(i));
    prev = psi.log_psi(grid[i], Side::Above);
    if (prev > lp)
      throw PreconditionError("potential jumps upward at node " +
                              std::to_string(i));
  }
}

/// Potential-aware log grid: breakpoints inserted, t_min defaulting to ten
/// units below the deepest breakpoint (or -40 without breakpoints).
inline LogRadialGrid grid_for(const PotentialSpec& psi,
                              double points_per_unit_t = 100.0,
                              std::optional<double> t_min = std::nullopt,
                              GridOptions opts = {}) {
  auto bps = psi.breakpoints();
  const double lo =
      t_min ? *t_min : (bps.empty() ? -40.0 : bps.front() - 10.0);
  std::erase_if(bps, [&](double b) { return b <= lo; });
  return make_log_grid(psi.dim(), lo, points_per_unit_t, std::move(bps), opts);
}

}  // namespace extremal
