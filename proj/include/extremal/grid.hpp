#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "extremal/error.hpp"

namespace extremal {

/// Nodes in log-radius t = log r on (-inf, 0], ending exactly at r = 1.
///
/// Breakpoints are nodes where a potential may jump or lose smoothness. Finite
/// differences and one-sided evaluations never straddle a breakpoint.
class LogRadialGrid {
 public:
  /// Minimum nodes per factor-of-ten in radius between breakpoints.
  static constexpr double kNodesPerDecade = 2.0;

  LogRadialGrid(int dim, std::vector<double> nodes,
                std::vector<std::size_t> breakpoint_indices)
      : dim_(dim),
        nodes_(std::move(nodes)),
        breakpoints_(std::move(breakpoint_indices)) {
    validate();
  }

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double t_min() const { return nodes_.front(); }
  double t_max() const { return nodes_.back(); }
  double radius(std::size_t i) const { return std::exp(nodes_[i]); }

  /// Node indices of interior breakpoints, increasing.
  std::span<const std::size_t> breakpoint_indices() const {
    return breakpoints_;
  }
  bool is_breakpoint(std::size_t i) const {
    return std::binary_search(breakpoints_.begin(), breakpoints_.end(), i);
  }

  /// Maximal runs of nodes [first, last] containing no interior breakpoint.
  std::vector<std::pair<std::size_t, std::size_t>> segments() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t first = 0;
    for (std::size_t b : breakpoints_) {
      if (b == 0 || b + 1 == nodes_.size()) continue;
      out.emplace_back(first, b);
      first = b;
    }
    out.emplace_back(first, nodes_.size() - 1);
    return out;
  }

  /// Interval index i with nodes[i] <= t <= nodes[i+1], clamped to the range.
  std::size_t locate(double t) const {
    if (t <= nodes_.front()) return 0;
    if (t >= nodes_.back()) return nodes_.size() - 2;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
  }

  /// Index of the node equal to t, or size() if none.
  std::size_t find_node(double t) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    if (it != nodes_.end() && *it == t)
      return static_cast<std::size_t>(it - nodes_.begin());
    return nodes_.size();
  }

 private:
  void validate() const {
    detail::require(dim_ >= 1, "grid dimension must be positive");
    detail::require(nodes_.size() >= 2, "grid needs at least two nodes");
    detail::require(nodes_.back() == 0.0, "last grid node must be t = 0");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      detail::require(std::isfinite(nodes_[i]), "grid node is not finite");
      if (i > 0)
        detail::require(nodes_[i] > nodes_[i - 1],
                        "grid nodes must be strictly increasing (index " +
                            std::to_string(i) + ")");
    }
    const double max_gap = std::numbers::ln10 / kNodesPerDecade;
    for (std::size_t i = 1; i < nodes_.size(); ++i)
      detail::require(nodes_[i] - nodes_[i - 1] <= max_gap * (1 + 1e-12),
                      "grid resolution below two nodes per decade of radius");
    for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
      detail::require(breakpoints_[k] < nodes_.size(),
                      "breakpoint index out of range");
      if (k > 0)
        detail::require(breakpoints_[k] > breakpoints_[k - 1],
                        "breakpoint indices must increase");
    }
  }

  int dim_;
  std::vector<double> nodes_;
  std::vector<std::size_t> breakpoints_;
};

struct GridOptions {
  /// Every breakpoint-delimited segment gets at least this many intervals.
  std::size_t min_intervals_per_segment = 64;
  /// Refuse grids larger than this.
  std::size_t max_nodes = 40'000'000;
};

/// Piecewise-uniform log grid on [t_min, 0] with breakpoints inserted
/// exactly as nodes.
inline LogRadialGrid make_log_grid(int dim, double t_min,
                                   double points_per_unit_t,
                                   std::vector<double> breakpoints,
                                   GridOptions opts = {}) {
  detail::require(std::isfinite(t_min) && std::isfinite(points_per_unit_t),
                  "grid parameters must be finite");
  detail::require(dim >= 3, "dimension must be at least 3");
  detail::require(t_min < 0.0, "t_min must be negative");
  detail::require(points_per_unit_t * std::numbers::ln10 >=
                      LogRadialGrid::kNodesPerDecade,
                  "grid density below two nodes per decade of radius");
  for (double b : breakpoints) {
    detail::require(std::isfinite(b), "breakpoint is not finite");
    detail::require(b >= t_min && b <= 0.0,
                    "breakpoint " + std::to_string(b) +
                        " outside grid range [t_min, 0]");
  }
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());

  std::vector<double> edges{t_min};
  for (double b : breakpoints)
    if (b > edges.back()) edges.push_back(b);
  if (edges.back() < 0.0) edges.push_back(0.0);

  auto intervals = [&](double a, double b) {
    return std::max(static_cast<double>(opts.min_intervals_per_segment),
                    std::ceil((b - a) * points_per_unit_t - 1e-9));
  };
  double total = 1.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s)
    total += intervals(edges[s], edges[s + 1]);
  if (!(total <= static_cast<double>(opts.max_nodes)))
    throw PreconditionError("grid would need " + std::to_string(total) +
                            " nodes (limit " + std::to_string(opts.max_nodes) +
                            "); lower the density or the depth");

  std::vector<double> nodes{t_min};
  nodes.reserve(static_cast<std::size_t>(total));
  std::vector<std::size_t> bp_index;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s];
    const double b = edges[s + 1];
    const auto n = static_cast<std::size_t>(intervals(a, b));
    for (std::size_t k = 1; k < n; ++k)
      nodes.push_back(a + (b - a) * static_cast<double>(k) /
                              static_cast<double>(n));
    nodes.push_back(b);
    if (s + 2 < edges.size()) bp_index.push_back(nodes.size() - 1);
  }
  // A breakpoint at t_min itself is the grid edge, not an interior node.
  return LogRadialGrid(dim, std::move(nodes), std::move(bp_index));
}

}  // namespace extremal
