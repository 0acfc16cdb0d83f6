#pragma once

#include <cmath>
#include <string>

#include "extremal/error.hpp"

namespace extremal {

/// Exponents of the power solutions r^β of the linearized radial problem at a
/// constant level c = r²Ψ: roots of β² + (N-2)β + (c - (N-1)) = 0.
struct PowerLawRoots {
  double c;
  int dim;
  double beta_plus;
  double beta_minus;
};

inline PowerLawRoots power_law_solution(double c, int dim) {
  detail::require(dim >= 3, "power-law roots need N >= 3");
  detail::require(std::isfinite(c), "level must be finite");
  const double n = dim;
  const double disc = n * n - 4.0 * c;
  if (disc < 0.0)
    throw PreconditionError("level c = " + std::to_string(c) +
                            " exceeds N^2/4: oscillatory indicial regime");
  const double root = std::sqrt(disc);
  return {c, dim, 0.5 * (-(n - 2.0) + root), 0.5 * (-(n - 2.0) - root)};
}

}  // namespace extremal
