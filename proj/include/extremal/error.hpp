#pragma once

#include <stdexcept>
#include <string>

namespace extremal {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates a documented precondition (bad parameters, inadmissible
/// potential, malformed table).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to deliver its postcondition.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A nonlinearity failed the convexity/positivity/growth audit.
class AuditError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace detail
}  // namespace extremal
