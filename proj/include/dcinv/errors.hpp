#pragma once

#include <stdexcept>
#include <string>

namespace dcinv {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A polytope (or LP) is unbounded in some direction.
struct UnboundedSet : Error {
  using Error::Error;
};

/// A constraint system has no feasible point.
struct EmptySet : Error {
  using Error::Error;
};

/// Input is not full-dimensional where full dimension is required.
struct DegenerateInput : Error {
  using Error::Error;
};

/// The origin is not strictly interior where a normalized H-form is required.
struct OriginNotInterior : Error {
  using Error::Error;
};

/// A query point lies outside the convex hull it must belong to.
struct OutsideHull : Error {
  using Error::Error;
};

/// No feasible scaling exists anywhere in [gamma_min, gamma_max].
struct InfeasibleAtMinimum : Error {
  using Error::Error;
};

/// A numerical method failed to meet its termination contract.
struct SolverBreakdown : Error {
  using Error::Error;
};

}  // namespace dcinv
