#pragma once

#include <stdexcept>
#include <string>

namespace mgbeam {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent sizes, out-of-range indices or non-positive physical
/// parameters.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible was numerically singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The requested beamforming structure does not exist for this scenario
/// (e.g. multicast zero forcing without a nontrivial null space).
class InfeasibleStructureError : public Error {
 public:
  using Error::Error;
};

/// The dual point does not define a unique beamformer (all duals and noise
/// terms vanish).
class DegenerateDualError : public Error {
 public:
  using Error::Error;
};

/// Inner solver failure re-raised by the outer loop with the iteration index.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int outer_iteration)
      : Error(what + " (outer iteration " + std::to_string(outer_iteration) + ")"),
        outer_iteration_(outer_iteration) {}

  int outer_iteration() const noexcept { return outer_iteration_; }

 private:
  int outer_iteration_;
};

}  // namespace mgbeam
