#pragma once

#include <stdexcept>
#include <string>

namespace subcaustic {

/// Fixed-step refinement could not bring the energy drift below tolerance.
struct StepFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// No sign change of det(dE) found inside the expanded search window.
struct NoBracket : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Per-angle secant solve for the slice radius did not converge.
struct SolveFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// More than the allowed fraction of grid angles failed to solve.
struct SliceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cusp detector found a count outside {4, 6}.
struct CuspCountUnexpected : std::runtime_error {
  explicit CuspCountUnexpected(int count)
      : std::runtime_error("unexpected cusp count " + std::to_string(count)),
        count(count) {}
  int count;
};

/// A crossing passage falls too close to a cusp angle to assign an arc.
struct PassageOnCusp : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Vandermonde system of the suspension fit is numerically singular.
struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// b = (c31, c32) vanishes; the wedge factorization carries no information.
struct DegenerateB : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalRootFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All coefficients of the trigonometric polynomial vanish.
struct AllZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Resultant requested with mu = 0 or b = 0 (dropped leading degree).
struct DegenerateLeadingCoefficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace subcaustic
