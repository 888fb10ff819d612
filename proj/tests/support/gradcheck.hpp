#pragma once

// Gradient-check helpers shared by the unit tests and the acceptance suite.
// The finite-difference estimate is the oracle; the tape must agree with it
// to 1e-5 relative error (max norm) in double precision.

#include <cmath>
#include <functional>

#include "proxnas/finite_diff.hpp"
#include "proxnas/rng.hpp"
#include "proxnas/tape.hpp"

namespace proxnas::testing {

inline double rel_error(const Matrix& ad, const Matrix& fd) {
  const double num = (ad - fd).cwiseAbs().maxCoeff();
  const double den = std::max(1.0, fd.cwiseAbs().maxCoeff());
  return num / den;
}

constexpr double kGradTol = 1e-5;
constexpr double kFdStep = 1e-4;

inline Matrix random_matrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

/// Random matrix with entries bounded away from zero (for kink safety).
inline Matrix random_matrix_away_from_zero(int rows, int cols, Rng& rng, double min_abs = 0.1) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double mag = rng.uniform(min_abs, 1.0 + min_abs);
      m(r, c) = rng.uniform01() < 0.5 ? -mag : mag;
    }
  }
  return m;
}

/// Checks d(build(x))/dx against central differences at x. `build` must
/// return the same scalar value as evaluating the tape it builds.
inline double check_gradient(const std::function<double(const Matrix&)>& build, const Matrix& x,
                             const Matrix& tape_grad, double step = kFdStep) {
  const Matrix fd = finite_difference_gradient(build, x, step);
  return rel_error(tape_grad, fd);
}

}  // namespace proxnas::testing
