#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "proxnas/tape.hpp"

namespace proxnas {

/// Central-difference gradient estimate of a scalar function, coordinate by
/// coordinate. The gradient-check oracle: independent of the tape.
inline Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f, Matrix x,
                                         double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  Matrix grad(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double orig = x(r, c);
      x(r, c) = orig + step;
      const double fp = f(x);
      x(r, c) = orig - step;
      const double fm = f(x);
      x(r, c) = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw std::domain_error("finite_difference_gradient: non-finite objective value at (" +
                                std::to_string(r) + "," + std::to_string(c) + ")");
      }
      grad(r, c) = (fp - fm) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace proxnas
