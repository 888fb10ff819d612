#pragma once

#include <vector>

#include "proxnas/tape.hpp"

namespace proxnas {

/// Per-coordinate moment-based step for the architecture matrix.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState make(Eigen::Index rows, Eigen::Index cols, double beta1, double beta2,
                        double eps);

  /// Advances the moments and returns the update to subtract from the
  /// parameter (already scaled by the step size).
  Matrix update(const Matrix& grad, double step_size);
};

/// Plain SGD with momentum over a list of weight arrays.
struct SgdMomentum {
  std::vector<Matrix> velocity;
  double momentum = 0.9;

  static SgdMomentum make(const std::vector<Matrix*>& params, double momentum);

  /// params and grads must align with the velocity buffers.
  void apply(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
             double step_size);

  /// Updates a single array by velocity slot. Arrays that received no
  /// gradient this step are left untouched, velocity included.
  void apply_at(std::size_t slot, Matrix& param, const Matrix& grad, double step_size);
};

}  // namespace proxnas
