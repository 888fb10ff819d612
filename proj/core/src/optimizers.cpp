#include "proxnas/optimizers.hpp"

#include <cmath>
#include <stdexcept>

namespace proxnas {

AdamState AdamState::make(Eigen::Index rows, Eigen::Index cols, double beta1, double beta2,
                          double eps) {
  AdamState s;
  s.m = Matrix::Zero(rows, cols);
  s.v = Matrix::Zero(rows, cols);
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

Matrix AdamState::update(const Matrix& grad, double step_size) {
  if (grad.rows() != m.rows() || grad.cols() != m.cols()) {
    throw std::invalid_argument("AdamState::update: gradient shape mismatch");
  }
  ++step;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  Matrix m_hat = m / bc1;
  Matrix v_hat = v / bc2;
  return step_size * (m_hat.array() / (v_hat.array().sqrt() + eps)).matrix();
}

SgdMomentum SgdMomentum::make(const std::vector<Matrix*>& params, double momentum) {
  SgdMomentum s;
  s.momentum = momentum;
  s.velocity.reserve(params.size());
  for (const Matrix* p : params) s.velocity.push_back(Matrix::Zero(p->rows(), p->cols()));
  return s;
}

void SgdMomentum::apply(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                        double step_size) {
  if (params.size() != velocity.size() || grads.size() != velocity.size()) {
    throw std::invalid_argument("SgdMomentum::apply: parameter list shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    apply_at(i, *params[i], grads[i], step_size);
  }
}

void SgdMomentum::apply_at(std::size_t slot, Matrix& param, const Matrix& grad,
                           double step_size) {
  if (slot >= velocity.size()) {
    throw std::invalid_argument("SgdMomentum::apply_at: slot out of range");
  }
  velocity[slot] = momentum * velocity[slot] + grad;
  param -= step_size * velocity[slot];
}

}  // namespace proxnas
