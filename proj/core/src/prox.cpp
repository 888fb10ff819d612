#include "proxnas/prox.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace proxnas {

namespace {

void check_finite(const Vector& a, const char* who) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::isnan(a(i))) {
      throw std::invalid_argument(std::string(who) + ": NaN entry at index " + std::to_string(i));
    }
    if (!std::isfinite(a(i))) {
      throw std::invalid_argument(std::string(who) + ": non-finite entry at index " +
                                  std::to_string(i));
    }
  }
}

void check_nonempty(const Vector& a, const char* who) {
  if (a.size() == 0) throw std::invalid_argument(std::string(who) + ": empty vector");
}

double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace

Vector prox_unit_box(const Vector& a) {
  check_finite(a, "prox_unit_box");
  return a.cwiseMax(0.0).cwiseMin(1.0);
}

Vector prox_cardinality(const Vector& a) {
  check_nonempty(a, "prox_cardinality");
  check_finite(a, "prox_cardinality");
  Eigen::Index best = 0;
  double best_sq = a(0) * a(0);
  for (Eigen::Index i = 1; i < a.size(); ++i) {
    const double sq = a(i) * a(i);
    if (sq > best_sq) {
      best = i;
      best_sq = sq;
    }
  }
  Vector out = Vector::Zero(a.size());
  out(best) = a(best);
  return out;
}

SparseBoxProx prox_cardinality_box_checked(const Vector& a) {
  check_nonempty(a, "prox_cardinality_box");
  check_finite(a, "prox_cardinality_box");
  // Placing coefficient c at coordinate i costs 0.5*||a||^2 - (a_i*c - c^2/2),
  // so the residual is minimized by maximizing the gain a_i*c - c^2/2 with
  // c = clip(a_i, 0, 1).
  Eigen::Index best = 0;
  double best_gain = -1.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double c = clip01(a(i));
    const double gain = c * (a(i) - 0.5 * c);
    if (gain > best_gain) {
      best = i;
      best_gain = gain;
    }
  }
  SparseBoxProx result;
  result.value = Vector::Zero(a.size());
  const double coeff = clip01(a(best));
  result.value(best) = coeff;
  result.degenerate = coeff <= 0.0;
  return result;
}

Vector prox_cardinality_box(const Vector& a) {
  SparseBoxProx r = prox_cardinality_box_checked(a);
  if (r.degenerate) {
    std::cerr << "prox_cardinality_box: no feasible minimizer (all entries nonpositive); "
                 "returning the zero vector\n";
  }
  return std::move(r.value);
}

Vector prox_cardinality_box_bruteforce(const Vector& a) {
  check_nonempty(a, "prox_cardinality_box_bruteforce");
  check_finite(a, "prox_cardinality_box_bruteforce");
  Eigen::Index best = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  double best_coeff = 0.0;
  Vector candidate(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double c = clip01(a(i));
    candidate.setZero();
    candidate(i) = c;
    const double residual = 0.5 * (a - candidate).squaredNorm();
    if (residual < best_residual) {
      best = i;
      best_residual = residual;
      best_coeff = c;
    }
  }
  Vector out = Vector::Zero(a.size());
  out(best) = best_coeff;
  return out;
}

Vector prox(ConstraintSet set, const Vector& a) {
  switch (set) {
    case ConstraintSet::UnitBox:
      return prox_unit_box(a);
    case ConstraintSet::Cardinality:
      return prox_cardinality(a);
    case ConstraintSet::CardinalityBox:
      return prox_cardinality_box(a);
  }
  throw std::invalid_argument("prox: unknown constraint set");
}

Eigen::MatrixXd prox_unit_box_rows(const Eigen::MatrixXd& arch) {
  Eigen::MatrixXd out(arch.rows(), arch.cols());
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    out.row(r) = prox_unit_box(arch.row(r).transpose()).transpose();
  }
  return out;
}

Eigen::MatrixXd prox_cardinality_rows(const Eigen::MatrixXd& arch) {
  Eigen::MatrixXd out(arch.rows(), arch.cols());
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    out.row(r) = prox_cardinality(arch.row(r).transpose()).transpose();
  }
  return out;
}

Eigen::MatrixXd prox_cardinality_box_rows(const Eigen::MatrixXd& arch, bool* any_degenerate) {
  Eigen::MatrixXd out(arch.rows(), arch.cols());
  bool degenerate = false;
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    SparseBoxProx p = prox_cardinality_box_checked(arch.row(r).transpose());
    degenerate = degenerate || p.degenerate;
    out.row(r) = p.value.transpose();
  }
  if (any_degenerate != nullptr) {
    *any_degenerate = degenerate;
  } else if (degenerate) {
    std::cerr << "prox_cardinality_box_rows: degenerate row (all entries nonpositive)\n";
  }
  return out;
}

}  // namespace proxnas
