#pragma once

#include <Eigen/Dense>

namespace proxnas {

using Vector = Eigen::VectorXd;

/// Constraint sets for architecture rows: Cardinality = exactly one nonzero,
/// UnitBox = entries in [0,1], CardinalityBox = their intersection (the
/// feasible set for a discrete architecture row).
enum class ConstraintSet { Cardinality, UnitBox, CardinalityBox };

/// Euclidean projection onto the unit box: elementwise clip to [0,1].
/// Rejects non-finite entries.
Vector prox_unit_box(const Vector& a);

/// Euclidean projection onto the 1-sparse set: keeps the entry of largest
/// squared magnitude (lowest index on ties), zeroes the rest. Sign and
/// magnitude of the kept entry are preserved.
Vector prox_cardinality(const Vector& a);

struct SparseBoxProx {
  Vector value;
  /// Set when no feasible minimizer is attained (all entries nonpositive):
  /// the returned vector is all zeros, which is outside the constraint set.
  bool degenerate = false;
};

/// Euclidean projection onto the intersection of the 1-sparse set and the
/// unit box: the nearest vector with exactly one nonzero entry in (0,1].
/// Selects the coordinate directly by minimizing the projection residual
/// (ties to the lowest index). The degenerate all-nonpositive case is
/// flagged rather than silently returned.
SparseBoxProx prox_cardinality_box_checked(const Vector& a);

/// As above; emits a diagnostic on stderr for the degenerate case.
Vector prox_cardinality_box(const Vector& a);

/// Ground-truth oracle: enumerates every coordinate, computes the optimal
/// clipped coefficient, evaluates the full objective 0.5*||a - c*e_i||^2 and
/// returns the global minimizer (lowest index on ties).
Vector prox_cardinality_box_bruteforce(const Vector& a);

/// Projection dispatch by constraint set.
Vector prox(ConstraintSet set, const Vector& a);

/// Rowwise application over architecture matrices.
Eigen::MatrixXd prox_unit_box_rows(const Eigen::MatrixXd& arch);
Eigen::MatrixXd prox_cardinality_rows(const Eigen::MatrixXd& arch);
Eigen::MatrixXd prox_cardinality_box_rows(const Eigen::MatrixXd& arch,
                                          bool* any_degenerate = nullptr);

}  // namespace proxnas
