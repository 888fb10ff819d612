#pragma once

#include <vector>

#include "proxnas/supernet.hpp"

namespace proxnas {

enum class LossKind { CrossEntropy, MeanSquaredError };
enum class Split { Train, Val, Test };

struct LossSpec {
  LossKind kind = LossKind::CrossEntropy;
  Split split = Split::Train;
};

/// Weight and per-operation parameter counts of the size regularizer
/// R(A) = sum_k (p_k / p_total) * ||column_k(A)||^2.
struct RegularizerSpec {
  double eta = 0.0;
  std::vector<long> op_param_counts;
  long total = 0;

  static RegularizerSpec make(double eta, const OperationSet& ops);
};

double regularizer(const Matrix& arch, const RegularizerSpec& spec);

/// Closed-form gradient: entry (e,k) is 2*(p_k/p_total)*A(e,k).
Matrix regularizer_gradient(const Matrix& arch, const RegularizerSpec& spec);

/// Forward pass with loss attached.
struct AssembledLoss {
  AssembledNet net;
  Var loss;
};

AssembledLoss assemble_loss(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                            const SupernetState& state, MixMode mode, const Matrix& batch,
                            const IntVector& labels, int classes, LossKind kind,
                            BuildStats* stats = nullptr);

struct LossValue {
  double loss = 0.0;
  double acc = 0.0;
};

/// Forward-only evaluation of the data loss (no regularizer).
LossValue evaluate_loss(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                        const SupernetState& state, MixMode mode, const Matrix& batch,
                        const IntVector& labels, int classes, LossKind kind,
                        BuildStats* stats = nullptr);

struct TaskData;  // tasks.hpp

/// Evaluates the loss a LossSpec describes on its designated split, so the
/// train/validation/test binding lives in one place.
LossValue evaluate_split(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                         const SupernetState& state, MixMode mode, const TaskData& task,
                         const LossSpec& spec);

/// The composite search objective F = L_val + eta * R(A), evaluated on the
/// given (validation) batch.
double search_objective(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                        const SupernetState& state, MixMode mode, const Matrix& val_batch,
                        const IntVector& val_labels, int classes, LossKind kind,
                        const RegularizerSpec& reg);

Matrix one_hot_targets(const IntVector& labels, int classes);

}  // namespace proxnas
