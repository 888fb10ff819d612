#include "proxnas/objective.hpp"

#include <stdexcept>

#include "proxnas/tasks.hpp"

namespace proxnas {

RegularizerSpec RegularizerSpec::make(double eta, const OperationSet& ops) {
  RegularizerSpec spec;
  spec.eta = eta;
  spec.op_param_counts = param_counts(ops);
  spec.total = 0;
  for (long p : spec.op_param_counts) spec.total += p;
  if (eta > 0.0 && spec.total <= 0) {
    throw std::invalid_argument(
        "RegularizerSpec: total parameter count must be positive when eta > 0");
  }
  return spec;
}

namespace {

void check_reg(const Matrix& arch, const RegularizerSpec& spec) {
  if (arch.cols() != static_cast<Eigen::Index>(spec.op_param_counts.size())) {
    throw std::invalid_argument("regularizer: architecture has " + std::to_string(arch.cols()) +
                                " columns but " + std::to_string(spec.op_param_counts.size()) +
                                " parameter counts were given");
  }
  if (spec.total <= 0 && spec.eta > 0.0) {
    throw std::invalid_argument("regularizer: zero total parameter count with eta > 0");
  }
}

}  // namespace

double regularizer(const Matrix& arch, const RegularizerSpec& spec) {
  check_reg(arch, spec);
  if (spec.total <= 0) return 0.0;
  double r = 0.0;
  for (Eigen::Index k = 0; k < arch.cols(); ++k) {
    const double frac = static_cast<double>(spec.op_param_counts[static_cast<std::size_t>(k)]) /
                        static_cast<double>(spec.total);
    r += frac * arch.col(k).squaredNorm();
  }
  return r;
}

Matrix regularizer_gradient(const Matrix& arch, const RegularizerSpec& spec) {
  check_reg(arch, spec);
  Matrix g = Matrix::Zero(arch.rows(), arch.cols());
  if (spec.total <= 0) return g;
  for (Eigen::Index k = 0; k < arch.cols(); ++k) {
    const double frac = static_cast<double>(spec.op_param_counts[static_cast<std::size_t>(k)]) /
                        static_cast<double>(spec.total);
    g.col(k) = 2.0 * frac * arch.col(k);
  }
  return g;
}

Matrix one_hot_targets(const IntVector& labels, int classes) {
  Matrix t = Matrix::Zero(labels.size(), classes);
  for (Eigen::Index r = 0; r < labels.size(); ++r) t(r, labels(r)) = 1.0;
  return t;
}

AssembledLoss assemble_loss(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                            const SupernetState& state, MixMode mode, const Matrix& batch,
                            const IntVector& labels, int classes, LossKind kind,
                            BuildStats* stats) {
  AssembledLoss out{assemble_supernet(topo, ops, arch, state, mode, batch, stats), Var{}};
  if (kind == LossKind::CrossEntropy) {
    out.loss = out.net.tape.softmax_cross_entropy(out.net.logits, labels);
  } else {
    out.loss = out.net.tape.mean_squared_error(out.net.logits, one_hot_targets(labels, classes));
  }
  return out;
}

LossValue evaluate_loss(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                        const SupernetState& state, MixMode mode, const Matrix& batch,
                        const IntVector& labels, int classes, LossKind kind, BuildStats* stats) {
  AssembledLoss al = assemble_loss(topo, ops, arch, state, mode, batch, labels, classes, kind,
                                   stats);
  return LossValue{al.net.tape.scalar(al.loss), accuracy(al.net.tape.value(al.net.logits), labels)};
}

LossValue evaluate_split(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                         const SupernetState& state, MixMode mode, const TaskData& task,
                         const LossSpec& spec) {
  const std::vector<int>* idx = nullptr;
  switch (spec.split) {
    case Split::Train:
      idx = &task.train_idx;
      break;
    case Split::Val:
      idx = &task.val_idx;
      break;
    case Split::Test:
      idx = &task.test_idx;
      break;
  }
  return evaluate_loss(topo, ops, arch, state, mode, task.gather_features(*idx),
                       task.gather_labels(*idx), task.classes, spec.kind);
}

double search_objective(const CellTopology& topo, const OperationSet& ops, const Matrix& arch,
                        const SupernetState& state, MixMode mode, const Matrix& val_batch,
                        const IntVector& val_labels, int classes, LossKind kind,
                        const RegularizerSpec& reg) {
  const LossValue v =
      evaluate_loss(topo, ops, arch, state, mode, val_batch, val_labels, classes, kind);
  return v.loss + reg.eta * regularizer(arch, reg);
}

}  // namespace proxnas
