#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace proxnas {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

/// Primitives the tape can record. Everything is a dense double matrix;
/// scalars are 1x1.
enum class Primitive {
  kInput,
  kMatMul,
  kAdd,
  kMultiply,  // elementwise; either side may be 1x1 (scalar broadcast)
  kRelu,
  kTanh,
  kSigmoid,
  kScale,  // multiply by a compile-time constant scalar
  kSum,
  kSoftmaxCrossEntropy,  // logits vs. integer labels, mean over rows
  kMeanSquaredError,     // against a constant target, mean over entries
  kSoftmaxRows,          // rowwise softmax
  kEntry,                // select a single element as a 1x1 value
};

/// Handle to a node on a Tape. Cheap to copy; shape is fixed at creation.
struct Var {
  int id = -1;
  int rows = 0;
  int cols = 0;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode autodiff over a linear record of primitive operations.
///
/// The tape is built once per evaluation: record leaves with input(), compose
/// with the primitive methods, then call gradient() on a scalar output.
/// Recording is strictly append-only, so inputs always precede their uses and
/// the reverse sweep is a single backward pass over the node list. A tape is
/// single-owner; distinct tapes may be used concurrently.
class Tape {
 public:
  Var input(Matrix value);

  /// Generic entry point for primitives that take only Var operands.
  Var record(Primitive op, std::span<const Var> inputs);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var multiply(Var a, Var b);
  Var relu(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var scale(Var a, double factor);
  Var sum(Var a);
  Var softmax_rows(Var a);
  Var entry(Var a, int row, int col);
  Var softmax_cross_entropy(Var logits, IntVector labels);
  Var mean_squared_error(Var pred, Matrix target);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;

  /// d(output)/d(v) for each v in wrt, by reverse accumulation. The output
  /// must be scalar (1x1). Deterministic for a fixed tape; does not mutate
  /// the tape, so repeated calls give bit-identical results.
  std::vector<Matrix> gradient(Var output, std::span<const Var> wrt) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Primitive op;
    int a = -1;
    int b = -1;
    double factor = 0.0;  // kScale
    int row = 0;          // kEntry
    int col = 0;          // kEntry
    IntVector labels;     // kSoftmaxCrossEntropy
    Matrix aux;           // kMeanSquaredError target; kSoftmaxCrossEntropy probabilities
    Matrix value;
  };

  Var push(Node node);
  const Node& node(Var v) const;
  void check_on_tape(Var v, const char* who) const;

  std::vector<Node> nodes_;
};

}  // namespace proxnas
