#pragma once

#include <vector>

#include "proxnas/rng.hpp"
#include "proxnas/search_space.hpp"
#include "proxnas/tape.hpp"

namespace proxnas {

/// How an edge combines its candidate operations.
///  - Softmax:   softmax(row) weighted sum, all operations evaluated.
///  - Discrete:  row must be one-hot in (0,1]; only that operation runs.
///  - Linear:    raw-coefficient weighted sum, all operations evaluated.
enum class MixMode { Softmax, Discrete, Linear };

/// Identifies one trainable array: (edge, op, array) for cell weights,
/// edge = kStem / kHead for the fixed input and classifier transforms.
struct WeightKey {
  static constexpr int kStem = -2;
  static constexpr int kHead = -1;
  int edge = 0;
  int op = 0;
  int array = 0;
};

/// All trainable network weights, keyed by (edge, operation).
struct SupernetState {
  std::vector<std::vector<std::vector<Matrix>>> weights;  // [edge][op][array]
  Matrix stem;  // (features x width); empty when width equals the feature dim
  Matrix head;  // (width x classes)

  static SupernetState initialize(const CellTopology& topo, const OperationSet& ops,
                                  int feature_dim, int width, int classes, Rng& rng);

  /// Pointers to every trainable array in a fixed order (stem, head, then
  /// edge-major / op-major / array-major). Used by the optimizer and the
  /// checkpoint writer.
  std::vector<Matrix*> arrays();
  std::vector<const Matrix*> arrays() const;

  long total_parameters() const;
};

struct BuildStats {
  long op_builder_calls = 0;
};

/// A fully recorded forward pass: cell plus classifier head.
struct AssembledNet {
  Tape tape;
  Var logits;
  Var arch;  // the (edges x ops) architecture input
  std::vector<Var> weight_vars;
  std::vector<WeightKey> weight_keys;
};

/// Records the cell computation on a fresh tape: per edge the mode's mixed
/// output, per node the sum of incoming edges, then the linear classifier
/// head. In Discrete mode only the selected operation per edge is built and
/// only its weights become tape inputs.
AssembledNet assemble_supernet(const CellTopology& topo, const OperationSet& ops,
                               const Matrix& arch, const SupernetState& state, MixMode mode,
                               const Matrix& batch, BuildStats* stats = nullptr);

/// Fraction of rows whose argmax logit matches the label.
double accuracy(const Matrix& logits, const IntVector& labels);

}  // namespace proxnas
