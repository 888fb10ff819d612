#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proxnas/tape.hpp"

namespace proxnas {

/// One candidate operation for an edge. The transform maps a (batch x width)
/// activation to another, drawing trainable arrays from `weight_shapes`.
/// `param_count` equals the number of trainable scalars the transform uses.
struct OperationDescriptor {
  std::string name;
  long param_count = 0;
  std::vector<std::pair<int, int>> weight_shapes;
  std::function<Var(Tape&, Var, std::span<const Var>)> apply;
};

using OperationSet = std::vector<OperationDescriptor>;

/// Builds an operation set by name for the given cell width.
/// Known names: zero, identity, linear, relu_linear, tanh_linear,
/// sigmoid_linear, wide_linear.
OperationSet make_operation_set(const std::vector<std::string>& names, int width);

/// The default 7-operation space.
OperationSet default_operation_set(int width);
std::vector<std::string> default_operation_names();

std::vector<long> param_counts(const OperationSet& ops);

/// Cell DAG. Edges only run from lower to higher node index, so the graph is
/// acyclic by construction. The output node's value feeds the classifier.
struct CellTopology {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> input_nodes;
  int output_node = 0;

  int edge_count() const { return static_cast<int>(edges.size()); }

  /// Checks edge orientation and that every non-input node has at least one
  /// incoming edge; throws on violation.
  void validate() const;

  /// Path graph: edges (0,1), (1,2), ...
  static CellTopology chain(int nodes);
  /// Every lower node feeds every higher node.
  static CellTopology complete(int nodes);
};

/// Rowwise one-hot with coefficient 1 at the maximal entry (lowest index on
/// ties). The post-hoc discretization step used by relaxed search.
Matrix derive_final_architecture(const Matrix& arch);

bool rows_in_unit_box(const Matrix& arch);

/// True when every row has exactly one nonzero entry, in (0,1].
bool is_discrete(const Matrix& arch);

/// Per-row index of the single nonzero entry; requires is_discrete.
std::vector<int> selected_ops(const Matrix& arch);

/// Rowwise argmax (lowest index on ties), defined for any matrix.
std::vector<int> argmax_ops(const Matrix& arch);

/// Softmax-relaxed mixture: sum_m softmax(row)_m * outputs[m].
Matrix mixed_output_softmax(const Vector& edge_row, const std::vector<Matrix>& op_outputs);

/// Discrete mixture a_k * O_k(x). The row must have exactly one nonzero
/// entry, in (0,1]; only that operation's thunk is invoked.
Matrix mixed_output_discrete(const Vector& edge_row,
                             std::span<const std::function<Matrix()>> op_outputs);

}  // namespace proxnas
