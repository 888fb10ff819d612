#include "proxnas/search_space.hpp"

#include <cmath>
#include <stdexcept>

namespace proxnas {

namespace {

OperationDescriptor make_zero() {
  OperationDescriptor op;
  op.name = "zero";
  op.param_count = 0;
  op.apply = [](Tape& tape, Var x, std::span<const Var>) { return tape.scale(x, 0.0); };
  return op;
}

OperationDescriptor make_identity() {
  OperationDescriptor op;
  op.name = "identity";
  op.param_count = 0;
  op.apply = [](Tape&, Var x, std::span<const Var>) { return x; };
  return op;
}

OperationDescriptor make_linear(const std::string& name, int width,
                                Var (Tape::*activation)(Var)) {
  OperationDescriptor op;
  op.name = name;
  op.param_count = static_cast<long>(width) * width;
  op.weight_shapes = {{width, width}};
  op.apply = [activation](Tape& tape, Var x, std::span<const Var> w) {
    Var h = tape.matmul(x, w[0]);
    return activation == nullptr ? h : (tape.*activation)(h);
  };
  return op;
}

OperationDescriptor make_wide_linear(int width) {
  // Twice-wide intermediate folded back with a fixed averaging matrix, so the
  // map is an over-parameterized linear transform (2*width^2 trainables)
  // that contains plain `linear` as a special case.
  OperationDescriptor op;
  op.name = "wide_linear";
  op.param_count = 2L * width * width;
  op.weight_shapes = {{width, 2 * width}};
  op.apply = [width](Tape& tape, Var x, std::span<const Var> w) {
    Var h = tape.matmul(x, w[0]);
    Matrix fold(2 * width, width);
    fold << 0.5 * Matrix::Identity(width, width), 0.5 * Matrix::Identity(width, width);
    return tape.matmul(h, tape.input(std::move(fold)));
  };
  return op;
}

}  // namespace

OperationSet make_operation_set(const std::vector<std::string>& names, int width) {
  if (width < 1) throw std::invalid_argument("make_operation_set: width must be >= 1");
  if (names.empty()) throw std::invalid_argument("make_operation_set: empty operation list");
  OperationSet ops;
  ops.reserve(names.size());
  for (const std::string& name : names) {
    if (name == "zero") {
      ops.push_back(make_zero());
    } else if (name == "identity") {
      ops.push_back(make_identity());
    } else if (name == "linear") {
      ops.push_back(make_linear("linear", width, nullptr));
    } else if (name == "relu_linear") {
      ops.push_back(make_linear("relu_linear", width, &Tape::relu));
    } else if (name == "tanh_linear") {
      ops.push_back(make_linear("tanh_linear", width, &Tape::tanh));
    } else if (name == "sigmoid_linear") {
      ops.push_back(make_linear("sigmoid_linear", width, &Tape::sigmoid));
    } else if (name == "wide_linear") {
      ops.push_back(make_wide_linear(width));
    } else {
      throw std::invalid_argument("make_operation_set: unknown operation '" + name + "'");
    }
  }
  return ops;
}

std::vector<std::string> default_operation_names() {
  return {"zero",         "identity",       "linear",     "relu_linear",
          "tanh_linear", "sigmoid_linear", "wide_linear"};
}

OperationSet default_operation_set(int width) {
  return make_operation_set(default_operation_names(), width);
}

std::vector<long> param_counts(const OperationSet& ops) {
  std::vector<long> out;
  out.reserve(ops.size());
  for (const auto& op : ops) out.push_back(op.param_count);
  return out;
}

void CellTopology::validate() const {
  if (node_count < 2) throw std::invalid_argument("CellTopology: need at least 2 nodes");
  if (input_nodes.empty()) throw std::invalid_argument("CellTopology: no input nodes");
  if (output_node < 0 || output_node >= node_count) {
    throw std::invalid_argument("CellTopology: output node out of range");
  }
  std::vector<int> incoming(static_cast<std::size_t>(node_count), 0);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j >= node_count || i >= j) {
      throw std::invalid_argument("CellTopology: edge (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") must satisfy 0 <= i < j < nodes");
    }
    ++incoming[static_cast<std::size_t>(j)];
  }
  std::vector<bool> is_input(static_cast<std::size_t>(node_count), false);
  for (int in : input_nodes) {
    if (in < 0 || in >= node_count) throw std::invalid_argument("CellTopology: bad input node");
    is_input[static_cast<std::size_t>(in)] = true;
  }
  for (int n = 0; n < node_count; ++n) {
    if (!is_input[static_cast<std::size_t>(n)] && incoming[static_cast<std::size_t>(n)] == 0) {
      throw std::invalid_argument("CellTopology: node " + std::to_string(n) +
                                  " has no incoming edge");
    }
  }
}

CellTopology CellTopology::chain(int nodes) {
  CellTopology t;
  t.node_count = nodes;
  t.input_nodes = {0};
  t.output_node = nodes - 1;
  for (int i = 0; i + 1 < nodes; ++i) t.edges.emplace_back(i, i + 1);
  t.validate();
  return t;
}

CellTopology CellTopology::complete(int nodes) {
  CellTopology t;
  t.node_count = nodes;
  t.input_nodes = {0};
  t.output_node = nodes - 1;
  for (int j = 1; j < nodes; ++j) {
    for (int i = 0; i < j; ++i) t.edges.emplace_back(i, j);
  }
  t.validate();
  return t;
}

Matrix derive_final_architecture(const Matrix& arch) {
  Matrix out = Matrix::Zero(arch.rows(), arch.cols());
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < arch.cols(); ++k) {
      if (arch(r, k) > arch(r, best)) best = k;
    }
    out(r, best) = 1.0;
  }
  return out;
}

bool rows_in_unit_box(const Matrix& arch) {
  return (arch.array() >= 0.0).all() && (arch.array() <= 1.0).all();
}

bool is_discrete(const Matrix& arch) {
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    int nonzeros = 0;
    for (Eigen::Index k = 0; k < arch.cols(); ++k) {
      const double v = arch(r, k);
      if (v != 0.0) {
        ++nonzeros;
        if (v < 0.0 || v > 1.0) return false;
      }
    }
    if (nonzeros != 1) return false;
  }
  return true;
}

std::vector<int> selected_ops(const Matrix& arch) {
  if (!is_discrete(arch)) {
    throw std::invalid_argument("selected_ops: architecture rows are not discrete");
  }
  std::vector<int> sel(static_cast<std::size_t>(arch.rows()));
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    for (Eigen::Index k = 0; k < arch.cols(); ++k) {
      if (arch(r, k) != 0.0) {
        sel[static_cast<std::size_t>(r)] = static_cast<int>(k);
        break;
      }
    }
  }
  return sel;
}

std::vector<int> argmax_ops(const Matrix& arch) {
  std::vector<int> sel(static_cast<std::size_t>(arch.rows()));
  for (Eigen::Index r = 0; r < arch.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < arch.cols(); ++k) {
      if (arch(r, k) > arch(r, best)) best = k;
    }
    sel[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return sel;
}

Matrix mixed_output_softmax(const Vector& edge_row, const std::vector<Matrix>& op_outputs) {
  if (op_outputs.empty()) {
    throw std::invalid_argument("mixed_output_softmax: empty operation list");
  }
  if (edge_row.size() != static_cast<Eigen::Index>(op_outputs.size())) {
    throw std::invalid_argument("mixed_output_softmax: row size " +
                                std::to_string(edge_row.size()) + " vs " +
                                std::to_string(op_outputs.size()) + " outputs");
  }
  const double m = edge_row.maxCoeff();
  Eigen::ArrayXd weights = (edge_row.array() - m).exp();
  weights /= weights.sum();
  Matrix out = Matrix::Zero(op_outputs[0].rows(), op_outputs[0].cols());
  for (std::size_t k = 0; k < op_outputs.size(); ++k) {
    if (op_outputs[k].rows() != out.rows() || op_outputs[k].cols() != out.cols()) {
      throw std::invalid_argument("mixed_output_softmax: operation outputs disagree in shape");
    }
    out += weights(static_cast<Eigen::Index>(k)) * op_outputs[k];
  }
  return out;
}

Matrix mixed_output_discrete(const Vector& edge_row,
                             std::span<const std::function<Matrix()>> op_outputs) {
  if (edge_row.size() != static_cast<Eigen::Index>(op_outputs.size())) {
    throw std::invalid_argument("mixed_output_discrete: row size " +
                                std::to_string(edge_row.size()) + " vs " +
                                std::to_string(op_outputs.size()) + " outputs");
  }
  int nonzero = -1;
  for (Eigen::Index k = 0; k < edge_row.size(); ++k) {
    if (edge_row(k) != 0.0) {
      if (nonzero >= 0) {
        throw std::invalid_argument("mixed_output_discrete: more than one nonzero entry");
      }
      if (edge_row(k) < 0.0 || edge_row(k) > 1.0) {
        throw std::invalid_argument("mixed_output_discrete: coefficient outside (0,1]");
      }
      nonzero = static_cast<int>(k);
    }
  }
  if (nonzero < 0) {
    throw std::invalid_argument("mixed_output_discrete: no nonzero entry in row");
  }
  return edge_row(nonzero) * op_outputs[static_cast<std::size_t>(nonzero)]();
}

}  // namespace proxnas
