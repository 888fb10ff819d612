#include "proxnas/supernet.hpp"

#include <cmath>
#include <stdexcept>

namespace proxnas {

namespace {

Matrix gaussian_init(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

}  // namespace

SupernetState SupernetState::initialize(const CellTopology& topo, const OperationSet& ops,
                                        int feature_dim, int width, int classes, Rng& rng) {
  SupernetState state;
  if (feature_dim != width) state.stem = gaussian_init(feature_dim, width, rng);
  state.head = gaussian_init(width, classes, rng);
  state.weights.resize(static_cast<std::size_t>(topo.edge_count()));
  for (auto& per_edge : state.weights) {
    per_edge.resize(ops.size());
    for (std::size_t k = 0; k < ops.size(); ++k) {
      for (const auto& [rows, cols] : ops[k].weight_shapes) {
        per_edge[k].push_back(gaussian_init(rows, cols, rng));
      }
    }
  }
  return state;
}

std::vector<Matrix*> SupernetState::arrays() {
  std::vector<Matrix*> out;
  if (stem.size() != 0) out.push_back(&stem);
  out.push_back(&head);
  for (auto& per_edge : weights) {
    for (auto& per_op : per_edge) {
      for (auto& arr : per_op) out.push_back(&arr);
    }
  }
  return out;
}

std::vector<const Matrix*> SupernetState::arrays() const {
  std::vector<const Matrix*> out;
  if (stem.size() != 0) out.push_back(&stem);
  out.push_back(&head);
  for (const auto& per_edge : weights) {
    for (const auto& per_op : per_edge) {
      for (const auto& arr : per_op) out.push_back(&arr);
    }
  }
  return out;
}

long SupernetState::total_parameters() const {
  long total = 0;
  for (const Matrix* m : arrays()) total += static_cast<long>(m->size());
  return total;
}

AssembledNet assemble_supernet(const CellTopology& topo, const OperationSet& ops,
                               const Matrix& arch, const SupernetState& state, MixMode mode,
                               const Matrix& batch, BuildStats* stats) {
  topo.validate();
  if (arch.rows() != topo.edge_count() || arch.cols() != static_cast<Eigen::Index>(ops.size())) {
    throw std::invalid_argument("assemble_supernet: architecture is " +
                                std::to_string(arch.rows()) + "x" + std::to_string(arch.cols()) +
                                ", expected " + std::to_string(topo.edge_count()) + "x" +
                                std::to_string(ops.size()));
  }
  if (mode == MixMode::Discrete && !is_discrete(arch)) {
    throw std::invalid_argument(
        "assemble_supernet: discrete mode requires one-hot rows with coefficients in (0,1]");
  }

  AssembledNet net;
  Tape& tape = net.tape;
  net.arch = tape.input(arch);
  Var coeffs = net.arch;
  if (mode == MixMode::Softmax) coeffs = tape.softmax_rows(net.arch);

  auto weight_vars_for = [&](int edge, int op) {
    std::vector<Var> vars;
    const auto& arrs = state.weights[static_cast<std::size_t>(edge)][static_cast<std::size_t>(op)];
    vars.reserve(arrs.size());
    for (std::size_t a = 0; a < arrs.size(); ++a) {
      Var v = tape.input(arrs[a]);
      net.weight_vars.push_back(v);
      net.weight_keys.push_back(WeightKey{edge, op, static_cast<int>(a)});
      vars.push_back(v);
    }
    return vars;
  };

  auto apply_op = [&](int edge, int op, Var x) {
    std::vector<Var> w = weight_vars_for(edge, op);
    if (stats != nullptr) ++stats->op_builder_calls;
    return ops[static_cast<std::size_t>(op)].apply(tape, x, w);
  };

  Var x0 = tape.input(batch);
  Var cell_in = x0;
  if (state.stem.size() != 0) {
    Var sv = tape.input(state.stem);
    net.weight_vars.push_back(sv);
    net.weight_keys.push_back(WeightKey{WeightKey::kStem, 0, 0});
    cell_in = tape.matmul(x0, sv);
  }

  std::vector<Var> node_value(static_cast<std::size_t>(topo.node_count));
  for (int in : topo.input_nodes) node_value[static_cast<std::size_t>(in)] = cell_in;

  std::vector<int> selection;
  if (mode == MixMode::Discrete) selection = selected_ops(arch);

  for (int j = 0; j < topo.node_count; ++j) {
    Var acc;
    for (int e = 0; e < topo.edge_count(); ++e) {
      if (topo.edges[static_cast<std::size_t>(e)].second != j) continue;
      const int i = topo.edges[static_cast<std::size_t>(e)].first;
      Var src = node_value[static_cast<std::size_t>(i)];
      if (!src.valid()) {
        throw std::invalid_argument("assemble_supernet: node " + std::to_string(i) +
                                    " used before it has a value");
      }
      Var edge_out;
      if (mode == MixMode::Discrete) {
        const int k = selection[static_cast<std::size_t>(e)];
        Var c = tape.entry(net.arch, e, k);
        edge_out = tape.multiply(c, apply_op(e, k, src));
      } else {
        for (std::size_t k = 0; k < ops.size(); ++k) {
          Var c = tape.entry(coeffs, e, static_cast<int>(k));
          Var term = tape.multiply(c, apply_op(e, static_cast<int>(k), src));
          edge_out = edge_out.valid() ? tape.add(edge_out, term) : term;
        }
      }
      acc = acc.valid() ? tape.add(acc, edge_out) : edge_out;
    }
    if (acc.valid()) node_value[static_cast<std::size_t>(j)] = acc;
  }

  Var out = node_value[static_cast<std::size_t>(topo.output_node)];
  Var head = tape.input(state.head);
  net.weight_vars.push_back(head);
  net.weight_keys.push_back(WeightKey{WeightKey::kHead, 0, 0});
  net.logits = tape.matmul(out, head);
  return net;
}

double accuracy(const Matrix& logits, const IntVector& labels) {
  if (logits.rows() == 0) return 0.0;
  long correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(r, c) > logits(r, best)) best = c;
    }
    if (static_cast<int>(best) == labels(r)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace proxnas
