#include "proxnas/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace proxnas {

namespace {

std::string shape_of(int rows, int cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

std::string shape_of(const Var& v) { return shape_of(v.rows, v.cols); }

[[noreturn]] void shape_error(const char* who, const Var& a, const Var& b) {
  throw std::invalid_argument(std::string(who) + ": shapes do not conform: " + shape_of(a) +
                              " vs " + shape_of(b));
}

bool is_scalar(const Var& v) { return v.rows == 1 && v.cols == 1; }

}  // namespace

Var Tape::push(Node node) {
  const int id = static_cast<int>(nodes_.size());
  const int rows = static_cast<int>(node.value.rows());
  const int cols = static_cast<int>(node.value.cols());
  nodes_.push_back(std::move(node));
  return Var{id, rows, cols};
}

const Tape::Node& Tape::node(Var v) const {
  check_on_tape(v, "Tape::node");
  return nodes_[static_cast<std::size_t>(v.id)];
}

void Tape::check_on_tape(Var v, const char* who) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::invalid_argument(std::string(who) + ": variable is not on this tape");
  }
}

Var Tape::input(Matrix value) {
  Node n;
  n.op = Primitive::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::record(Primitive op, std::span<const Var> inputs) {
  auto expect = [&](std::size_t k) {
    if (inputs.size() != k) {
      throw std::invalid_argument("Tape::record: primitive expects " + std::to_string(k) +
                                  " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (op) {
    case Primitive::kMatMul:
      expect(2);
      return matmul(inputs[0], inputs[1]);
    case Primitive::kAdd:
      expect(2);
      return add(inputs[0], inputs[1]);
    case Primitive::kMultiply:
      expect(2);
      return multiply(inputs[0], inputs[1]);
    case Primitive::kRelu:
      expect(1);
      return relu(inputs[0]);
    case Primitive::kTanh:
      expect(1);
      return tanh(inputs[0]);
    case Primitive::kSigmoid:
      expect(1);
      return sigmoid(inputs[0]);
    case Primitive::kSum:
      expect(1);
      return sum(inputs[0]);
    case Primitive::kSoftmaxRows:
      expect(1);
      return softmax_rows(inputs[0]);
    default:
      throw std::invalid_argument(
          "Tape::record: primitive requires a payload; use its dedicated method");
  }
}

Var Tape::matmul(Var a, Var b) {
  check_on_tape(a, "matmul");
  check_on_tape(b, "matmul");
  if (a.cols != b.rows) shape_error("matmul", a, b);
  Node n;
  n.op = Primitive::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.value = node(a).value * node(b).value;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  check_on_tape(a, "add");
  check_on_tape(b, "add");
  if (a.rows != b.rows || a.cols != b.cols) shape_error("add", a, b);
  Node n;
  n.op = Primitive::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.value = node(a).value + node(b).value;
  return push(std::move(n));
}

Var Tape::multiply(Var a, Var b) {
  check_on_tape(a, "multiply");
  check_on_tape(b, "multiply");
  const bool same = a.rows == b.rows && a.cols == b.cols;
  if (!same && !is_scalar(a) && !is_scalar(b)) shape_error("multiply", a, b);
  Node n;
  n.op = Primitive::kMultiply;
  n.a = a.id;
  n.b = b.id;
  if (same) {
    n.value = node(a).value.cwiseProduct(node(b).value);
  } else if (is_scalar(a)) {
    n.value = node(a).value(0, 0) * node(b).value;
  } else {
    n.value = node(b).value(0, 0) * node(a).value;
  }
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  check_on_tape(a, "relu");
  Node n;
  n.op = Primitive::kRelu;
  n.a = a.id;
  n.value = node(a).value.cwiseMax(0.0);
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  check_on_tape(a, "tanh");
  Node n;
  n.op = Primitive::kTanh;
  n.a = a.id;
  n.value = node(a).value.array().tanh().matrix();
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  check_on_tape(a, "sigmoid");
  Node n;
  n.op = Primitive::kSigmoid;
  n.a = a.id;
  n.value = (1.0 / (1.0 + (-node(a).value.array()).exp())).matrix();
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) {
  check_on_tape(a, "scale");
  Node n;
  n.op = Primitive::kScale;
  n.a = a.id;
  n.factor = factor;
  n.value = factor * node(a).value;
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  check_on_tape(a, "sum");
  Node n;
  n.op = Primitive::kSum;
  n.a = a.id;
  n.value = Matrix::Constant(1, 1, node(a).value.sum());
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  check_on_tape(a, "softmax_rows");
  const Matrix& x = node(a).value;
  Matrix s(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    Eigen::ArrayXd e = (x.row(r).array() - m).exp();
    s.row(r) = (e / e.sum()).matrix();
  }
  Node n;
  n.op = Primitive::kSoftmaxRows;
  n.a = a.id;
  n.value = std::move(s);
  return push(std::move(n));
}

Var Tape::entry(Var a, int row, int col) {
  check_on_tape(a, "entry");
  if (row < 0 || row >= a.rows || col < 0 || col >= a.cols) {
    throw std::invalid_argument("entry: index (" + std::to_string(row) + "," +
                                std::to_string(col) + ") outside " + shape_of(a));
  }
  Node n;
  n.op = Primitive::kEntry;
  n.a = a.id;
  n.row = row;
  n.col = col;
  n.value = Matrix::Constant(1, 1, node(a).value(row, col));
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, IntVector labels) {
  check_on_tape(logits, "softmax_cross_entropy");
  if (labels.size() != logits.rows) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + shape_of(logits) + " logits");
  }
  const Matrix& x = node(logits).value;
  Matrix probs(x.rows(), x.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const int y = labels(r);
    if (y < 0 || y >= logits.cols) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) +
                                  " outside [0," + std::to_string(logits.cols) + ") at row " +
                                  std::to_string(r));
    }
    const double m = x.row(r).maxCoeff();
    Eigen::ArrayXd z = x.row(r).array() - m;
    const double lse = std::log(z.exp().sum());
    probs.row(r) = (z - lse).exp().matrix();
    total += lse - z(y);
  }
  Node n;
  n.op = Primitive::kSoftmaxCrossEntropy;
  n.a = logits.id;
  n.labels = std::move(labels);
  n.aux = std::move(probs);
  n.value = Matrix::Constant(1, 1, total / static_cast<double>(x.rows()));
  return push(std::move(n));
}

Var Tape::mean_squared_error(Var pred, Matrix target) {
  check_on_tape(pred, "mean_squared_error");
  if (target.rows() != pred.rows || target.cols() != pred.cols) {
    Var t{-1, static_cast<int>(target.rows()), static_cast<int>(target.cols())};
    shape_error("mean_squared_error", pred, t);
  }
  Node n;
  n.op = Primitive::kMeanSquaredError;
  n.a = pred.id;
  const double mse = (node(pred).value - target).squaredNorm() /
                     static_cast<double>(target.rows() * target.cols());
  n.aux = std::move(target);
  n.value = Matrix::Constant(1, 1, mse);
  return push(std::move(n));
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

double Tape::scalar(Var v) const {
  if (!is_scalar(v)) {
    throw std::invalid_argument("Tape::scalar: variable has shape " + shape_of(v));
  }
  return node(v).value(0, 0);
}

std::vector<Matrix> Tape::gradient(Var output, std::span<const Var> wrt) const {
  check_on_tape(output, "gradient");
  if (!is_scalar(output)) {
    throw std::invalid_argument("gradient: output must be scalar, got " + shape_of(output));
  }
  for (const Var& v : wrt) check_on_tape(v, "gradient");

  std::vector<Matrix> adj(static_cast<std::size_t>(output.id) + 1);
  auto bump = [&](int id, auto&& contribution) {
    Matrix& slot = adj[static_cast<std::size_t>(id)];
    if (slot.size() == 0) {
      const Node& nd = nodes_[static_cast<std::size_t>(id)];
      slot = Matrix::Zero(nd.value.rows(), nd.value.cols());
    }
    slot += contribution;
  };

  adj[static_cast<std::size_t>(output.id)] = Matrix::Constant(1, 1, 1.0);

  for (int i = output.id; i >= 0; --i) {
    const Matrix& g = adj[static_cast<std::size_t>(i)];
    if (g.size() == 0) continue;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Primitive::kInput:
        break;
      case Primitive::kMatMul: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& b = nodes_[static_cast<std::size_t>(n.b)].value;
        bump(n.a, g * b.transpose());
        bump(n.b, a.transpose() * g);
        break;
      }
      case Primitive::kAdd:
        bump(n.a, g);
        bump(n.b, g);
        break;
      case Primitive::kMultiply: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        const Matrix& b = nodes_[static_cast<std::size_t>(n.b)].value;
        const bool same = a.rows() == b.rows() && a.cols() == b.cols();
        if (same) {
          bump(n.a, g.cwiseProduct(b));
          bump(n.b, g.cwiseProduct(a));
        } else if (a.size() == 1) {
          bump(n.a, Matrix::Constant(1, 1, g.cwiseProduct(b).sum()));
          bump(n.b, a(0, 0) * g);
        } else {
          bump(n.b, Matrix::Constant(1, 1, g.cwiseProduct(a).sum()));
          bump(n.a, b(0, 0) * g);
        }
        break;
      }
      case Primitive::kRelu: {
        const Matrix& a = nodes_[static_cast<std::size_t>(n.a)].value;
        // Subgradient 0 at the kink.
        bump(n.a, (a.array() > 0.0).cast<double>().matrix().cwiseProduct(g));
        break;
      }
      case Primitive::kTanh: {
        const Matrix& y = n.value;
        bump(n.a, ((1.0 - y.array().square()) * g.array()).matrix());
        break;
      }
      case Primitive::kSigmoid: {
        const Matrix& y = n.value;
        bump(n.a, (y.array() * (1.0 - y.array()) * g.array()).matrix());
        break;
      }
      case Primitive::kScale:
        bump(n.a, n.factor * g);
        break;
      case Primitive::kSum: {
        const Node& src = nodes_[static_cast<std::size_t>(n.a)];
        bump(n.a, Matrix::Constant(src.value.rows(), src.value.cols(), g(0, 0)));
        break;
      }
      case Primitive::kSoftmaxRows: {
        const Matrix& s = n.value;
        Matrix d(s.rows(), s.cols());
        for (Eigen::Index r = 0; r < s.rows(); ++r) {
          const double dot = g.row(r).cwiseProduct(s.row(r)).sum();
          d.row(r) = (s.row(r).array() * (g.row(r).array() - dot)).matrix();
        }
        bump(n.a, d);
        break;
      }
      case Primitive::kEntry: {
        const Node& src = nodes_[static_cast<std::size_t>(n.a)];
        Matrix d = Matrix::Zero(src.value.rows(), src.value.cols());
        d(n.row, n.col) = g(0, 0);
        bump(n.a, d);
        break;
      }
      case Primitive::kSoftmaxCrossEntropy: {
        const Matrix& probs = n.aux;
        Matrix d = probs;
        for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, n.labels(r)) -= 1.0;
        bump(n.a, (g(0, 0) / static_cast<double>(d.rows())) * d);
        break;
      }
      case Primitive::kMeanSquaredError: {
        const Matrix& p = nodes_[static_cast<std::size_t>(n.a)].value;
        const double scale = 2.0 * g(0, 0) / static_cast<double>(p.rows() * p.cols());
        bump(n.a, scale * (p - n.aux));
        break;
      }
    }
  }

  std::vector<Matrix> out;
  out.reserve(wrt.size());
  for (const Var& v : wrt) {
    if (v.id <= output.id && adj[static_cast<std::size_t>(v.id)].size() != 0) {
      out.push_back(adj[static_cast<std::size_t>(v.id)]);
    } else {
      out.push_back(Matrix::Zero(v.rows, v.cols));
    }
  }
  return out;
}

}  // namespace proxnas
