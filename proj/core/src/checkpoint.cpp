#include "proxnas/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace proxnas {

namespace {

static_assert(sizeof(double) == 8, "checkpoint format assumes 64-bit doubles");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out_.write(reinterpret_cast<const char*>(b), 4);
  }

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out_.write(reinterpret_cast<const char*>(b), 8);
  }

  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void matrix(const Matrix& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string str() {
    const std::uint64_t n = u64();
    std::string s(n, '\0');
    read(s.data(), static_cast<std::streamsize>(n));
    return s;
  }

  Matrix matrix() {
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }

 private:
  void read(void* dst, std::streamsize n) {
    if (!in_.read(reinterpret_cast<char*>(dst), n)) {
      throw std::runtime_error("checkpoint: truncated file");
    }
  }

  std::istream& in_;
};

void write_supernet(Writer& w, const SupernetState& s) {
  w.u32(s.stem.size() != 0 ? 1 : 0);
  if (s.stem.size() != 0) w.matrix(s.stem);
  w.matrix(s.head);
  w.u32(static_cast<std::uint32_t>(s.weights.size()));
  for (const auto& per_edge : s.weights) {
    w.u32(static_cast<std::uint32_t>(per_edge.size()));
    for (const auto& per_op : per_edge) {
      w.u32(static_cast<std::uint32_t>(per_op.size()));
      for (const auto& arr : per_op) w.matrix(arr);
    }
  }
}

SupernetState read_supernet(Reader& r) {
  SupernetState s;
  if (r.u32() != 0) s.stem = r.matrix();
  s.head = r.matrix();
  s.weights.resize(r.u32());
  for (auto& per_edge : s.weights) {
    per_edge.resize(r.u32());
    for (auto& per_op : per_edge) {
      const std::uint32_t arrays = r.u32();
      per_op.reserve(arrays);
      for (std::uint32_t a = 0; a < arrays; ++a) per_op.push_back(r.matrix());
    }
  }
  return s;
}

void write_trace(Writer& w, const SearchTrace& t) {
  w.i64(t.first_box_violation);
  w.u32(t.aborted ? 1 : 0);
  w.str(t.abort_reason);
  w.u64(t.epochs.size());
  for (const EpochRecord& r : t.epochs) {
    w.i64(r.epoch);
    w.f64(r.train_loss);
    w.f64(r.val_loss);
    w.f64(r.val_loss_discrete);
    w.f64(r.discretization_gap);
    w.u32(r.box_violation ? 1 : 0);
    w.f64(r.t_arch_forward);
    w.f64(r.t_arch_backward);
    w.f64(r.t_weight_forward);
    w.f64(r.t_weight_backward);
    w.i64(r.arch_builder_calls);
    w.i64(r.weight_builder_calls);
    w.u64(r.selected.size());
    for (int s : r.selected) w.i64(s);
    w.matrix(r.arch);
    w.matrix(r.arch_discrete);
  }
}

SearchTrace read_trace(Reader& r) {
  SearchTrace t;
  t.first_box_violation = static_cast<int>(r.i64());
  t.aborted = r.u32() != 0;
  t.abort_reason = r.str();
  const std::uint64_t n = r.u64();
  t.epochs.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    EpochRecord e;
    e.epoch = static_cast<int>(r.i64());
    e.train_loss = r.f64();
    e.val_loss = r.f64();
    e.val_loss_discrete = r.f64();
    e.discretization_gap = r.f64();
    e.box_violation = r.u32() != 0;
    e.t_arch_forward = r.f64();
    e.t_arch_backward = r.f64();
    e.t_weight_forward = r.f64();
    e.t_weight_backward = r.f64();
    e.arch_builder_calls = static_cast<long>(r.i64());
    e.weight_builder_calls = static_cast<long>(r.i64());
    const std::uint64_t sel = r.u64();
    e.selected.reserve(sel);
    for (std::uint64_t s = 0; s < sel; ++s) e.selected.push_back(static_cast<int>(r.i64()));
    e.arch = r.matrix();
    e.arch_discrete = r.matrix();
    t.epochs.push_back(std::move(e));
  }
  return t;
}

}  // namespace

void save_checkpoint(const Checkpoint& cp, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(Checkpoint::kMagic, sizeof(Checkpoint::kMagic));
  Writer w(f);
  w.u32(Checkpoint::kVersion);
  w.str(cp.config_text);

  const SearchState& st = cp.state;
  w.i64(st.next_epoch);
  w.matrix(st.arch);
  w.matrix(st.arch_discrete);
  write_supernet(w, st.weights);
  w.matrix(st.adam.m);
  w.matrix(st.adam.v);
  w.i64(st.adam.step);
  w.f64(st.adam.beta1);
  w.f64(st.adam.beta2);
  w.f64(st.adam.eps);
  w.u64(st.sgd.velocity.size());
  for (const Matrix& v : st.sgd.velocity) w.matrix(v);
  w.f64(st.sgd.momentum);
  w.str(st.rng_state);
  write_trace(w, st.trace);
  w.i64(st.candidates_done);
  w.f64(st.best_loss);
  w.matrix(st.best_arch);
  write_supernet(w, st.best_weights);
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[sizeof(Checkpoint::kMagic)];
  if (!f.read(magic, sizeof(magic)) ||
      std::memcmp(magic, Checkpoint::kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("load_checkpoint: " + path + " is not a checkpoint file");
  }
  Reader r(f);
  const std::uint32_t version = r.u32();
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint cp;
  cp.config_text = r.str();

  SearchState& st = cp.state;
  st.next_epoch = static_cast<int>(r.i64());
  st.arch = r.matrix();
  st.arch_discrete = r.matrix();
  st.weights = read_supernet(r);
  st.adam.m = r.matrix();
  st.adam.v = r.matrix();
  st.adam.step = static_cast<long>(r.i64());
  st.adam.beta1 = r.f64();
  st.adam.beta2 = r.f64();
  st.adam.eps = r.f64();
  const std::uint64_t vel = r.u64();
  st.sgd.velocity.reserve(vel);
  for (std::uint64_t i = 0; i < vel; ++i) st.sgd.velocity.push_back(r.matrix());
  st.sgd.momentum = r.f64();
  st.rng_state = r.str();
  st.trace = read_trace(r);
  st.candidates_done = static_cast<int>(r.i64());
  st.best_loss = r.f64();
  st.best_arch = r.matrix();
  st.best_weights = read_supernet(r);
  return cp;
}

}  // namespace proxnas
