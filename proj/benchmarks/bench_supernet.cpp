#include <benchmark/benchmark.h>

#include "proxnas/objective.hpp"
#include "proxnas/prox.hpp"
#include "proxnas/rng.hpp"
#include "proxnas/tasks.hpp"

namespace {

using namespace proxnas;

struct Fixture {
  TaskData task = gen_two_moons(512, 0.15, 3);
  CellTopology topo = CellTopology::complete(4);
  OperationSet ops = default_operation_set(16);
  SupernetState weights;
  Matrix x;
  IntVector y;

  Fixture() {
    Rng rng(5);
    weights = SupernetState::initialize(topo, ops, task.feature_dim(), 16, task.classes, rng);
    x = task.gather_features(task.train_idx);
    y = task.gather_labels(task.train_idx);
  }
};

void BM_ForwardBackwardDiscrete(benchmark::State& state) {
  Fixture f;
  Matrix arch = Matrix::Constant(f.topo.edge_count(), 7, 0.5);
  arch = prox_cardinality_rows(arch + 0.01 * Matrix::Random(arch.rows(), arch.cols()));
  for (auto _ : state) {
    AssembledLoss al = assemble_loss(f.topo, f.ops, arch, f.weights, MixMode::Discrete, f.x, f.y,
                                     f.task.classes, LossKind::CrossEntropy);
    const Var v = al.net.arch;
    benchmark::DoNotOptimize(al.net.tape.gradient(al.loss, std::span<const Var>(&v, 1)));
  }
}
BENCHMARK(BM_ForwardBackwardDiscrete);

void BM_ForwardBackwardSoftmax(benchmark::State& state) {
  Fixture f;
  const Matrix arch = Matrix::Zero(f.topo.edge_count(), 7);
  for (auto _ : state) {
    AssembledLoss al = assemble_loss(f.topo, f.ops, arch, f.weights, MixMode::Softmax, f.x, f.y,
                                     f.task.classes, LossKind::CrossEntropy);
    const Var v = al.net.arch;
    benchmark::DoNotOptimize(al.net.tape.gradient(al.loss, std::span<const Var>(&v, 1)));
  }
}
BENCHMARK(BM_ForwardBackwardSoftmax);

}  // namespace

BENCHMARK_MAIN();
