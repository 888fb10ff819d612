#include <benchmark/benchmark.h>

#include "proxnas/prox.hpp"
#include "proxnas/rng.hpp"
#include "proxnas/tape.hpp"

namespace {

proxnas::Vector random_vector(int dim, proxnas::Rng& rng) {
  proxnas::Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform(-2.0, 2.0);
  return v;
}

void BM_ProxCardinalityBox(benchmark::State& state) {
  proxnas::Rng rng(17);
  const proxnas::Vector v = random_vector(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(proxnas::prox_cardinality_box(v));
  }
}
BENCHMARK(BM_ProxCardinalityBox)->Arg(8)->Arg(64)->Arg(512);

void BM_ProxBruteforce(benchmark::State& state) {
  proxnas::Rng rng(17);
  const proxnas::Vector v = random_vector(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(proxnas::prox_cardinality_box_bruteforce(v));
  }
}
BENCHMARK(BM_ProxBruteforce)->Arg(8)->Arg(64)->Arg(512);

void BM_ProxUnitBoxRows(benchmark::State& state) {
  proxnas::Rng rng(17);
  const int edges = static_cast<int>(state.range(0));
  proxnas::Matrix a(edges, 7);
  for (int e = 0; e < edges; ++e) {
    for (int k = 0; k < 7; ++k) a(e, k) = rng.uniform(-2.0, 2.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(proxnas::prox_unit_box_rows(a));
  }
}
BENCHMARK(BM_ProxUnitBoxRows)->Arg(6)->Arg(28);

}  // namespace
