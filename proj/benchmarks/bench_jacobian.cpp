#include <benchmark/benchmark.h>

#include "cayley/jacobian.hpp"
#include "cayley/rng.hpp"

using namespace cayley;

namespace {

StiefelCoords coords(Index p, Index k) {
  const ManifoldDims dims(p, k);
  Rng rng(17);
  return StiefelCoords(dims, rng.normal_vector(dims.stiefel_dim()));
}

void BM_LogJacobianNaive(benchmark::State& state) {
  const StiefelCoords phi = coords(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(log_jacobian_naive(derivative_stiefel(phi)));
}

void BM_LogJacobianDenseBlock(benchmark::State& state) {
  const StiefelCoords phi = coords(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(log_jacobian_dense_block_stiefel(phi));
}

void BM_LogJacobianBlock(benchmark::State& state) {
  const StiefelCoords phi = coords(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(log_jacobian_block_stiefel(phi));
}

void BM_LogJacobianGradient(benchmark::State& state) {
  const StiefelCoords phi = coords(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(log_jacobian_gradient_stiefel(phi, 1e-5));
}

void BM_CayleyForward(benchmark::State& state) {
  const StiefelCoords phi = coords(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(cayley_forward_stiefel(phi));
}

void sizes(benchmark::internal::Benchmark* b) {
  b->Args({8, 4})->Args({50, 3})->Args({100, 5})->Args({200, 5})->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_LogJacobianNaive)->Apply(sizes);
BENCHMARK(BM_LogJacobianDenseBlock)->Apply(sizes);
BENCHMARK(BM_LogJacobianBlock)->Apply(sizes);
BENCHMARK(BM_LogJacobianGradient)->Apply(sizes);
BENCHMARK(BM_CayleyForward)->Apply(sizes);

BENCHMARK_MAIN();
