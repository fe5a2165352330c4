#include <benchmark/benchmark.h>

#include "cayley/experiments.hpp"
#include "cayley/sampler.hpp"

using namespace cayley;

namespace {

PullbackTarget bingham(Index p) {
  SpikedDataSpec spec;
  spec.p = p;
  spec.seed = 3;
  const SpikedData data = simulate_spiked_data(spec);
  return PullbackTarget(bingham_log_density(BinghamParams::from_data(data.y, 1.0, spec.lambda)), ManifoldDims(p, 3));
}

void BM_RandomWalkStep(benchmark::State& state) {
  const PullbackTarget target = bingham(state.range(0));
  ProposalConfig prop;
  prop.scale = 0.01;
  Rng rng(1);
  ChainState s = make_state(target, Vector::Zero(target.dim()));
  for (auto _ : state) s = mh_step(s, target, prop, rng);
}

void BM_LeapfrogStep(benchmark::State& state) {
  const PullbackTarget target = bingham(state.range(0));
  ProposalConfig prop = default_bingham_options().proposal;
  Rng rng(1);
  ChainState s = make_state(target, Vector::Zero(target.dim()));
  for (auto _ : state) s = leapfrog_step(s, target, prop, rng);
}

}  // namespace

BENCHMARK(BM_RandomWalkStep)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_LeapfrogStep)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
