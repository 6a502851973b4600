#include <benchmark/benchmark.h>

#include "fourmoment/montecarlo.hpp"
#include "fourmoment/oracle.hpp"
#include "fourmoment/sampler.hpp"
#include "fourmoment/spectral.hpp"
#include "fourmoment/systems.hpp"

using namespace fourmoment;

namespace {

FiniteMarkovModel reflected5() { return reflected_walk(5, 0.3, 0.2); }

Observable walk_obs(const FiniteMarkovModel& model) {
  Eigen::VectorXd v(model.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  return center(Observable::from_values(v), model);
}

void BM_OracleFourthMoments(benchmark::State& state) {
  const FiniteMarkovModel model = reflected5();
  const Observable phi = walk_obs(model);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    MomentOracle oracle(model, phi);
    benchmark::DoNotOptimize(oracle.fourth_moments(n));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_OracleFourthMoments)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_McThroughput(benchmark::State& state) {
  const FiniteMarkovModel model = reflected5();
  const Observable phi = walk_obs(model);
  McOptions opts;
  opts.n = state.range(0);
  opts.reps = 200;
  opts.seed = 7;
  const auto sampler = model_sampler(model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_s4(*sampler, phi, opts));
  }
  state.SetItemsProcessed(state.iterations() * opts.n * opts.reps);
}
BENCHMARK(BM_McThroughput)->Arg(256)->Arg(1024)->Arg(4096);

void BM_PowerIteration(benchmark::State& state) {
  const auto k = static_cast<int>(state.range(0));
  const FiniteMarkovModel model = ulam(IntervalMap::doubling(), {k, 256});
  for (auto _ : state) {
    benchmark::DoNotOptimize(subdominant_modulus(model));
  }
}
BENCHMARK(BM_PowerIteration)->Arg(16)->Arg(64)->Arg(256);

void BM_UlamAssembly(benchmark::State& state) {
  const auto k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ulam(IntervalMap::doubling(), {k, 128}));
  }
}
BENCHMARK(BM_UlamAssembly)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
