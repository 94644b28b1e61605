#include "repdyn/dynamics.hpp"
#include "repdyn/gridworld.hpp"
#include "repdyn/linalg.hpp"
#include "repdyn/mdp.hpp"
#include "repdyn/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace repdyn;

namespace {

MarkovChain chain30() {
  const Mdp mdp = build_reference_chain();
  return induce(mdp, Policy::uniform(30, 2), 0.9);
}

MarkovChain four_rooms_chain() {
  const auto [mdp, policy] = build_four_rooms();
  return induce(mdp, policy, 0.9);
}

void BM_MatrixExponential(benchmark::State& state) {
  const MarkovChain c = state.range(0) == 30 ? chain30() : four_rooms_chain();
  const Matrix g = c.gamma() * c.transition() - Matrix::Identity(c.n_states(), c.n_states());
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(g, 10.0));
}
BENCHMARK(BM_MatrixExponential)->Arg(30)->Arg(105);

void BM_EigenDecompose(benchmark::State& state) {
  const MarkovChain c = state.range(0) == 30 ? chain30() : four_rooms_chain();
  for (auto _ : state) benchmark::DoNotOptimize(eigen_decompose(c.transition()));
}
BENCHMARK(BM_EigenDecompose)->Arg(30)->Arg(105);

void BM_Ebf(benchmark::State& state) {
  const MarkovChain c = state.range(0) == 30 ? chain30() : four_rooms_chain();
  for (auto _ : state) benchmark::DoNotOptimize(ebf(c.transition(), 10));
}
BENCHMARK(BM_Ebf)->Arg(30)->Arg(105);

void BM_Rsbf(benchmark::State& state) {
  const MarkovChain c = chain30();
  const Matrix sigma = Matrix::Identity(30, 30);
  for (auto _ : state) benchmark::DoNotOptimize(rsbf(c.transition(), 0.9, 4, sigma));
}
BENCHMARK(BM_Rsbf);

void BM_GrassmannDistance(benchmark::State& state) {
  const Subspace a = orthonormalize(sample_features(30, 4, 1));
  const Subspace b = orthonormalize(sample_features(30, 4, 2));
  for (auto _ : state) benchmark::DoNotOptimize(grassmann_distance(a, b));
}
BENCHMARK(BM_GrassmannDistance);

// One unit of simulated time (1000 RK4 steps) of the fixed-weight ensemble.
void BM_EnsembleFlowUnitTime(benchmark::State& state) {
  const MarkovChain c = chain30().with_reward(Vector::Zero(30));
  const auto heads = static_cast<int>(state.range(0));
  const EnsembleState s{sample_features(30, 4, 1), sample_weights(heads, 4, 1.0 / heads, 2), std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_flow(c, s, 1.0, 0.0, {1.0}, 1e-3, false));
}
BENCHMARK(BM_EnsembleFlowUnitTime)->Arg(1)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

// Same with trained weights, which takes the per-head path.
void BM_TrainedEnsembleFlowUnitTime(benchmark::State& state) {
  const MarkovChain c = four_rooms_chain();
  const EnsembleState s{sample_features(105, 10, 1), sample_weights(20, 10, 1.0 / 20, 2), std::nullopt};
  for (auto _ : state) benchmark::DoNotOptimize(ensemble_flow(c, s, 1.0, 1.0, {1.0}, 1e-3, false));
}
BENCHMARK(BM_TrainedEnsembleFlowUnitTime)->Unit(benchmark::kMillisecond);

}  // namespace
