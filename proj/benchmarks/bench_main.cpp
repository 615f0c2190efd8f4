#include <benchmark/benchmark.h>

#include <random>

#include "syndromestat/codes.hpp"
#include "syndromestat/error_config.hpp"
#include "syndromestat/exact.hpp"
#include "syndromestat/gf2.hpp"
#include "syndromestat/monte_carlo.hpp"

using namespace syndromestat;

namespace {

NoiseParams rates(double px, double py, double pz, double q) {
  NoiseParams p;
  p.p_x = px;
  p.p_y = py;
  p.p_z = pz;
  p.q = q;
  return p;
}

void BM_Gf2Rank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  BinaryMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.row(i).set(j, rng() & 1);
  for (auto _ : state) benchmark::DoNotOptimize(rank(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gf2Rank)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_ToricCodeConstruction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_toric(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ToricCodeConstruction)->Arg(8)->Arg(16)->Arg(32);

void BM_TransferPartitionFunction(benchmark::State& state) {
  const auto code = build_repetition(1, static_cast<int>(state.range(0)));
  const auto model = build_single_flavor(code, rates(0.1, 0.0, 0.0, 0.05), 4);
  EngineOptions o;
  o.engine = ExactEngine::Transfer;
  for (auto _ : state) benchmark::DoNotOptimize(partition_function(model, 2, o));
}
BENCHMARK(BM_TransferPartitionFunction)->DenseRange(4, 12, 4)->Unit(benchmark::kMillisecond);

void BM_CoherentInformationToric(benchmark::State& state) {
  const auto code = build_toric(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(coherent_information(code, rates(0.05, 0.02, 0.08, 0.05), 1, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_CoherentInformationToric)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_JointDistribution(benchmark::State& state) {
  const auto code = build_toric(2);
  for (auto _ : state) benchmark::DoNotOptimize(joint_distribution(code, rates(0.05, 0.02, 0.08, 0.05), 1));
}
BENCHMARK(BM_JointDistribution)->Unit(benchmark::kMillisecond);

void BM_McSweep(benchmark::State& state, Sampler sampler) {
  const int L = static_cast<int>(state.range(0));
  const auto code = build_toric(L);
  const auto model = build_single_flavor(code, rates(0.0, 0.0, 0.1, 0.1), L);
  const auto sm = sampler_model(model, code);
  MCConfig cfg;
  cfg.sweeps = 100;
  cfg.burn_in = 10;
  cfg.algorithm = sampler;
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(sm, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.sweeps * sm.num_spins);
}
BENCHMARK_CAPTURE(BM_McSweep, metropolis, Sampler::Metropolis)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_McSweep, wolff, Sampler::Wolff)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
