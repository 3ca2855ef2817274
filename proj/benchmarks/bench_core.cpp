#include <benchmark/benchmark.h>

#include <map>

#include "ssc/kmeans.hpp"
#include "ssc/markov.hpp"
#include "ssc/spectral.hpp"
#include "ssc/svd.hpp"
#include "ssc/synth.hpp"

namespace {

const ssc::GroundTruthChain& chain(int p) {
  static std::map<int, ssc::GroundTruthChain> cache;
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, ssc::gen_low_rank_chain(p, 3, 1)).first;
  return it->second;
}

void BM_Simulate(benchmark::State& state) {
  const auto& c = chain(static_cast<int>(state.range(0)));
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(ssc::simulate_trajectory(c.P, ssc::StateIndex{0}, n, 2));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_Simulate)->Args({200, 100000})->Args({1000, 100000});

void BM_EmpiricalFrequency(benchmark::State& state) {
  const auto& c = chain(static_cast<int>(state.range(0)));
  const auto traj = ssc::simulate_trajectory(c.P, ssc::StateIndex{0}, 200000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(ssc::empirical_frequency(traj));
}
BENCHMARK(BM_EmpiricalFrequency)->Arg(200)->Arg(1000);

void BM_TruncatedSvd(benchmark::State& state) {
  const auto& c = chain(static_cast<int>(state.range(0)));
  const auto method = state.range(1) ? ssc::SvdMethod::Randomized : ssc::SvdMethod::Dense;
  for (auto _ : state) benchmark::DoNotOptimize(ssc::truncated_svd(c.F.matrix(), 3, method));
}
BENCHMARK(BM_TruncatedSvd)->Args({200, 0})->Args({200, 1})->Args({1000, 0})->Args({1000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_EstimateLowRank(benchmark::State& state) {
  const auto& c = chain(static_cast<int>(state.range(0)));
  const auto traj = ssc::simulate_trajectory(c.P, ssc::StateIndex{0}, 200000, 4);
  const auto f = ssc::empirical_frequency(traj);
  for (auto _ : state) benchmark::DoNotOptimize(ssc::estimate_low_rank(f, 3));
}
BENCHMARK(BM_EstimateLowRank)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto agg = ssc::gen_aggregatable_chain(static_cast<int>(state.range(0)), 4, 5);
  const auto rows = ssc::truncated_svd(agg.P.matrix(), 4).U;
  ssc::KMeansConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(ssc::kmeans_cluster(rows, 4, cfg));
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
