#include "wcga/analysis.hpp"
#include "wcga/dictionaries.hpp"
#include "wcga/experiments.hpp"
#include "wcga/greedy.hpp"
#include "wcga/solvers.hpp"

#include <benchmark/benchmark.h>

namespace {

wcga::SampledFunction sparse_target(const wcga::Dictionary& dict, int K, std::uint64_t seed) {
  auto rng = wcga::trial_rng(seed, 0);
  wcga::TargetSpec spec{.kind = "sparse", .K = K};
  return wcga::make_target(dict, spec, dict.p(), rng).f0;
}

void BM_ProjectBest(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const auto dict = wcga::build_trig(1, 20, p, wcga::make_grid(1, 256));
  const auto f0 = sparse_target(dict, 8, 1);
  std::vector<std::size_t> idx;
  for (int i = 0; i < m; ++i) idx.push_back(static_cast<std::size_t>(3 * i + 1));
  for (auto _ : state) {
    auto proj = wcga::project_best(f0, dict, idx, p);
    benchmark::DoNotOptimize(proj.residual_norm);
  }
}
BENCHMARK(BM_ProjectBest)->Args({2, 4})->Args({2, 12})->Args({4, 4})->Args({4, 12});

void BM_WcgaRun(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0));
  const auto dict = wcga::build_trig(1, 20, p, wcga::make_grid(1, 128));
  const auto f0 = sparse_target(dict, 5, 2);
  wcga::GreedyConfig cfg;
  cfg.p = p;
  cfg.max_iter = 20;
  for (auto _ : state) {
    auto trace = wcga::wcga_run(f0, dict, cfg);
    benchmark::DoNotOptimize(trace.residual_norms.back());
  }
}
BENCHMARK(BM_WcgaRun)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SigmaOracle(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0));
  const auto dict = wcga::build_trig(1, 7, p, wcga::make_grid(1, 64));
  auto rng = wcga::trial_rng(3, 0);
  wcga::TargetSpec spec{.kind = "dense", .law = "power"};
  const auto f0 = wcga::make_target(dict, spec, p, rng).f0;
  for (auto _ : state) {
    auto table = wcga::sigma_m_oracle(f0, dict, 3, p);
    benchmark::DoNotOptimize(table.values.back());
  }
}
BENCHMARK(BM_SigmaOracle)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
