#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "tirefit/filters.hpp"
#include "tirefit/fitting.hpp"
#include "tirefit/sensitivity.hpp"
#include "tirefit/study.hpp"

namespace {

const tirefit::TireParams kTruth{15.0, 2.0, 1.5, 0.8, 0.0, 0.0};

tirefit::AxleDataset noisy_data(double level) {
  std::mt19937_64 rng(1);
  return tirefit::generate_synthetic(kTruth, level, 500, 0.002, 0.02, rng);
}

void BM_Evaluate(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tirefit::evaluate(kTruth, x));
    x = x > 1.0 ? -1.0 : x + 1e-3;
  }
}
BENCHMARK(BM_Evaluate);

void BM_Gradients(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tirefit::gradients(kTruth, 0.07));
}
BENCHMARK(BM_Gradients);

void BM_NelderMeadFit(benchmark::State& state) {
  const auto data = noisy_data(0.75);
  for (auto _ : state) benchmark::DoNotOptimize(tirefit::fit_nelder_mead(data, tirefit::ParamBounds{}));
}
BENCHMARK(BM_NelderMeadFit)->Unit(benchmark::kMillisecond);

void BM_SviFit(benchmark::State& state) {
  const auto data = noisy_data(0.75);
  tirefit::SviConfig cfg;
  cfg.steps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(tirefit::fit_svi(data, cfg));
}
BENCHMARK(BM_SviFit)->Arg(500)->Arg(3000)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_SobolPoint(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tirefit::sobol_indices(kTruth, 0.1, {0.05}, static_cast<std::size_t>(state.range(0)), 0));
  }
}
BENCHMARK(BM_SobolPoint)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SavitzkyGolay(benchmark::State& state) {
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.01 * static_cast<double>(i));
  const tirefit::FilterSpec spec{tirefit::FilterKind::SavitzkyGolay, 501, 5, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(tirefit::filter_channel(s, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SavitzkyGolay)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
