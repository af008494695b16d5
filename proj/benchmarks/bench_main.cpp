#include <benchmark/benchmark.h>

#include <cmath>

#include "gaussmom/deconv.hpp"
#include "gaussmom/estimators.hpp"
#include "gaussmom/mc_oracle.hpp"
#include "gaussmom/transfer.hpp"

using namespace gaussmom;

namespace {

void BM_WishartTransfer(benchmark::State& state) {
  int P = static_cast<int>(state.range(0));
  for (auto _ : state) {
    clear_transfer_cache();
    benchmark::DoNotOptimize(wishart_product_transfer(2, 3, P));
  }
}
BENCHMARK(BM_WishartTransfer)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_GaussSumTransfer(benchmark::State& state) {
  int P = static_cast<int>(state.range(0));
  for (auto _ : state) {
    clear_transfer_cache();
    benchmark::DoNotOptimize(gauss_sum_transfer(2, 3, P));
  }
}
BENCHMARK(BM_GaussSumTransfer)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_SelfAdjointProductTransfer(benchmark::State& state) {
  int P = static_cast<int>(state.range(0));
  for (auto _ : state) {
    clear_transfer_cache();
    benchmark::DoNotOptimize(selfadj_product_transfer(2, P));
  }
}
BENCHMARK(BM_SelfAdjointProductTransfer)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_Deconvolve(benchmark::State& state) {
  int P = static_cast<int>(state.range(0));
  Deconvolver d = build_deconvolver(gauss_sum_transfer(2, 2, P, Rational(1, 5)));
  MomentVector y = eval_mixed_moments(diagonal_matrix({1.3, 0.7}), P);
  MomentVector approx = MomentVector::approximate(y.basis(), y.values());
  for (auto _ : state) benchmark::DoNotOptimize(d.apply(approx));
}
BENCHMARK(BM_Deconvolve)->DenseRange(2, 4);

void BM_MonteCarloTrials(benchmark::State& state) {
  EnsembleSpec spec{parse_model("sum(det(D, 2x2), gC(2, 2, 0.5))"), {}, 1, static_cast<std::uint64_t>(state.range(0))};
  spec.bindings.add("D", diagonal_matrix({1.0, 0.5}));
  for (auto _ : state) benchmark::DoNotOptimize(empirical_mixed_moments(spec, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloTrials)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RatePipeline(benchmark::State& state) {
  RandomStream rng(3, 0);
  Matrix D = diagonal_matrix({1.0, 0.5});
  std::vector<Matrix> obs;
  for (long l = 0; l < state.range(0); ++l) obs.push_back(D + sample_complex_gaussian(2, 2, rng) * std::sqrt(0.2));
  for (auto _ : state)
    benchmark::DoNotOptimize(rate_pipeline(obs, Rational(1, 5), 5.0, 2, CombineStrategy::kAverage));
}
BENCHMARK(BM_RatePipeline)->Arg(4)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
