#include <benchmark/benchmark.h>

#include <random>

#include "metfa/kernels.hpp"
#include "metfa/map_builder.hpp"

namespace {

metfa::SampleMatrix make_matrix(std::size_t n, std::size_t f) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist(0.5, 0.2);
  std::vector<double> values(n * f);
  for (double& v : values) v = dist(rng);
  return metfa::SampleMatrix(n, f, std::move(values));
}

// Image-sized maps: 224x224 features.
constexpr std::size_t kFeatures = 224 * 224;

void BM_OrderStatsSerial(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  const auto ci = metfa::confidence_indices(m.n_samples(), 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::serial::order_statistics(m, ci.k1, ci.k2));
  }
}

void BM_OrderStatsOmp(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  const auto ci = metfa::confidence_indices(m.n_samples(), 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::omp::order_statistics(m, ci.k1, ci.k2));
  }
}

void BM_CountSerial(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::serial::count_at_or_above(m, 0.5));
  }
}

void BM_CountOmp(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::omp::count_at_or_above(m, 0.5));
  }
}

void BM_StddevSerial(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::serial::column_stddev(m));
  }
}

void BM_StddevOmp(benchmark::State& state) {
  const auto m = make_matrix(state.range(0), kFeatures);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metfa::kernels::omp::column_stddev(m));
  }
}

}  // namespace

BENCHMARK(BM_OrderStatsSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OrderStatsOmp)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountOmp)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StddevSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StddevOmp)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
