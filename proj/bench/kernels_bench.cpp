// Serial reference vs OpenMP kernels.
//   bpi_kernels_bench --benchmark_filter=gram

#include <numeric>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bpi/kernels.hpp"
#include "bpi/synthetic.hpp"

namespace {

using bpi::Index;
using bpi::Matrix;

Matrix data(Index rows, Index cols) { return bpi::gaussian_matrix(rows, cols, 7); }

bpi::Mask staircase(Index rows, Index cols) {
  bpi::Mask m = bpi::Mask::Constant(rows, cols, true);
  // Bottom half misses the last quarter of the features.
  m.bottomRightCorner(rows / 2, cols / 4).setConstant(false);
  return m;
}

template <Matrix (*F)(const Matrix &)>
void bm_gram(benchmark::State &state) {
  const Matrix x = data(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
  state.counters["threads"] = bpi::kernels::max_threads();
}

template <Matrix (*F)(const Matrix &, const bpi::Mask &, std::span<const Index>)>
void bm_masked(benchmark::State &state) {
  const Index n = state.range(0);
  const Index p = state.range(1);
  const Matrix x = data(n, p);
  const bpi::Mask mask = staircase(n, p);
  std::vector<Index> queries(static_cast<std::size_t>(n / 2));
  std::iota(queries.begin(), queries.end(), n - n / 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(x, mask, queries));
}

template <Matrix (*F)(const Matrix &, const Matrix &)>
void bm_squared(benchmark::State &state) {
  const Matrix ref = data(state.range(0), state.range(1));
  const Matrix q = ref.topRows(state.range(0) / 4);
  for (auto _ : state) benchmark::DoNotOptimize(F(q, ref));
}

} // namespace

BENCHMARK(bm_gram<bpi::kernels::serial::gram>)->Name("gram/serial")->Args({2400, 600})->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gram<bpi::kernels::gram>)->Name("gram/omp")->Args({2400, 600})->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gram<bpi::kernels::serial::outer_gram>)
    ->Name("outer_gram/serial")
    ->Args({300, 2000})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_gram<bpi::kernels::outer_gram>)->Name("outer_gram/omp")->Args({300, 2000})->Unit(benchmark::kMillisecond);
BENCHMARK(bm_masked<bpi::kernels::serial::masked_distances>)
    ->Name("masked_distances/serial")
    ->Args({1000, 200})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_masked<bpi::kernels::masked_distances>)
    ->Name("masked_distances/omp")
    ->Args({1000, 200})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_squared<bpi::kernels::serial::squared_distances>)
    ->Name("squared_distances/serial")
    ->Args({2400, 600})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(bm_squared<bpi::kernels::squared_distances>)
    ->Name("squared_distances/omp")
    ->Args({2400, 600})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
