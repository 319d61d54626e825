// Serial reference vs OpenMP distance matrix, and DP vs bit-parallel edit distance.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "formeclust/kernel.hpp"
#include "formeclust/rng.hpp"

using namespace formeclust;

namespace {

std::vector<std::uint8_t> random_string(Rng& rng, std::size_t len) {
  std::vector<std::uint8_t> s(len);
  for (auto& c : s) c = static_cast<std::uint8_t>(uniform_index(rng, 5));
  return s;
}

// Units shaped like a folio book: two slots, titles a few hundred symbols long.
std::vector<ClusterUnit> folio_units(std::size_t n, std::size_t len) {
  Rng rng(7);
  std::vector<ClusterUnit> units;
  for (std::size_t i = 0; i < n; ++i) {
    ClusterUnit u{"u" + std::to_string(i), {}};
    for (int k = 0; k < 2; ++k) u.slots.emplace_back(QuantizedTitle{random_string(rng, len), 5, BinStrategy::quantile});
    units.push_back(std::move(u));
  }
  return units;
}

void BM_DistanceMatrixSerial(benchmark::State& state) {
  const auto units = folio_units(static_cast<std::size_t>(state.range(0)), 360);
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix_reference(units));
  state.SetComplexityN(state.range(0));
}

void BM_DistanceMatrixParallel(benchmark::State& state) {
  const auto units = folio_units(static_cast<std::size_t>(state.range(0)), 360);
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(units));
  omp_set_num_threads(omp_get_num_procs());
  state.SetComplexityN(state.range(0));
}

void BM_LevenshteinDP(benchmark::State& state) {
  Rng rng(3);
  const auto a = random_string(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_string(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein_reference(a, b));
}

void BM_LevenshteinBitParallel(benchmark::State& state) {
  Rng rng(3);
  const auto a = random_string(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_string(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(levenshtein(a, b));
}

}  // namespace

BENCHMARK(BM_DistanceMatrixSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceMatrixParallel)
    ->ArgsProduct({{50, 200}, {1, 2, 4}})
    ->ArgNames({"units", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_LevenshteinDP)->Arg(64)->Arg(360)->Arg(1000);
BENCHMARK(BM_LevenshteinBitParallel)->Arg(64)->Arg(360)->Arg(1000);

BENCHMARK_MAIN();
