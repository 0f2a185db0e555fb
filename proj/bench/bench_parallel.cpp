// Serial reference vs OpenMP kernels. Run with --benchmark_filter to narrow;
// OMP_NUM_THREADS controls the parallel side.

#include <benchmark/benchmark.h>

#include "icensus/curve.hpp"
#include "icensus/divpoly.hpp"
#include "icensus/point.hpp"
#include "icensus/repulsion.hpp"

using namespace icensus;

namespace {

const std::vector<CurveModel>& census_input() {
  static const auto curves = enumerate_family(Family::Universal, Real(4));
  return curves;
}

SurveyOptions survey_options() {
  SurveyOptions o;
  o.min_height = Real(0);
  return o;
}

void BM_IntegralPoints_Serial(benchmark::State& st) {
  const CurveModel c{BigInt(-7), BigInt(10)};
  for (auto _ : st) benchmark::DoNotOptimize(serial::integral_points(c, BigInt(st.range(0))));
}
void BM_IntegralPoints_Parallel(benchmark::State& st) {
  const CurveModel c{BigInt(-7), BigInt(10)};
  for (auto _ : st) benchmark::DoNotOptimize(integral_points(c, BigInt(st.range(0))));
}
BENCHMARK(BM_IntegralPoints_Serial)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IntegralPoints_Parallel)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_Census_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::census_curves(census_input(), BigInt(1000)));
}
void BM_Census_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(census_curves(census_input(), BigInt(1000)));
}
BENCHMARK(BM_Census_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Census_Parallel)->Unit(benchmark::kMillisecond);

void BM_Survey_Serial(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(serial::survey_curves(census_input(), Real(4), BigInt(200), survey_options()));
}
void BM_Survey_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(survey_curves(census_input(), Real(4), BigInt(200), survey_options()));
}
BENCHMARK(BM_Survey_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Survey_Parallel)->Unit(benchmark::kMillisecond);

void BM_Enumerate_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::enumerate_family(Family::Universal, Real(st.range(0))));
}
void BM_Enumerate_Parallel(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(enumerate_family(Family::Universal, Real(st.range(0))));
}
BENCHMARK(BM_Enumerate_Serial)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Enumerate_Parallel)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Psi_Uncached(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(serial::psi(static_cast<unsigned>(st.range(0))));
}
void BM_Psi_Cached(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(psi(static_cast<unsigned>(st.range(0))));
}
BENCHMARK(BM_Psi_Uncached)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Psi_Cached)->Arg(8)->Arg(12)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
