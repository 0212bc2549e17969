#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "blowup/classifier.hpp"

using namespace blowup;

namespace {
const FnMeta monotone{true, true, std::nullopt, FamilyTag::Custom};
}  // namespace

static void BM_ClassifyPowerExact(benchmark::State& state) {
  const auto h = make_power(1.5);
  for (auto _ : state) benchmark::DoNotOptimize(classify(h, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_ClassifyPowerExact)->DenseRange(1, 3);

static void BM_ClassifyPowerLog(benchmark::State& state) {
  const auto h = make_power_log({1.0, 2.0, std::numbers::e});
  for (auto _ : state) benchmark::DoNotOptimize(classify(h, 1));
}
BENCHMARK(BM_ClassifyPowerLog);

static void BM_ClassifyNumericConvergent(benchmark::State& state) {
  const auto h = make_custom([](double s) { return s * s + 1.0; }, monotone, "s^2+1");
  for (auto _ : state) benchmark::DoNotOptimize(classify(h, 1));
}
BENCHMARK(BM_ClassifyNumericConvergent)->Unit(benchmark::kMicrosecond);

static void BM_ClassifyNumericDivergent(benchmark::State& state) {
  const auto h = make_custom([](double s) { return std::sqrt(s) + 1.0; }, monotone, "sqrt(s)+1");
  for (auto _ : state) benchmark::DoNotOptimize(classify(h, 2));
}
BENCHMARK(BM_ClassifyNumericDivergent)->Unit(benchmark::kMicrosecond);
