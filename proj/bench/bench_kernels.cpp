// Serial reference against the OpenMP path for the main kernels. Each pair
// computes the same value; the parallel result is checked to match bit for bit.

#include <stdexcept>

#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "sharptrace/constants.hpp"
#include "sharptrace/surfaces.hpp"
#include "sharptrace/symbols.hpp"
#include "sharptrace/test_functions.hpp"
#include "sharptrace/verify.hpp"

using namespace sharptrace;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

const char* label(const benchmark::State& state) { return state.range(0) == 0 ? "serial" : "parallel"; }

void BM_Certificate(benchmark::State& state) {
  const auto sym = HomogeneousSymbol::quartic(3);
  for (auto _ : state) benchmark::DoNotOptimize(min_hessian_det_on_level(sym, 128, mode(state)).min_det);
  state.SetLabel(label(state));
}

void BM_BesselSupremum(benchmark::State& state) {
  SupremumSearch search;
  search.grid_points = 31;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c1_trace_constant(3, WeightSpec::power(-0.5), WeightSpec::bracket(0.75), search, mode(state)).value);
  }
  state.SetLabel(label(state));
}

void BM_TraceTrigonometric(benchmark::State& state) {
  const auto f = make_test_function("random-band-limited", {{"seed", 1}}, 3, GridSpec{3, 48, 12.0});
  const auto q = build_quadrature(HomogeneousSymbol::sphere(3), 1.0, 12);
  for (auto _ : state) benchmark::DoNotOptimize(trace_norm(*f.grid, q, FieldEvaluation::trigonometric, mode(state)));
  state.SetLabel(label(state));
}

void BM_RhoScan(benchmark::State& state) {
  const auto sym = HomogeneousSymbol::sphere(3);
  const std::vector<double> rhos{0.5, 1.0, 2.0, 4.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rho_scan(sym, Normalization::homogeneous(0.75), rhos, {}, mode(state)).fit->slope);
  }
  state.SetLabel(label(state));
}

void BM_Coarea(benchmark::State& state) {
  Mat A = Mat::Identity(3, 3);
  A(2, 2) = 4.0;
  const auto sym = HomogeneousSymbol::quadratic(A);
  const auto F = [](const Vec& x) { return std::exp(-x.squaredNorm()); };
  for (auto _ : state) benchmark::DoNotOptimize(coarea_verify(sym, F, 32, {}, mode(state)).gap);
  state.SetLabel(label(state));
}

void check_identical() {
  const auto sym = HomogeneousSymbol::quartic(3);
  if (min_hessian_det_on_level(sym, 64, Execution::serial).min_det !=
      min_hessian_det_on_level(sym, 64, Execution::parallel).min_det) {
    throw std::runtime_error("certificate differs between serial and parallel");
  }
  const auto f = make_test_function("random-band-limited", {{"seed", 2}}, 3, GridSpec{3, 32, 12.0});
  const auto q = build_quadrature(HomogeneousSymbol::sphere(3), 1.0, 8);
  if (trace_norm(*f.grid, q, FieldEvaluation::trigonometric, Execution::serial) !=
      trace_norm(*f.grid, q, FieldEvaluation::trigonometric, Execution::parallel)) {
    throw std::runtime_error("trace norm differs between serial and parallel");
  }
}

}  // namespace

BENCHMARK(BM_Certificate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BesselSupremum)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TraceTrigonometric)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RhoScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Coarea)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  check_identical();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
