#include "jhol/cr_solver.hpp"
#include "jhol/degree.hpp"
#include "jhol/fixtures.hpp"
#include "jhol/jdisks.hpp"
#include "jhol/zero_divisor.hpp"

#include <benchmark/benchmark.h>

using namespace jhol;

namespace {

const Box kBox{{-0.5, -0.5, -0.5, -0.5}, {0.5, 0.5, 0.5, 0.5}};

void BM_ExprEval(benchmark::State& state) {
  const FieldExpr e = parse("sin(x1*x2) + exp(0.5*x3) * x4 - x1*x1*x1");
  const Point4 x{0.1, -0.2, 0.3, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(e(x));
}
BENCHMARK(BM_ExprEval);

void BM_WindingDegree(benchmark::State& state) {
  const PlanarMap u = random_zzbar_polynomial(3, 3).map();
  for (auto _ : state) benchmark::DoNotOptimize(winding_degree(u).degree);
}
BENCHMARK(BM_WindingDegree)->Unit(benchmark::kMillisecond);

void BM_PerturbSignCount(benchmark::State& state) {
  const PlanarMap u = random_zzbar_polynomial(3, 3).map();
  for (auto _ : state) benchmark::DoNotOptimize(perturb_sign_count(u, 0).degree);
}
BENCHMARK(BM_PerturbSignCount)->Unit(benchmark::kMillisecond);

void BM_CauchyTransform(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PlanarField f = PlanarField::sample({1.0, n, 2 * n}, [](cplx z) { return std::exp(std::conj(z)) * z; });
  benchmark::DoNotOptimize(cauchy_transform(f).sup_norm());  // builds the cached kernel
  for (auto _ : state) benchmark::DoNotOptimize(cauchy_transform(f).sup_norm());
}
BENCHMARK(BM_CauchyTransform)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CarlemanFactor(benchmark::State& state) {
  const ManufacturedCR m = manufactured_cr(1);
  for (auto _ : state) benchmark::DoNotOptimize(carleman_factor(m.v, m.system).delta);
}
BENCHMARK(BM_CarlemanFactor)->Unit(benchmark::kMillisecond);

void BM_SolveDisk(benchmark::State& state) {
  const auto J = self_dual_structure(0.05, parse_complex("w0*(1 + w1)"), kBox);
  for (auto _ : state) benchmark::DoNotOptimize(solve_disk(J, {0.01, -0.005, 0.02, -0.03}, {1.0, 0.0}, 0.08).residual);
}
BENCHMARK(BM_SolveDisk)->Unit(benchmark::kMillisecond);

void BM_IntersectionIndex(benchmark::State& state) {
  const TwoForm alpha = re_holomorphic_form(parse_complex("w0*w0 - w1"), kBox);
  const auto J = AlmostComplexStructure::standard(kBox);
  const TestDisk s = flat_disk({0.0, 0.0, 0.01, 0.0}, {1.0, 0.0}, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(intersection_index(alpha, J, s).total);
}
BENCHMARK(BM_IntersectionIndex)->Unit(benchmark::kMillisecond);

void BM_TraceZeroSet(benchmark::State& state) {
  const TwoForm alpha = re_holomorphic_form(parse_complex("w0"), kBox);
  const auto J = AlmostComplexStructure::standard(kBox);
  TraceOptions opt;
  opt.resolution = 8;
  opt.ladder = {3, static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(trace_zero_set(alpha, J, kBox, opt).points.size());
}
BENCHMARK(BM_TraceZeroSet)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
