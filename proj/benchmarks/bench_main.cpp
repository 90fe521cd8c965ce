#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "rwre/couple.hpp"
#include "rwre/env.hpp"
#include "rwre/kernel.hpp"
#include "rwre/pde.hpp"
#include "rwre/rough.hpp"
#include "rwre/walk.hpp"

using namespace rwre;

static void BM_KernelTable(benchmark::State& state) {
  const auto N = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(KernelTable(0.2, N, N).p(N, 0));
  state.SetComplexityN(N);
}
BENCHMARK(BM_KernelTable)->RangeMultiplier(2)->Range(256, 4096)->Complexity(benchmark::oNSquared);

static void BM_SampleEnvironment(benchmark::State& state) {
  const EnvironmentSpec spec = EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(sample_environment(spec, state.range(0), 1).omega_plus.v.data());
  state.SetItemsProcessed(state.iterations() * (2 * state.range(0) + 1));
}
BENCHMARK(BM_SampleEnvironment)->Arg(1 << 16);

static void BM_ForwardExpectation(benchmark::State& state) {
  const double d = 1.0 / static_cast<double>(state.range(0));
  const auto N = static_cast<std::int64_t>(std::llround(1.0 / (d * d)));
  const RescaledEnvironment r = rescale_environment(sample_environment(EnvironmentSpec{}, N + 2, 3), d);
  const auto h = fns::cosine();
  for (auto _ : state) benchmark::DoNotOptimize(quenched_expectation_forward(r, h, N, 0).value);
  state.SetComplexityN(N);
}
BENCHMARK(BM_ForwardExpectation)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMillisecond);

static void BM_SolveMild(benchmark::State& state) {
  const auto N = state.range(0);
  const std::int64_t A = 16;
  const RescaledEnvironment r = rescale_environment(sample_environment(EnvironmentSpec{}, A + N + 4, 4), 1.0 / 16.0);
  const KernelTable table(0.2, N, N);
  const auto f0 = fns::cosine();
  for (auto _ : state) benchmark::DoNotOptimize(solve_mild(r, f0, {}, N, A, table).N);
}
BENCHMARK(BM_SolveMild)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

template <CouplerKind K>
static void BM_CouplerMap(benchmark::State& state) {
  const Coupler c(XiLaw::two_point(0.7), 0.8, K);
  std::vector<double> g(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = c.tau() * std::sin(1.7 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(c.map(g).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CouplerMap<CouplerKind::PerStep>)->Arg(1 << 14);
BENCHMARK(BM_CouplerMap<CouplerKind::Dyadic>)->Arg(1 << 14);

static void BM_BinnedDyadicMap(benchmark::State& state) {
  const Coupler c(XiLaw::from_spec(EnvironmentSpec::scaled_beta(0.2, 2.0, 3.0, 0.01)), 0.8, CouplerKind::Dyadic);
  std::vector<double> g(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = c.tau() * std::sin(1.7 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(c.map(g, 1).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BinnedDyadicMap)->Arg(1 << 12);

static void BM_RhoDistance(benchmark::State& state) {
  const auto n = state.range(0);
  SiteVector a(-n, static_cast<std::size_t>(2 * n + 1)), b = a;
  for (std::int64_t k = -n; k <= n; ++k) {
    a[k] = std::sin(0.37 * static_cast<double>(k));
    b[k] = a[k] + 0.01 * std::cos(static_cast<double>(k));
  }
  const double step = 1.0 / static_cast<double>(n);
  const GridRoughPath A = lift(a, step), B = lift(b, step);
  for (auto _ : state) benchmark::DoNotOptimize(rho_distance(A, B, 0.4, 0.12, {1.0}).value);
}
BENCHMARK(BM_RhoDistance)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
