#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

#include "killedfit/numerics.hpp"

namespace nm = killedfit::numerics;

namespace {

void bm_ncx2_log_pdf(benchmark::State& state) {
  // Non-centrality grows like 1/dt, as in the G integrand near r = 0.
  const double nc = static_cast<double>(state.range(0));
  const double x = nc + 40.0;
  for (auto _ : state) benchmark::DoNotOptimize(nm::ncx2_log_pdf(x, 81.6, nc));
  state.SetLabel("lambda=" + std::to_string(state.range(0)));
}
BENCHMARK(bm_ncx2_log_pdf)->RangeMultiplier(10)->Range(10, 1'000'000);

void bm_ncx2_sf(benchmark::State& state) {
  const double nc = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nm::ncx2_sf(nc + 100.0, 81.6, nc));
}
BENCHMARK(bm_ncx2_sf)->RangeMultiplier(10)->Range(10, 100'000);

void bm_erfcx(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nm::erfcx(x));
    x = x < 40.0 ? x * 1.01 : 0.1;
  }
}
BENCHMARK(bm_erfcx);

void bm_gauss_kronrod_peaked(benchmark::State& state) {
  auto f = [](double t) { return t > 0.0 ? std::exp(-1e-4 / t) / std::sqrt(t) : 0.0; };
  for (auto _ : state) benchmark::DoNotOptimize(nm::adaptive_gauss_kronrod(f, 0.0, 0.1).value);
}
BENCHMARK(bm_gauss_kronrod_peaked);

}  // namespace
