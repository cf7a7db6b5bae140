#include <benchmark/benchmark.h>

#include "killedfit/estimate.hpp"
#include "killedfit/simulate.hpp"
#include "killedfit/study.hpp"

using namespace killedfit;

namespace {

struct Fixture {
  StudyCase c;
  CrossingMethod method;
  std::vector<KilledTrajectory> trajs;

  Fixture(ModelKind kind, std::size_t n) : c(*preset_case(kind, 1)), method(CrossingMethod::default_for(kind)) {
    SimPlan plan{c.model, c.cfg};
    plan.n_traj = n;
    plan.seed = 3;
    trajs = simulate_killed(plan);
  }
};

ModelKind kind_of(const benchmark::State& state) { return static_cast<ModelKind>(state.range(0)); }

void bm_g_prob(benchmark::State& state) {
  const Fixture f(kind_of(state), 1);
  const double x = f.c.cfg.b - 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(g_prob(f.c.model, x, f.c.cfg, f.method));
  state.SetLabel(std::string(to_string(f.c.model.kind)));
}

void bm_loglik_killed(benchmark::State& state) {
  const Fixture f(kind_of(state), 20);
  std::size_t steps = 0;
  for (const auto& t : f.trajs) steps += t.n_steps();
  for (auto _ : state) benchmark::DoNotOptimize(loglik_pooled(f.c.model, f.trajs, f.method).value);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * steps));
  state.SetLabel(std::string(to_string(f.c.model.kind)));
}

void bm_fit_single(benchmark::State& state) {
  const Fixture f(kind_of(state), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(f.c.model.kind, f.trajs, Objective::Killed, f.method).loglik);
  }
  state.SetLabel(std::string(to_string(f.c.model.kind)));
}

void kinds(benchmark::internal::Benchmark* b) {
  for (ModelKind k : {ModelKind::WD, ModelKind::OU, ModelKind::SR}) b->Arg(static_cast<int>(k));
}

BENCHMARK(bm_g_prob)->Apply(kinds);
BENCHMARK(bm_loglik_killed)->Apply(kinds)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_fit_single)->Apply(kinds)->Unit(benchmark::kMillisecond);

}  // namespace
