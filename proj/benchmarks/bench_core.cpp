#include <benchmark/benchmark.h>

#include <random>

#include "oneshot/bayes.hpp"
#include "oneshot/classical.hpp"
#include "oneshot/sim.hpp"

namespace {

using namespace oneshot;

TestPlan three_level_plan() {
  TestPlan plan;
  plan.stress = {1.5, 2.5, 3.5};
  plan.change_points = {3.0, 6.0, 9.0};
  plan.inspections = {{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}, {7.0, 8.0, 9.0}};
  plan.lag = 0.001;
  return plan;
}

ParamVector truth() {
  ParamVector t;
  t.c0 = 0.03;
  t.c1 = -0.08;
  t.gammas = {0.1, 0.2, 0.3};
  return t;
}

void bm_cell_probabilities(benchmark::State& state) {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = truth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cell_probabilities(plan, DistributionKind::Weibull, theta));
  }
}
BENCHMARK(bm_cell_probabilities);

void bm_cell_prob_gradient(benchmark::State& state) {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = truth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cell_prob_gradient(plan, DistributionKind::Weibull, theta));
  }
}
BENCHMARK(bm_cell_prob_gradient);

void bm_objective_gradient(benchmark::State& state) {
  const TestPlan plan = three_level_plan();
  const ParamVector theta = truth();
  std::mt19937_64 rng(1);
  const CountData data =
      generate_counts(plan, DistributionKind::Weibull, theta, 100, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        objective_gradient(plan, DistributionKind::Weibull, data, theta, 0.5));
  }
}
BENCHMARK(bm_objective_gradient);

void bm_fit_mle(benchmark::State& state) {
  const TestPlan plan = three_level_plan();
  std::mt19937_64 rng(2);
  const CountData data =
      generate_counts(plan, DistributionKind::Weibull, truth(), 100, rng);
  FitConfig cfg;
  cfg.initial = truth();
  cfg.compute_covariance = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(plan, DistributionKind::Weibull, data, cfg));
  }
}
BENCHMARK(bm_fit_mle);

void bm_log_posterior_gradient(benchmark::State& state) {
  const TestPlan plan = three_level_plan();
  std::mt19937_64 rng(3);
  const CountData data =
      generate_counts(plan, DistributionKind::Weibull, truth(), 100, rng);
  const PriorSpec prior = make_prior(PriorKind::NormalData, plan, data);
  const ParamVector theta = truth();
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_posterior_gradient(
        plan, DistributionKind::Weibull, data, theta, 0.2, prior));
  }
}
BENCHMARK(bm_log_posterior_gradient);

}  // namespace

BENCHMARK_MAIN();
