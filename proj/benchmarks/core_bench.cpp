// Microbenchmarks for the hot paths of the simulation engine.
#include <benchmark/benchmark.h>

#include <vector>

#include "mecor/correction.hpp"
#include "mecor/sim_harness.hpp"

namespace {

using namespace mecor;

TrialDataset make_trial(std::size_t n_per_arm, std::uint64_t seed) {
  TrialGenerator gen{120.0, 6.9, 12.6, n_per_arm};
  RngStream rng(seed);
  return generate_true(gen, rng);
}

CalibrationDataset make_calibration(std::size_t k, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> y(k), w(k);
  for (std::size_t j = 0; j < k; ++j) {
    y[j] = rng.next_normal(120.0, 12.6);
    w[j] = 1.05 * y[j] + rng.next_normal(0.0, 6.6);
  }
  return CalibrationDataset(std::move(y), std::move(w));
}

void BM_OlsFit(benchmark::State& state) {
  const TrialDataset trial = make_trial(200, 1);
  const std::vector<double> x(trial.treatment().begin(), trial.treatment().end());
  const std::vector<double> y(trial.endpoint().begin(), trial.endpoint().end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(ols_fit(x, y));
  }
}
BENCHMARK(BM_OlsFit);

void BM_SummarizeTrial(benchmark::State& state) {
  const TrialDataset trial = make_trial(200, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(summarize_trial(trial));
  }
}
BENCHMARK(BM_SummarizeTrial);

void BM_TQuantile(benchmark::State& state) {
  double p = 0.9500001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t_quantile(p, 398.0));
  }
}
BENCHMARK(BM_TQuantile);

void BM_BootstrapCi(benchmark::State& state) {
  const TrialDataset trial = make_trial(200, 3);
  const CalibrationDataset cal = make_calibration(50, 4);
  RngStream rng(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ci_bootstrap(trial, cal, EstimatorKind::SystematicCorrected, 0.95, 999, rng));
  }
}
BENCHMARK(BM_BootstrapCi);

void BM_ScenarioReplicates(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.n_total = 400;
  cfg.k_calibration = 50;
  cfg.error_model = SystematicError{0.0, 1.05, 0.0};
  cfg.r2_target = 0.8;
  cfg.n_replicates = static_cast<std::size_t>(state.range(0));
  cfg.seed = 6;
  cfg.methods = kMethodZeroVariance | kMethodDelta | kMethodFieller;
  cfg.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_scenario(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScenarioReplicates)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
