#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mecor/correction.hpp"

namespace mecor {

// CI methods requested for the corrected estimator in a scenario.
enum : unsigned {
  kMethodZeroVariance = 1u << 0,
  kMethodDelta = 1u << 1,
  kMethodFieller = 1u << 2,
  kMethodBootstrap = 1u << 3,
};

struct ScenarioConfig {
  std::size_t n_total = 400;
  std::size_t k_calibration = 50;
  TrialGenerator generator{};  ///< n_per_arm is derived from n_total
  ErrorModelSpec error_model = ClassicalError{0.0};
  std::optional<double> r2_target;  ///< when set, drives the error SDs
  std::size_t n_replicates = 2000;
  double alpha = 0.05;
  int bootstrap_b = 999;
  std::uint64_t seed = 0;
  unsigned methods = 0;
  int threads = 1;
};

/// One estimator/method outcome of one replicate; the flat row persisted to
/// replicates.csv, from which aggregation is re-runnable.
struct ReplicateRow {
  std::uint32_t replicate = 0;
  EstimatorKind estimator = EstimatorKind::Naive;
  CiMethod method = CiMethod::NaiveWald;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool defined = false;
  CiFailure failure = CiFailure::None;
  double theta1_hat = 0.0;  ///< calibration slope (arm-1 slope when differential)
  int bootstrap_total = 0;
  int bootstrap_dropped = 0;
};

struct MetricRow {
  EstimatorKind estimator = EstimatorKind::Naive;
  CiMethod method = CiMethod::NaiveWald;
  std::size_t n_replicates = 0;  ///< rows with a finite estimate
  std::size_t n_defined = 0;     ///< intervals entering coverage/width
  double pct_bias = 0.0;         ///< NaN when the estimand is 0
  double emp_se = 0.0;
  double sqrt_mse = 0.0;
  std::optional<double> coverage;
  std::optional<double> avg_ci_width;
  std::optional<double> type1_error;
  std::optional<double> type2_error;
  double fieller_failure_rate = 0.0;
  double dropped_bootstrap_rate = 0.0;
  double mc_se_bias = 0.0;  ///< absolute units (EmpSE / sqrt(n))
  double mc_se_empse = 0.0;
  double mc_se_mse = 0.0;
  std::optional<double> mc_se_coverage;
};

struct MetricsReport {
  std::vector<MetricRow> rows;
  std::size_t n_replicates = 0;
  double true_beta = 0.0;
};

struct ScenarioResult {
  MetricsReport metrics;
  std::vector<ReplicateRow> replicates;
};

void validate_config(const ScenarioConfig& cfg);

/// Applies r2_target to the error model, returning the concrete spec with
/// tau values filled in.
ErrorModelSpec resolve_error_model(const ScenarioConfig& cfg);

/// Monte Carlo scenario run. Replicates derive their streams from
/// (seed, replicate_index), so the result is bit-identical for any thread
/// count. Coverage and width of the Fieller method are withheld when its
/// failure rate exceeds 5%.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Aggregates per-replicate rows into performance metrics with Monte Carlo
/// standard errors. Rows with a non-finite estimate are excluded from the
/// estimator metrics; undefined intervals from coverage.
MetricsReport aggregate(std::span<const ReplicateRow> rows, double true_beta,
                        double fieller_suppression = 0.05);

// ---------- example-trial illustrations ----------

enum class IllustrationVariant { NoError, Classical, Systematic, Differential };

struct IllustrationConfig {
  IllustrationVariant variant = IllustrationVariant::NoError;
  std::size_t n_per_arm = 54;
  std::size_t n_replicates = 2000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double alpha_y = 120.0;
  double beta_y = 6.9;
  double sigma = 12.6;
  /// Classical error SD as a fraction of sigma. The default reproduces the
  /// example-trial contamination (circa 56% extra estimator variance).
  double error_sd_fraction = 0.75;
  double theta1 = 1.05;
  int threads = 1;
};

struct IllustrationReport {
  double type1_error = 0.0;
  double type2_error = 0.0;
  double mean_estimate = 0.0;  ///< naive estimate under the alternative
  double emp_se = 0.0;
  double variance_inflation = 0.0;  ///< empirical variance over the error-free value
  std::vector<double> wald_null;    ///< Wald statistics for density plots
  std::vector<double> wald_alt;
};

IllustrationReport run_illustration(const IllustrationConfig& cfg);

// ---------- prognostic-factor check ----------

struct PrognosticConfig {
  std::size_t n_total = 400;
  double alpha_y = 120.0;
  double beta_y = 6.9;
  double sigma = 12.6015872;  // sqrt(158.8)
  PrognosticFactorError error{0.5, 10.0, 0.25, 6.6};
  std::size_t n_replicates = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PrognosticReport {
  double naive_mean = 0.0;        ///< endpoint regressed on treatment only
  double conditional_mean = 0.0;  ///< endpoint regressed on treatment and factor
  double naive_empvar = 0.0;
  double conditional_empvar = 0.0;
};

PrognosticReport run_prognostic_check(const PrognosticConfig& cfg);

// ---------- config file format ----------

/// Parses the flat `key = value` scenario format ('#' starts a comment).
/// Throws ConfigInvalid with the offending key on any violation. When
/// `seed_present` is given it reports whether the text carried a seed.
ScenarioConfig parse_scenario_config(std::string_view text, bool* seed_present = nullptr);

/// Parses a comma-separated CI method list, e.g. "zero-variance,delta".
unsigned parse_ci_methods(std::string_view list);

/// Canonical key-sorted serialization of a resolved config; hashing this is
/// how run manifests fingerprint a scenario.
std::string canonical_scenario_text(const ScenarioConfig& cfg);

const char* estimator_name(EstimatorKind kind);
const char* method_name(CiMethod method);

}  // namespace mecor
