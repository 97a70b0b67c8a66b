#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mecor/calibration.hpp"
#include "mecor/error_models.hpp"
#include "mecor/rng.hpp"

namespace mecor {

enum class EstimatorKind { Naive, SystematicCorrected, DifferentialCorrected };
enum class CiMethod { NaiveWald, ZeroVariance, Delta, Fieller, Bootstrap };
enum class CiFailure { None, FiellerUnbounded, DegenerateBootstrap };
enum class VarianceFlavor { Homoscedastic, HC3 };

/// Trial-side plug-in quantities shared by the interval constructions.
/// Arm residual variances use divisor n_x - 1 about the arm means.
struct TrialSummary {
  double alpha_star = 0.0;  ///< naive intercept (arm-0 mean of Y*)
  double beta_star = 0.0;   ///< naive slope (arm mean difference)
  double s2 = 0.0;          ///< pooled residual variance, divisor N - 2
  double sxx = 0.0;
  std::size_t n = 0;
  std::array<std::size_t, 2> n_by_arm{};
  std::array<double, 2> s2_by_arm{};
  std::array<double, 2> rss_by_arm{};  ///< within-arm residual sums of squares
  double hc0 = 0.0;                    ///< White variance of the naive slope
  double hc3 = 0.0;
};

struct CorrectedEstimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  EstimatorKind method = EstimatorKind::Naive;
  TrialSummary trial;
  std::optional<SystematicCalibration> systematic_cal;
  std::optional<DifferentialCalibration> differential_cal;
};

struct IntervalResult {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  double level = 0.95;
  CiMethod method = CiMethod::NaiveWald;
  bool defined = false;
  CiFailure failure_reason = CiFailure::None;
  int bootstrap_total = 0;
  int bootstrap_dropped = 0;
};

TrialSummary summarize_trial(const TrialDataset& trial);

/// OLS of the observed endpoint on treatment with a Wald interval at
/// df = N - 2; HC3 variance on request (differential scenarios).
std::pair<CorrectedEstimate, IntervalResult> naive_estimate(
    const TrialDataset& trial, VarianceFlavor flavor = VarianceFlavor::Homoscedastic,
    double level = 0.95);

/// beta_hat = beta_star / theta1, alpha_hat = (alpha_star - theta0) / theta1.
CorrectedEstimate correct_systematic(const TrialSummary& trial, const SystematicCalibration& cal);
CorrectedEstimate correct_systematic(const TrialDataset& trial, const SystematicCalibration& cal);

/// alpha_hat = (alpha_star - theta00) / theta10,
/// beta_hat = (beta_star + alpha_star - theta01) / theta11 - alpha_hat.
CorrectedEstimate correct_differential(const TrialSummary& trial,
                                       const DifferentialCalibration& cal);
CorrectedEstimate correct_differential(const TrialDataset& trial,
                                       const DifferentialCalibration& cal);

/// Wald interval treating the estimated error parameters as known
/// constants: the observed endpoints are adjusted by the calibration fit
/// and regressed on treatment (HC3 variance in the differential case).
IntervalResult ci_zero_variance(const CorrectedEstimate& est, double level);

/// First-order Taylor (Delta method) variance for the ratio-form
/// estimators, with the calibration plug-ins recorded in the estimate.
IntervalResult ci_delta(const CorrectedEstimate& est, double level);

/// Fieller interval for the systematic correction: the two roots of
///   (Var(theta1) tq^2 - theta1^2) b^2 + 2 beta* theta1 b
///     + (Var(beta*) tq^2 - beta*^2) = 0,
/// gated on theta1 being significantly nonzero against t_{N-2}. A failed
/// gate is reported through failure_reason, never an exception.
IntervalResult ci_fieller(const CorrectedEstimate& est, double level);

/// Nonparametric percentile bootstrap: resamples the calibration set (size
/// K) and the trial (size N) independently per replicate. Resamples with a
/// degenerate calibration draw are dropped and counted.
IntervalResult ci_bootstrap(const TrialDataset& trial, const CalibrationDataset& cal,
                            EstimatorKind kind, double level, int replicates, RngStream& rng);

/// Order-statistic percentile interval at ranks ceil((a/2)(B+1)) and
/// floor((1-a/2)(B+1)), 1-indexed and clamped to [1, B].
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

/// Type-II error P(|T| < t_{1-alpha/2,df}) for noncentral T with
/// ncp = effect / se.
double power_type2(double effect, double se, double df, double alpha);

/// Classical-error sample-size inflation: ceil(n / reliability).
long long sample_size_inflation(long long n, double reliability);

/// Smallest N whose Type-II error, with the baseline SE rescaled by
/// sqrt(baseline_n / N) / sqrt(reliability) and df = N - 2, does not exceed
/// target_type2.
long long solve_sample_size(double effect, double baseline_se, long long baseline_n,
                            double reliability, double alpha, double target_type2);

}  // namespace mecor
