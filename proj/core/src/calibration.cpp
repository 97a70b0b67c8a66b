#include "mecor/calibration.hpp"

#include <cmath>
#include <utility>

namespace mecor {

namespace {

bool has_spread(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] != v[0]) return true;
  }
  return false;
}

SystematicCalibration fit_pairs(std::span<const double> y_true,
                                std::span<const double> y_observed) {
  if (y_true.size() < 3)
    throw TooFewObservations("calibration: need at least 3 paired observations");
  if (!has_spread(y_true))
    throw DegenerateCalibration("calibration: true endpoint has zero variance");
  const RegressionFit fit = ols_fit(y_true, y_observed);
  SystematicCalibration out;
  out.theta0_hat = fit.intercept;
  out.theta1_hat = fit.slope;
  out.t2 = fit.residual_variance;
  out.syy = fit.sxx;
  out.y_true_mean = fit.x_mean;
  out.k = fit.n;
  return out;
}

}  // namespace

CalibrationDataset::CalibrationDataset(std::vector<double> y_true,
                                       std::vector<double> y_observed,
                                       std::optional<std::vector<int>> treatment)
    : y_true_(std::move(y_true)),
      y_observed_(std::move(y_observed)),
      treatment_(std::move(treatment)) {
  if (y_true_.size() != y_observed_.size())
    throw LengthMismatch("calibration dataset: column lengths differ");
  if (treatment_ && treatment_->size() != y_true_.size())
    throw LengthMismatch("calibration dataset: treatment length differs");
  for (std::size_t i = 0; i < y_true_.size(); ++i) {
    if (!std::isfinite(y_true_[i]) || !std::isfinite(y_observed_[i]))
      throw NonFiniteInput("calibration dataset: non-finite value");
    if (treatment_ && (*treatment_)[i] != 0 && (*treatment_)[i] != 1)
      throw OutOfDomain("calibration dataset: treatment must be 0 or 1");
  }
}

SystematicCalibration fit_systematic(const CalibrationDataset& cal) {
  return fit_pairs(cal.y_true(), cal.y_observed());
}

DifferentialCalibration fit_differential(const CalibrationDataset& cal) {
  if (!cal.treatment())
    throw MissingTreatment("differential calibration: treatment column required");
  const auto& treat = *cal.treatment();

  std::array<std::vector<double>, 2> yt;
  std::array<std::vector<double>, 2> yo;
  for (std::size_t i = 0; i < cal.size(); ++i) {
    const auto arm = static_cast<std::size_t>(treat[i]);
    yt[arm].push_back(cal.y_true()[i]);
    yo[arm].push_back(cal.y_observed()[i]);
  }

  DifferentialCalibration out;
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const SystematicCalibration fit = fit_pairs(yt[arm], yo[arm]);
    if (arm == 0) {
      out.theta00_hat = fit.theta0_hat;
      out.theta10_hat = fit.theta1_hat;
    } else {
      out.theta01_hat = fit.theta0_hat;
      out.theta11_hat = fit.theta1_hat;
    }
    out.t2_by_arm[arm] = fit.t2;
    out.syy_by_arm[arm] = fit.syy;
    out.y_true_mean_by_arm[arm] = fit.y_true_mean;
    out.k_by_arm[arm] = fit.k;

    // Within-arm homoscedastic covariance block; cross-arm blocks stay zero.
    const double var_slope = fit.t2 / fit.syy;
    const double var_intercept =
        fit.t2 * (1.0 / static_cast<double>(fit.k) + fit.y_true_mean * fit.y_true_mean / fit.syy);
    const double cov = -fit.t2 * fit.y_true_mean / fit.syy;
    const std::size_t base = 2 * arm;  // (theta00, theta10 | theta01, theta11)
    out.theta_covariance[base][base] = var_intercept;
    out.theta_covariance[base + 1][base + 1] = var_slope;
    out.theta_covariance[base][base + 1] = cov;
    out.theta_covariance[base + 1][base] = cov;
  }
  return out;
}

bool theta1_significant(const SystematicCalibration& fit, double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw OutOfDomain("theta1_significant: alpha must be in (0, 1)");
  if (fit.t2 == 0.0) return fit.theta1_hat != 0.0;
  const double stat = fit.theta1_hat / std::sqrt(fit.t2 / fit.syy);
  return stat > t_quantile(1.0 - alpha / 2.0, df);
}

}  // namespace mecor
