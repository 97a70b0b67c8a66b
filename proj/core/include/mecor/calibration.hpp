#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mecor/errors.hpp"
#include "mecor/stats_core.hpp"

namespace mecor {

/// Paired true/observed endpoint measurements from subjects outside the
/// trial. The treatment column is required only for the differential
/// (pilot-study) form.
class CalibrationDataset {
 public:
  CalibrationDataset(std::vector<double> y_true, std::vector<double> y_observed,
                     std::optional<std::vector<int>> treatment = std::nullopt);

  std::span<const double> y_true() const noexcept { return y_true_; }
  std::span<const double> y_observed() const noexcept { return y_observed_; }
  const std::optional<std::vector<int>>& treatment() const noexcept { return treatment_; }
  std::size_t size() const noexcept { return y_true_.size(); }

 private:
  std::vector<double> y_true_;
  std::vector<double> y_observed_;
  std::optional<std::vector<int>> treatment_;
};

/// OLS fit of observed on true endpoint: theta0 + theta1 * Y with residual
/// variance t^2 (divisor k - 2) and regressor sum of squares syy.
struct SystematicCalibration {
  double theta0_hat = 0.0;
  double theta1_hat = 1.0;
  double t2 = 0.0;
  double syy = 0.0;
  double y_true_mean = 0.0;
  std::size_t k = 0;
};

/// Per-arm fits of the pilot calibration sample. Covariance entries are the
/// homoscedastic within-arm plug-ins; cross-arm blocks are zero. Parameter
/// order in `theta_covariance`: (theta00, theta10, theta01, theta11).
struct DifferentialCalibration {
  double theta00_hat = 0.0;
  double theta01_hat = 0.0;
  double theta10_hat = 1.0;
  double theta11_hat = 1.0;
  std::array<double, 2> t2_by_arm{};
  std::array<double, 2> syy_by_arm{};
  std::array<double, 2> y_true_mean_by_arm{};
  std::array<std::size_t, 2> k_by_arm{};
  std::array<std::array<double, 4>, 4> theta_covariance{};
};

SystematicCalibration fit_systematic(const CalibrationDataset& cal);

DifferentialCalibration fit_differential(const CalibrationDataset& cal);

/// Significance gate for the calibration slope: theta1 / sqrt(t2/syy)
/// compared against the upper alpha/2 t quantile with the supplied degrees
/// of freedom (the Fieller construction passes the trial's N - 2). A zero
/// residual variance counts as infinitely significant when theta1 != 0.
bool theta1_significant(const SystematicCalibration& fit, double alpha, double df);

}  // namespace mecor
