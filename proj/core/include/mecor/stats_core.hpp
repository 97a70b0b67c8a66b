#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mecor/errors.hpp"

namespace mecor {

/// Simple linear regression fit with homoscedastic variance estimates.
/// Residual variance uses divisor n - 2 (0 for a saturated two-point fit).
struct RegressionFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_variance = 0.0;
  double slope_variance = 0.0;
  double intercept_variance = 0.0;
  double slope_intercept_covariance = 0.0;
  std::vector<double> residuals;
  std::size_t n = 0;
  double sxx = 0.0;  ///< total sum of squares of the regressor
  double x_mean = 0.0;
};

struct TDistSpec {
  double df = 1.0;
  double noncentrality = 0.0;
};

enum class HcFlavor { HC0, HC3 };

struct WaldResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Least-squares fit of y on x. Requires equal lengths (>= 2), finite
/// values and a regressor with nonzero variance.
RegressionFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Heteroscedasticity-consistent variance of the slope (White estimator).
/// HC3 divides each squared residual by (1 - h_i)^2, with the hat value
/// taken from the simple-regression closed form h_i = 1/n + (x_i-x̄)²/Sxx.
double hc_variance(const RegressionFit& fit, std::span<const double> x, HcFlavor flavor);

/// Standard normal CDF and quantile (Wichura's AS 241, |error| < 1e-15).
double normal_cdf(double z);
double normal_quantile(double p);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

double t_pdf(double t, double df);
double t_cdf(double t, double df);

/// Inverse central-t CDF via the inverse regularized incomplete beta with
/// Newton refinement; |t_cdf(t_quantile(p, df), df) - p| < 1e-10.
double t_quantile(double p, double df);

/// Noncentral (or central) Student-t CDF, P(T <= t).
double noncentral_t_cdf(double t, const TDistSpec& spec);

/// Two-sided Wald test of slope == null_value with the supplied variance,
/// referred to a central t distribution with the given df.
WaldResult wald_test(const RegressionFit& fit, double null_value, double variance, double df);

}  // namespace mecor
