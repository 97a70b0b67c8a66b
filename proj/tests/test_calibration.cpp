#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mecor/calibration.hpp"
#include "mecor/error_models.hpp"
#include "mecor/rng.hpp"
#include "oracles.hpp"

using namespace mecor;

namespace {

CalibrationDataset simulated_calibration(std::size_t k, double theta0, double theta1,
                                         double tau, RngStream& rng) {
  std::vector<double> y_true(k), y_obs(k);
  for (std::size_t j = 0; j < k; ++j) {
    y_true[j] = rng.next_normal(120.0, 12.6);
    y_obs[j] = theta0 + theta1 * y_true[j] + rng.next_normal(0.0, tau);
  }
  return CalibrationDataset(std::move(y_true), std::move(y_obs));
}

}  // namespace

TEST_CASE("fit_systematic on exact data") {
  SUBCASE("identity measurement") {
    const std::vector<double> y{115, 120, 125, 118};
    const SystematicCalibration fit = fit_systematic(CalibrationDataset(y, y));
    CHECK(fit.theta0_hat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.theta1_hat == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit.t2 == doctest::Approx(0.0));
  }
  SUBCASE("noiseless affine map") {
    const std::vector<double> y{115, 120, 125, 118, 131};
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = 2.0 + 1.05 * y[i];
    const SystematicCalibration fit = fit_systematic(CalibrationDataset(y, w));
    CHECK(fit.theta0_hat == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.theta1_hat == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(fit.t2 == doctest::Approx(0.0));
  }
}

TEST_CASE("fit_systematic matches the grid-search oracle on a fixed 10-row sample") {
  RngStream rng(4242);
  const CalibrationDataset cal = simulated_calibration(10, 0.0, 1.05, 6.6, rng);
  const SystematicCalibration fit = fit_systematic(cal);
  const auto [a, b] = oracles::grid_least_squares(cal.y_true(), cal.y_observed());
  CHECK(fit.theta0_hat == doctest::Approx(a).epsilon(1e-5));
  CHECK(fit.theta1_hat == doctest::Approx(b).epsilon(1e-5));
}

TEST_CASE("fit_systematic is field-for-field the ols_fit of observed on true") {
  RngStream rng(99);
  const CalibrationDataset cal = simulated_calibration(20, 1.0, 1.1, 4.0, rng);
  const SystematicCalibration fit = fit_systematic(cal);
  const RegressionFit ols = ols_fit(cal.y_true(), cal.y_observed());
  CHECK(std::memcmp(&fit.theta0_hat, &ols.intercept, sizeof(double)) == 0);
  CHECK(std::memcmp(&fit.theta1_hat, &ols.slope, sizeof(double)) == 0);
  CHECK(std::memcmp(&fit.t2, &ols.residual_variance, sizeof(double)) == 0);
  CHECK(fit.syy == ols.sxx);
  CHECK(fit.k == ols.n);
}

TEST_CASE("fit_systematic error paths") {
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_systematic(CalibrationDataset(two, two)), TooFewObservations);
  const std::vector<double> constant{5.0, 5.0, 5.0, 5.0};
  const std::vector<double> w{5.1, 5.2, 4.9, 5.3};
  CHECK_THROWS_AS(fit_systematic(CalibrationDataset(constant, w)), DegenerateCalibration);
}

TEST_CASE("fit_differential on exact per-arm maps") {
  std::vector<double> y_true, y_obs;
  std::vector<int> arm;
  const std::vector<double> base{110, 117, 124, 131, 138};
  for (const double v : base) {
    y_true.push_back(v);
    y_obs.push_back(v);  // arm 0: identity
    arm.push_back(0);
  }
  for (const double v : base) {
    y_true.push_back(v);
    y_obs.push_back(1.05 * v);  // arm 1: pure scaling
    arm.push_back(1);
  }
  const DifferentialCalibration fit =
      fit_differential(CalibrationDataset(y_true, y_obs, arm));
  CHECK(fit.theta00_hat == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.theta10_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.theta01_hat == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.theta11_hat == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(fit.t2_by_arm[0] == doctest::Approx(0.0));
  CHECK(fit.t2_by_arm[1] == doctest::Approx(0.0));
  // Cross-arm covariance blocks are identically zero.
  for (int i = 0; i < 2; ++i) {
    for (int j = 2; j < 4; ++j) {
      CHECK(fit.theta_covariance[i][j] == 0.0);
      CHECK(fit.theta_covariance[j][i] == 0.0);
    }
  }
}

TEST_CASE("fit_differential equals per-arm ols_fit on a fixed 20-row pilot") {
  RngStream rng(314);
  std::vector<double> y_true(20), y_obs(20);
  std::vector<int> arm(20);
  for (std::size_t j = 0; j < 20; ++j) {
    const bool active = j >= 10;
    arm[j] = active ? 1 : 0;
    y_true[j] = rng.next_normal(active ? 126.9 : 120.0, 12.6);
    const double theta0 = active ? 0.0 : 0.0;
    const double theta1 = active ? 1.05 : 1.0;
    const double tau = active ? 6.6 : 6.3;
    y_obs[j] = theta0 + theta1 * y_true[j] + rng.next_normal(0.0, tau);
  }
  const DifferentialCalibration fit =
      fit_differential(CalibrationDataset(y_true, y_obs, arm));

  for (int a = 0; a < 2; ++a) {
    std::vector<double> yt, yo;
    for (std::size_t j = 0; j < 20; ++j) {
      if (arm[j] == a) {
        yt.push_back(y_true[j]);
        yo.push_back(y_obs[j]);
      }
    }
    const RegressionFit ols = ols_fit(yt, yo);
    if (a == 0) {
      CHECK(fit.theta00_hat == ols.intercept);
      CHECK(fit.theta10_hat == ols.slope);
    } else {
      CHECK(fit.theta01_hat == ols.intercept);
      CHECK(fit.theta11_hat == ols.slope);
    }
    CHECK(fit.t2_by_arm[a] == ols.residual_variance);
    CHECK(fit.syy_by_arm[a] == ols.sxx);
  }
}

TEST_CASE("fit_differential with identical arms collapses to the systematic fit") {
  RngStream rng(1001);
  std::vector<double> y_true(40), y_obs(40);
  std::vector<int> arm(40);
  for (std::size_t j = 0; j < 40; ++j) {
    arm[j] = j >= 20 ? 1 : 0;
    y_true[j] = rng.next_normal(120.0, 12.6);
    y_obs[j] = 1.05 * y_true[j] + rng.next_normal(0.0, 6.6);
  }
  const DifferentialCalibration fit =
      fit_differential(CalibrationDataset(y_true, y_obs, arm));
  CHECK(fit.theta01_hat - fit.theta00_hat == doctest::Approx(0.0).epsilon(20.0));
  CHECK(std::fabs(fit.theta11_hat - fit.theta10_hat) < 0.5);
}

TEST_CASE("fit_differential error paths") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(fit_differential(CalibrationDataset(y, y)), MissingTreatment);
  const std::vector<int> lopsided{0, 0, 0, 0, 1, 1};
  CHECK_THROWS_AS(fit_differential(CalibrationDataset(y, y, lopsided)), TooFewObservations);
}

TEST_CASE("theta1 estimates concentrate near the truth at K = 50") {
  double sum = 0.0;
  const std::size_t reps = 10000;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng(60, rep, 2);
    sum += fit_systematic(simulated_calibration(50, 0.0, 1.05, 6.6, rng)).theta1_hat;
  }
  const double mean = sum / static_cast<double>(reps);
  // Var(theta1_hat) ~ tau^2 / (49 sigma^2) -> SE of the mean ~ 0.00075.
  CHECK(mean == doctest::Approx(1.05).epsilon(0.0025 / 1.05));
}

TEST_CASE("theta1_significant gate") {
  SystematicCalibration fit;
  fit.theta1_hat = 1.05;
  fit.t2 = 0.0;
  fit.syy = 100.0;
  fit.k = 10;
  CHECK(theta1_significant(fit, 0.05, 398.0));
  fit.theta1_hat = 0.0;
  CHECK_FALSE(theta1_significant(fit, 0.05, 398.0));
  fit.theta1_hat = 1.05;
  fit.t2 = 43.56;
  fit.syy = 7000.0;
  CHECK(theta1_significant(fit, 0.05, 398.0));  // stat ~ 13
  fit.syy = 20.0;
  CHECK_FALSE(theta1_significant(fit, 0.05, 398.0));  // stat ~ 0.71
}

TEST_CASE("gate failure rate at K = 5, weak proxy") {
  // Reference failure rate for the weakest proxy at K = 5 is 74%.
  std::size_t failures = 0;
  const std::size_t reps = 2000;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    RngStream rng(61, rep, 2);
    const SystematicCalibration fit =
        fit_systematic(simulated_calibration(5, 0.0, 1.05, 26.46, rng));
    if (!theta1_significant(fit, 0.05, 398.0)) ++failures;
  }
  const double rate = static_cast<double>(failures) / static_cast<double>(reps);
  CHECK(rate == doctest::Approx(0.74).epsilon(0.05));
}
