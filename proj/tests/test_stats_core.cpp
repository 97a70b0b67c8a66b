#include <doctest.h>

#include <cmath>
#include <vector>

#include "mecor/rng.hpp"
#include "mecor/stats_core.hpp"
#include "oracles.hpp"

using namespace mecor;

TEST_CASE("ols_fit recovers a two-point line") {
  const std::vector<double> x{0.0, 1.0};
  const std::vector<double> y{0.0, 1.0};
  const RegressionFit fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fit.residual_variance == 0.0);
}

TEST_CASE("ols_fit constant response") {
  const std::vector<double> x{0, 0, 1, 1};
  const std::vector<double> y{2, 2, 2, 2};
  const RegressionFit fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(0.0));
  CHECK(fit.intercept == doctest::Approx(2.0));
  CHECK(fit.residual_variance == doctest::Approx(0.0));
}

TEST_CASE("ols_fit matches the grid-search oracle on a fixed 6-row table") {
  const std::vector<double> x{0, 0, 1, 1, 0, 1};
  const std::vector<double> y{118.4, 121.9, 127.3, 124.8, 120.2, 129.1};
  const RegressionFit fit = ols_fit(x, y);
  const auto [a, b] = oracles::grid_least_squares(x, y);
  CHECK(fit.intercept == doctest::Approx(a).epsilon(1e-6));
  CHECK(fit.slope == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("ols_fit error paths") {
  CHECK_THROWS_AS(ols_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}),
                  LengthMismatch);
  CHECK_THROWS_AS(ols_fit(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  DegenerateRegressor);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ols_fit(std::vector<double>{0, 1, 2}, std::vector<double>{1, nan, 3}),
                  NonFiniteInput);
  CHECK_THROWS_AS(ols_fit(std::vector<double>{0}, std::vector<double>{1}), TooFewObservations);
}

TEST_CASE("ols_fit invariants on random small datasets") {
  RngStream rng(81723);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng.next_index(10);  // up to 12 rows
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.next_index(2));
      y[i] = rng.next_normal(50.0, 10.0);
    }
    bool both_arms = false;
    for (std::size_t i = 1; i < n; ++i) both_arms |= x[i] != x[0];
    if (!both_arms) continue;

    const RegressionFit fit = ols_fit(x, y);
    double resid_sum = 0.0;
    for (const double r : fit.residuals) resid_sum += r;
    CHECK(std::fabs(resid_sum) < 1e-9 * static_cast<double>(n) * 100.0);

    double rss = 0.0;
    for (const double r : fit.residuals) rss += r * r;
    if (n > 2) CHECK(fit.residual_variance == doctest::Approx(rss / double(n - 2)));
    CHECK(fit.slope_variance == doctest::Approx(fit.residual_variance / fit.sxx));

    const auto [a, b] = oracles::grid_least_squares(x, y);
    CHECK(fit.intercept == doctest::Approx(a).epsilon(1e-5));
    CHECK(fit.slope == doctest::Approx(b).epsilon(1e-5));

    // Balanced-design identity: slope equals the arm mean difference.
    double s0 = 0, s1 = 0, n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0.0) {
        s0 += y[i];
        ++n0;
      } else {
        s1 += y[i];
        ++n1;
      }
    }
    CHECK(fit.slope == doctest::Approx(s1 / n1 - s0 / n0).epsilon(1e-12));
  }
}

TEST_CASE("hc_variance direct evaluations") {
  // Homoscedastic balanced arms with |residual| = c: HC0 = sum d^2 c^2 / sxx^2.
  const std::vector<double> x{0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<double> y{1, -1, 1, -1, 3, 5, 3, 5};  // residuals +-1, c = 1
  const RegressionFit fit = ols_fit(x, y);
  const double sxx = fit.sxx;
  double expected = 0.0;
  for (const double xi : x) {
    const double d = xi - fit.x_mean;
    expected += d * d * 1.0;
  }
  expected /= sxx * sxx;
  CHECK(hc_variance(fit, x, HcFlavor::HC0) == doctest::Approx(expected).epsilon(1e-12));

  // Zero residuals: both flavors are exactly 0.
  const std::vector<double> y0{2, 2, 2, 2, 7, 7, 7, 7};
  const RegressionFit fit0 = ols_fit(x, y0);
  CHECK(hc_variance(fit0, x, HcFlavor::HC0) == 0.0);
  CHECK(hc_variance(fit0, x, HcFlavor::HC3) == 0.0);
}

TEST_CASE("hc_variance matches a hand-summed White evaluation, arm 1 four times arm 0") {
  const std::vector<double> x{0, 0, 0, 0, 1, 1, 1, 1};
  const std::vector<double> y{119.1, 120.7, 121.3, 118.9, 124.2, 132.6, 129.8, 121.4};
  const RegressionFit fit = ols_fit(x, y);
  CHECK(hc_variance(fit, x, HcFlavor::HC0) ==
        doctest::Approx(oracles::white_hc0_two_arm(x, y)).epsilon(1e-12));
}

TEST_CASE("HC3 inflates every observation's contribution over HC0") {
  RngStream rng(5150);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 6 + rng.next_index(10);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.next_normal(0.0, 1.0);
      y[i] = 2.0 + 0.5 * x[i] + rng.next_normal(0.0, 1.0);
    }
    const RegressionFit fit = ols_fit(x, y);
    CHECK(hc_variance(fit, x, HcFlavor::HC3) >=
          hc_variance(fit, x, HcFlavor::HC0) - 1e-15);
  }
}

TEST_CASE("t_quantile examples") {
  CHECK(t_quantile(0.5, 7.0) == 0.0);
  CHECK(t_quantile(0.975, 10.0) == doctest::Approx(2.2281).epsilon(1e-4));
  CHECK(t_quantile(0.975, 1e6) == doctest::Approx(1.95997).epsilon(1e-4));
  CHECK_THROWS_AS(t_quantile(0.0, 5.0), OutOfDomain);
  CHECK_THROWS_AS(t_quantile(1.0, 5.0), OutOfDomain);
  CHECK_THROWS_AS(t_quantile(0.5, 0.0), OutOfDomain);
}

TEST_CASE("t_quantile against the quadrature oracle") {
  for (const double df : {3.0, 10.0, 100.0}) {
    for (const double p : {0.6, 0.75, 0.9, 0.975, 0.995}) {
      const double q = t_quantile(p, df);
      CHECK(q == doctest::Approx(oracles::t_quantile_quadrature(p, df)).epsilon(1e-6));
      CHECK(std::fabs(oracles::t_cdf_quadrature(q, df) - p) < 1e-8);
    }
  }
}

TEST_CASE("t_quantile and t_cdf are mutually consistent") {
  for (const double df : {3.0, 10.0, 100.0}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      CHECK(std::fabs(t_cdf(t_quantile(p, df), df) - p) < 1e-10);
    }
  }
}

TEST_CASE("noncentral_t_cdf basics") {
  CHECK(noncentral_t_cdf(0.0, TDistSpec{5.0, 0.0}) == doctest::Approx(0.5));
  for (const double t : {-2.0, -0.3, 0.7, 1.9}) {
    CHECK(noncentral_t_cdf(t, TDistSpec{12.0, 0.0}) ==
          doctest::Approx(t_cdf(t, 12.0)).epsilon(1e-9));
  }
  // Monotone in t.
  double prev = 0.0;
  for (double t = -6.0; t <= 6.0; t += 0.25) {
    const double v = noncentral_t_cdf(t, TDistSpec{8.0, 1.7});
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(noncentral_t_cdf(0.0, TDistSpec{8.0, 2.0}) == doctest::Approx(normal_cdf(-2.0)));
}

TEST_CASE("noncentral_t_cdf interval probability vs Monte Carlo oracle") {
  const double tq = t_quantile(0.975, 106.0);
  const TDistSpec spec{106.0, 2.84};
  const double exact = noncentral_t_cdf(tq, spec) - noncentral_t_cdf(-tq, spec);
  const double mc = oracles::mc_noncentral_t_interval(106.0, 2.84, -tq, tq, 10'000'000, 777);
  CHECK(exact == doctest::Approx(mc).epsilon(0.005 / 0.2));
  CHECK(exact == doctest::Approx(0.20).epsilon(0.05));  // canonical 80%-power design point
}

TEST_CASE("wald_test") {
  RegressionFit fit;
  fit.slope = 3.0;
  SUBCASE("statistic 0 when slope equals null") {
    const WaldResult res = wald_test(fit, 3.0, 2.0, 100.0);
    CHECK(res.statistic == 0.0);
    CHECK(res.p_value == doctest::Approx(1.0));
  }
  SUBCASE("normal-limit tail") {
    fit.slope = 2.0;
    const WaldResult res = wald_test(fit, 0.0, 1.0, 1e6);
    CHECK(res.p_value == doctest::Approx(0.0455).epsilon(2e-3));
  }
  SUBCASE("example-trial slope over its SE") {
    fit.slope = 6.9;
    const WaldResult res = wald_test(fit, 0.0, 1.27 * 1.27, 391.0);
    CHECK(res.statistic == doctest::Approx(5.43).epsilon(1e-3));
    CHECK(res.p_value < 1e-6);
  }
  SUBCASE("zero variance rejected") {
    CHECK_THROWS_AS(wald_test(fit, 0.0, 0.0, 10.0), ZeroVariance);
  }
}

TEST_CASE("normal quantile and cdf round trip") {
  for (const double p : {1e-8, 1e-3, 0.1, 0.3, 0.5, 0.8, 0.99, 1.0 - 1e-9}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}
