#include "mecor/correction.hpp"

#include <algorithm>
#include <cmath>

namespace mecor {

namespace {

IntervalResult wald_interval(double center, double variance, double df, double level,
                             CiMethod method) {
  if (!(level > 0.0 && level < 1.0)) throw OutOfDomain("interval level must be in (0, 1)");
  if (!(variance >= 0.0)) throw OutOfDomain("interval variance must be non-negative");
  const double tq = t_quantile(0.5 * (1.0 + level), df);
  const double half = tq * std::sqrt(variance);
  IntervalResult res;
  res.lower = center - half;
  res.upper = center + half;
  res.level = level;
  res.method = method;
  res.defined = true;
  return res;
}

// White/HC variance of the arm-difference slope from within-arm residual
// sums of squares. For a binary design the hat value is constant per arm
// (1/n_x), so the generic estimator reduces to these two terms.
double hc_from_arm_rss(double rss0, double rss1, std::size_t n0, std::size_t n1, bool hc3) {
  const double n = static_cast<double>(n0 + n1);
  const double d0 = static_cast<double>(n1) / n;
  const double d1 = static_cast<double>(n0) / n;
  const double sxx = static_cast<double>(n0) * static_cast<double>(n1) / n;
  double w0 = d0 * d0 * rss0;
  double w1 = d1 * d1 * rss1;
  if (hc3) {
    if (w0 != 0.0) {
      const double g = 1.0 - 1.0 / static_cast<double>(n0);
      w0 /= g * g;
    }
    if (w1 != 0.0) {
      const double g = 1.0 - 1.0 / static_cast<double>(n1);
      w1 /= g * g;
    }
  }
  return (w0 + w1) / (sxx * sxx);
}

}  // namespace

TrialSummary summarize_trial(const TrialDataset& trial) {
  const auto x = trial.treatment();
  const auto y = trial.endpoint();
  std::vector<double> xd(x.begin(), x.end());
  const RegressionFit fit = ols_fit(xd, y);

  TrialSummary ts;
  ts.alpha_star = fit.intercept;
  ts.beta_star = fit.slope;
  ts.s2 = fit.residual_variance;
  ts.sxx = fit.sxx;
  ts.n = fit.n;
  ts.n_by_arm = trial.arm_counts();
  for (std::size_t i = 0; i < fit.n; ++i) {
    ts.rss_by_arm[static_cast<std::size_t>(x[i])] += fit.residuals[i] * fit.residuals[i];
  }
  for (std::size_t arm = 0; arm < 2; ++arm) {
    ts.s2_by_arm[arm] = ts.n_by_arm[arm] > 1
                            ? ts.rss_by_arm[arm] / static_cast<double>(ts.n_by_arm[arm] - 1)
                            : 0.0;
  }
  ts.hc0 = hc_variance(fit, xd, HcFlavor::HC0);
  ts.hc3 = hc_variance(fit, xd, HcFlavor::HC3);
  return ts;
}

std::pair<CorrectedEstimate, IntervalResult> naive_estimate(const TrialDataset& trial,
                                                            VarianceFlavor flavor,
                                                            double level) {
  const TrialSummary ts = summarize_trial(trial);
  CorrectedEstimate est;
  est.alpha_hat = ts.alpha_star;
  est.beta_hat = ts.beta_star;
  est.method = EstimatorKind::Naive;
  est.trial = ts;

  const double variance =
      flavor == VarianceFlavor::HC3 ? ts.hc3 : ts.s2 / ts.sxx;
  IntervalResult ci = wald_interval(ts.beta_star, variance,
                                    static_cast<double>(ts.n - 2), level, CiMethod::NaiveWald);
  return {est, ci};
}

CorrectedEstimate correct_systematic(const TrialSummary& trial,
                                     const SystematicCalibration& cal) {
  if (cal.theta1_hat == 0.0)
    throw ThetaOneZero("systematic correction: estimated theta1 is zero");
  CorrectedEstimate est;
  est.method = EstimatorKind::SystematicCorrected;
  est.trial = trial;
  est.systematic_cal = cal;
  est.beta_hat = trial.beta_star / cal.theta1_hat;
  est.alpha_hat = (trial.alpha_star - cal.theta0_hat) / cal.theta1_hat;
  return est;
}

CorrectedEstimate correct_systematic(const TrialDataset& trial,
                                     const SystematicCalibration& cal) {
  return correct_systematic(summarize_trial(trial), cal);
}

CorrectedEstimate correct_differential(const TrialSummary& trial,
                                       const DifferentialCalibration& cal) {
  if (cal.theta10_hat == 0.0 || cal.theta11_hat == 0.0)
    throw ThetaZero("differential correction: an arm slope estimate is zero");
  CorrectedEstimate est;
  est.method = EstimatorKind::DifferentialCorrected;
  est.trial = trial;
  est.differential_cal = cal;
  est.alpha_hat = (trial.alpha_star - cal.theta00_hat) / cal.theta10_hat;
  est.beta_hat =
      (trial.beta_star + trial.alpha_star - cal.theta01_hat) / cal.theta11_hat - est.alpha_hat;
  return est;
}

CorrectedEstimate correct_differential(const TrialDataset& trial,
                                       const DifferentialCalibration& cal) {
  return correct_differential(summarize_trial(trial), cal);
}

IntervalResult ci_zero_variance(const CorrectedEstimate& est, double level) {
  const TrialSummary& ts = est.trial;
  const double df = static_cast<double>(ts.n - 2);

  if (est.method == EstimatorKind::SystematicCorrected) {
    const double theta1 = est.systematic_cal->theta1_hat;
    const double variance = ts.s2 / (theta1 * theta1) / ts.sxx;
    IntervalResult res = wald_interval(est.beta_hat, variance, df, level, CiMethod::ZeroVariance);
    return res;
  }
  if (est.method == EstimatorKind::DifferentialCorrected) {
    const DifferentialCalibration& cal = *est.differential_cal;
    // Adjusted endpoints scale each arm's residuals by 1/theta1x; HC3 on
    // the adjusted regression, with theta treated as fixed.
    const double rss0 = ts.rss_by_arm[0] / (cal.theta10_hat * cal.theta10_hat);
    const double rss1 = ts.rss_by_arm[1] / (cal.theta11_hat * cal.theta11_hat);
    const double variance = hc_from_arm_rss(rss0, rss1, ts.n_by_arm[0], ts.n_by_arm[1], true);
    return wald_interval(est.beta_hat, variance, df, level, CiMethod::ZeroVariance);
  }
  throw OutOfDomain("ci_zero_variance: needs a corrected estimate");
}

IntervalResult ci_delta(const CorrectedEstimate& est, double level) {
  const TrialSummary& ts = est.trial;
  const double df = static_cast<double>(ts.n - 2);

  if (est.method == EstimatorKind::SystematicCorrected) {
    const SystematicCalibration& cal = *est.systematic_cal;
    const double theta1_sq = cal.theta1_hat * cal.theta1_hat;
    const double variance =
        (ts.s2 / ts.sxx + est.beta_hat * est.beta_hat * cal.t2 / cal.syy) / theta1_sq;
    return wald_interval(est.beta_hat, variance, df, level, CiMethod::Delta);
  }
  if (est.method == EstimatorKind::DifferentialCorrected) {
    const DifferentialCalibration& cal = *est.differential_cal;
    const auto& cov = cal.theta_covariance;  // (theta00, theta10, theta01, theta11)
    const double n0 = static_cast<double>(ts.n_by_arm[0]);
    const double n1 = static_cast<double>(ts.n_by_arm[1]);

    const double var_alpha_star = ts.s2_by_arm[0] / n0;
    const double var_beta_star = ts.s2_by_arm[0] / n0 + ts.s2_by_arm[1] / n1;
    const double cov_alpha_beta = -ts.s2_by_arm[0] / n0;

    const double a_hat = est.alpha_hat;
    const double sum_hat = est.beta_hat + est.alpha_hat;

    const double var_alpha_y =
        (var_alpha_star + a_hat * a_hat * cov[1][1] + cov[0][0] + 2.0 * a_hat * cov[0][1]) /
        (cal.theta10_hat * cal.theta10_hat);
    double variance =
        (sum_hat * sum_hat * cov[3][3] + var_beta_star + var_alpha_star +
         2.0 * cov_alpha_beta + cov[2][2] + 2.0 * sum_hat * cov[2][3]) /
            (cal.theta11_hat * cal.theta11_hat) +
        var_alpha_y;
    variance = std::max(variance, 0.0);
    return wald_interval(est.beta_hat, variance, df, level, CiMethod::Delta);
  }
  throw OutOfDomain("ci_delta: needs a corrected estimate");
}

IntervalResult ci_fieller(const CorrectedEstimate& est, double level) {
  if (est.method != EstimatorKind::SystematicCorrected)
    throw OutOfDomain("ci_fieller: systematic correction only");
  if (!(level > 0.0 && level < 1.0)) throw OutOfDomain("interval level must be in (0, 1)");

  const TrialSummary& ts = est.trial;
  const SystematicCalibration& cal = *est.systematic_cal;
  const double df = static_cast<double>(ts.n - 2);
  const double alpha = 1.0 - level;

  IntervalResult res;
  res.level = level;
  res.method = CiMethod::Fieller;
  if (!theta1_significant(cal, alpha, df)) {
    res.failure_reason = CiFailure::FiellerUnbounded;
    return res;
  }

  const double tq = t_quantile(1.0 - 0.5 * alpha, df);
  const double var_theta1 = cal.t2 / cal.syy;
  const double var_beta_star = ts.s2 / ts.sxx;
  const double theta1 = cal.theta1_hat;
  const double beta_star = ts.beta_star;

  const double a = var_theta1 * tq * tq - theta1 * theta1;
  const double b = 2.0 * beta_star * theta1;
  const double c = var_beta_star * tq * tq - beta_star * beta_star;
  const double disc = std::max(b * b - 4.0 * a * c, 0.0);
  const double sqrt_disc = std::sqrt(disc);
  const double r1 = (-b + sqrt_disc) / (2.0 * a);
  const double r2 = (-b - sqrt_disc) / (2.0 * a);

  res.lower = std::min(r1, r2);
  res.upper = std::max(r1, r2);
  res.defined = true;
  return res;
}

IntervalResult ci_bootstrap(const TrialDataset& trial, const CalibrationDataset& cal,
                            EstimatorKind kind, double level, int replicates, RngStream& rng) {
  if (replicates < 100) throw OutOfDomain("bootstrap: need at least 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw OutOfDomain("interval level must be in (0, 1)");
  const bool differential = kind == EstimatorKind::DifferentialCorrected;
  if (!differential && kind != EstimatorKind::SystematicCorrected)
    throw OutOfDomain("bootstrap: systematic or differential correction only");
  if (differential && !cal.treatment())
    throw MissingTreatment("bootstrap: differential correction needs a pilot calibration set");

  const auto x = trial.treatment();
  const auto y = trial.endpoint();
  const std::size_t n = trial.size();
  const std::size_t k = cal.size();
  const auto yt = cal.y_true();
  const auto yo = cal.y_observed();
  const int* cal_arm = differential ? cal.treatment()->data() : nullptr;

  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(replicates));
  int dropped = 0;

  for (int b = 0; b < replicates; ++b) {
    // Step 1: resample the calibration set and refit the error model.
    double theta0[2] = {0.0, 0.0};
    double theta1[2] = {1.0, 1.0};
    bool cal_ok = true;
    if (!differential) {
      double sy = 0.0, sw = 0.0, syy = 0.0, syw = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t idx = rng.next_index(k);
        sy += yt[idx];
        sw += yo[idx];
        syy += yt[idx] * yt[idx];
        syw += yt[idx] * yo[idx];
      }
      const double kd = static_cast<double>(k);
      const double denom = syy - sy * sy / kd;
      if (!(denom > 0.0)) {
        cal_ok = false;  // resample collapsed onto equal replicates
      } else {
        theta1[0] = (syw - sy * sw / kd) / denom;
        cal_ok = theta1[0] != 0.0;
      }
    } else {
      double sy[2] = {0, 0}, sw[2] = {0, 0}, syy[2] = {0, 0}, syw[2] = {0, 0};
      std::size_t cnt[2] = {0, 0};
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t idx = rng.next_index(k);
        const auto arm = static_cast<std::size_t>(cal_arm[idx]);
        sy[arm] += yt[idx];
        sw[arm] += yo[idx];
        syy[arm] += yt[idx] * yt[idx];
        syw[arm] += yt[idx] * yo[idx];
        ++cnt[arm];
      }
      for (std::size_t arm = 0; arm < 2 && cal_ok; ++arm) {
        if (cnt[arm] < 2) {
          cal_ok = false;
          break;
        }
        const double kd = static_cast<double>(cnt[arm]);
        const double denom = syy[arm] - sy[arm] * sy[arm] / kd;
        if (!(denom > 0.0)) {
          cal_ok = false;
          break;
        }
        theta1[arm] = (syw[arm] - sy[arm] * sw[arm] / kd) / denom;
        theta0[arm] = (sw[arm] - theta1[arm] * sy[arm]) / kd;
        cal_ok = theta1[arm] != 0.0;
      }
    }
    if (!cal_ok) {
      ++dropped;
      continue;
    }

    // Step 2: resample the trial and apply the corrected estimator.
    double sum_arm[2] = {0.0, 0.0};
    std::size_t n_arm[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = rng.next_index(n);
      const auto arm = static_cast<std::size_t>(x[idx]);
      sum_arm[arm] += y[idx];
      ++n_arm[arm];
    }
    if (n_arm[0] == 0 || n_arm[1] == 0) {
      ++dropped;
      continue;
    }
    const double alpha_star = sum_arm[0] / static_cast<double>(n_arm[0]);
    const double beta_star = sum_arm[1] / static_cast<double>(n_arm[1]) - alpha_star;

    if (!differential) {
      estimates.push_back(beta_star / theta1[0]);
    } else {
      const double alpha_y = (alpha_star - theta0[0]) / theta1[0];
      estimates.push_back((beta_star + alpha_star - theta0[1]) / theta1[1] - alpha_y);
    }
  }

  if (dropped * 2 > replicates)
    throw DegenerateBootstrap("bootstrap: more than half of the resamples were degenerate");

  const auto [lo, hi] = percentile_interval(std::move(estimates), level);
  IntervalResult res;
  res.lower = lo;
  res.upper = hi;
  res.level = level;
  res.method = CiMethod::Bootstrap;
  res.defined = true;
  res.bootstrap_total = replicates;
  res.bootstrap_dropped = dropped;
  return res;
}

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
  if (values.size() < 2) throw TooFewRows("percentile interval: need at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw OutOfDomain("interval level must be in (0, 1)");
  std::sort(values.begin(), values.end());
  const double alpha = 1.0 - level;
  const double m = static_cast<double>(values.size() + 1);
  // 1e-9 snap absorbs decimal representation error so that e.g.
  // 0.025 * 1000 lands on rank 25 exactly.
  const double lo_raw = std::ceil(0.5 * alpha * m - 1e-9);
  const double hi_raw = std::floor((1.0 - 0.5 * alpha) * m + 1e-9);
  const auto clamp_rank = [&](double r) {
    return static_cast<std::size_t>(
        std::clamp(r, 1.0, static_cast<double>(values.size())));
  };
  return {values[clamp_rank(lo_raw) - 1], values[clamp_rank(hi_raw) - 1]};
}

double power_type2(double effect, double se, double df, double alpha) {
  if (!(se > 0.0)) throw ZeroSE("power: se must be positive");
  if (!(df > 0.0)) throw OutOfDomain("power: df must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw OutOfDomain("power: alpha must be in (0, 1)");
  if (!std::isfinite(effect)) throw NonFiniteInput("power: non-finite effect");
  const double tq = t_quantile(1.0 - 0.5 * alpha, df);
  const TDistSpec spec{df, effect / se};
  return noncentral_t_cdf(tq, spec) - noncentral_t_cdf(-tq, spec);
}

long long sample_size_inflation(long long n, double reliability) {
  if (n <= 0) throw OutOfDomain("sample size must be positive");
  if (!(reliability > 0.0 && reliability <= 1.0))
    throw OutOfDomain("reliability must be in (0, 1]");
  const double v = static_cast<double>(n) / reliability;
  const double rounded = static_cast<double>(std::llround(v));
  if (std::fabs(v - rounded) < 1e-9 * std::max(1.0, std::fabs(v)))
    return static_cast<long long>(rounded);
  return static_cast<long long>(std::ceil(v));
}

long long solve_sample_size(double effect, double baseline_se, long long baseline_n,
                            double reliability, double alpha, double target_type2) {
  if (!(baseline_se > 0.0)) throw ZeroSE("solve: baseline se must be positive");
  if (baseline_n < 4) throw OutOfDomain("solve: baseline n must be at least 4");
  if (!(reliability > 0.0 && reliability <= 1.0))
    throw OutOfDomain("solve: reliability must be in (0, 1]");
  if (!(target_type2 > 0.0 && target_type2 < 1.0))
    throw OutOfDomain("solve: target type-II must be in (0, 1)");

  const auto type2_at = [&](long long m) {
    const double se = baseline_se *
                      std::sqrt(static_cast<double>(baseline_n) / static_cast<double>(m)) /
                      std::sqrt(reliability);
    return power_type2(effect, se, static_cast<double>(m - 2), alpha);
  };

  long long lo = 4;
  long long hi = std::max<long long>(baseline_n, 4);
  while (type2_at(hi) > target_type2) {
    hi *= 2;
    if (hi > 100'000'000LL) throw OutOfDomain("solve: target type-II unattainable");
  }
  while (lo < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (type2_at(mid) <= target_type2) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace mecor
