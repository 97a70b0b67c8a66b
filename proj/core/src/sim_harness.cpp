#include "mecor/sim_harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace mecor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Replicate ranges are split into contiguous blocks; every block writes to
// disjoint row indices, so results do not depend on the worker count.
template <typename Fn>
void run_blocks(std::size_t count, int threads, Fn&& fn) {
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::size_t>(count, 64))));
  if (workers == 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = static_cast<std::size_t>(w) * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        fn(lo, hi);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

enum class CorrectionKind { None, Systematic, Differential };

CorrectionKind correction_kind(const ErrorModelSpec& spec) {
  if (std::holds_alternative<SystematicError>(spec)) return CorrectionKind::Systematic;
  if (std::holds_alternative<DifferentialError>(spec)) return CorrectionKind::Differential;
  return CorrectionKind::None;
}

std::vector<CiMethod> requested_methods(unsigned mask) {
  std::vector<CiMethod> out;
  if (mask & kMethodZeroVariance) out.push_back(CiMethod::ZeroVariance);
  if (mask & kMethodDelta) out.push_back(CiMethod::Delta);
  if (mask & kMethodFieller) out.push_back(CiMethod::Fieller);
  if (mask & kMethodBootstrap) out.push_back(CiMethod::Bootstrap);
  return out;
}

// Stream tags per replicate: truth, contamination, calibration, bootstrap,
// prognostic-factor assignment. Null-hypothesis illustration runs use a
// disjoint tag block.
enum : std::uint64_t {
  kTagTruth = 0,
  kTagContamination = 1,
  kTagCalibration = 2,
  kTagBootstrap = 3,
  kTagFactor = 4,
  kTagNullBlock = 8,
};

struct ScenarioEngine {
  const ScenarioConfig& cfg;
  ErrorModelSpec model;
  CorrectionKind kind;
  std::vector<CiMethod> methods;
  TrialGenerator gen;
  std::vector<int> treatment;  // fixed design: arm 0 block then arm 1 block

  explicit ScenarioEngine(const ScenarioConfig& config)
      : cfg(config), model(resolve_error_model(config)), kind(correction_kind(model)),
        methods(requested_methods(config.methods)), gen(config.generator) {
    gen.n_per_arm = config.n_total / 2;
    treatment.resize(config.n_total);
    for (std::size_t i = gen.n_per_arm; i < config.n_total; ++i) treatment[i] = 1;
  }

  std::size_t rows_per_replicate() const { return 1 + methods.size(); }

  CalibrationDataset make_calibration(RngStream& rng) const {
    const std::size_t k = cfg.k_calibration;
    std::vector<double> y_true(k);
    std::vector<double> y_obs(k);
    if (kind == CorrectionKind::Systematic) {
      // Placebo-arm characteristics: Y ~ Normal(alpha_y, sigma^2).
      const auto& m = std::get<SystematicError>(model);
      for (std::size_t j = 0; j < k; ++j) {
        y_true[j] = rng.next_normal(gen.alpha_y, gen.sigma);
        y_obs[j] = m.theta0 + m.theta1 * y_true[j] + rng.next_normal(0.0, m.tau);
      }
      return CalibrationDataset(std::move(y_true), std::move(y_obs));
    }
    // Pilot study: K/2 per arm from the full trial model.
    const auto& m = std::get<DifferentialError>(model);
    std::vector<int> arm(k);
    for (std::size_t j = 0; j < k; ++j) {
      const bool active = j >= k / 2;
      arm[j] = active ? 1 : 0;
      y_true[j] = rng.next_normal(gen.alpha_y + (active ? gen.beta_y : 0.0), gen.sigma);
      const double theta0 = active ? m.theta01 : m.theta00;
      const double theta1 = active ? m.theta11 : m.theta10;
      const double tau = active ? m.tau1 : m.tau0;
      y_obs[j] = theta0 + theta1 * y_true[j] + rng.next_normal(0.0, tau);
    }
    return CalibrationDataset(std::move(y_true), std::move(y_obs), std::move(arm));
  }

  void simulate_replicate(std::uint32_t rep, std::span<ReplicateRow> out) const {
    RngStream truth(cfg.seed, rep, kTagTruth);
    RngStream contamination(cfg.seed, rep, kTagContamination);

    std::vector<int> factor;
    std::vector<double> y_true(cfg.n_total);
    if (const auto* prognostic = std::get_if<PrognosticFactorError>(&model)) {
      RngStream factor_rng(cfg.seed, rep, kTagFactor);
      factor = assign_prognostic_factor(cfg.n_total, prognostic->prevalence, factor_rng);
      for (std::size_t i = 0; i < cfg.n_total; ++i) {
        const int arm = treatment[i];
        y_true[i] = gen.alpha_y + gen.beta_y * arm + prognostic->gamma_y * factor[i] +
                    truth.next_normal(0.0, gen.sigma);
      }
    } else {
      for (std::size_t i = 0; i < cfg.n_total; ++i) {
        y_true[i] = gen.alpha_y + gen.beta_y * treatment[i] + truth.next_normal(0.0, gen.sigma);
      }
    }
    std::vector<double> y_obs =
        contaminate(y_true, treatment, model, contamination, factor);
    const TrialDataset trial(treatment, std::move(y_obs));

    const VarianceFlavor flavor = kind == CorrectionKind::Differential
                                      ? VarianceFlavor::HC3
                                      : VarianceFlavor::Homoscedastic;
    const double level = 1.0 - cfg.alpha;
    auto [naive, naive_ci] = naive_estimate(trial, flavor, level);

    auto& naive_row = out[0];
    naive_row.replicate = rep;
    naive_row.estimator = EstimatorKind::Naive;
    naive_row.method = CiMethod::NaiveWald;
    naive_row.estimate = naive.beta_hat;
    naive_row.lower = naive_ci.lower;
    naive_row.upper = naive_ci.upper;
    naive_row.defined = true;
    naive_row.theta1_hat = kNaN;

    if (kind == CorrectionKind::None) return;

    RngStream calibration_rng(cfg.seed, rep, kTagCalibration);
    const CalibrationDataset cal = make_calibration(calibration_rng);

    double theta1_hat = kNaN;
    std::optional<CorrectedEstimate> corrected;
    try {
      if (kind == CorrectionKind::Systematic) {
        const SystematicCalibration fit = fit_systematic(cal);
        theta1_hat = fit.theta1_hat;
        corrected = correct_systematic(naive.trial, fit);
      } else {
        const DifferentialCalibration fit = fit_differential(cal);
        theta1_hat = fit.theta11_hat;
        corrected = correct_differential(naive.trial, fit);
      }
    } catch (const Error&) {
      // Degenerate calibration draw or an exactly-zero slope: the corrected
      // estimator does not exist for this replicate.
    }

    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto& row = out[1 + m];
      row.replicate = rep;
      row.estimator = kind == CorrectionKind::Systematic
                          ? EstimatorKind::SystematicCorrected
                          : EstimatorKind::DifferentialCorrected;
      row.method = methods[m];
      row.theta1_hat = theta1_hat;
      if (!corrected) {
        row.estimate = kNaN;
        row.lower = row.upper = kNaN;
        row.defined = false;
        continue;
      }
      row.estimate = corrected->beta_hat;
      IntervalResult ci;
      switch (methods[m]) {
        case CiMethod::ZeroVariance:
          ci = ci_zero_variance(*corrected, level);
          break;
        case CiMethod::Delta:
          ci = ci_delta(*corrected, level);
          break;
        case CiMethod::Fieller:
          ci = ci_fieller(*corrected, level);
          break;
        case CiMethod::Bootstrap: {
          RngStream boot(cfg.seed, rep, kTagBootstrap);
          try {
            ci = ci_bootstrap(trial, cal, corrected->method, level, cfg.bootstrap_b, boot);
          } catch (const DegenerateBootstrap&) {
            ci.method = CiMethod::Bootstrap;
            ci.level = level;
            ci.defined = false;
            ci.failure_reason = CiFailure::DegenerateBootstrap;
            ci.bootstrap_total = cfg.bootstrap_b;
            ci.bootstrap_dropped = cfg.bootstrap_b;
          }
          break;
        }
        default:
          break;
      }
      row.lower = ci.lower;
      row.upper = ci.upper;
      row.defined = ci.defined;
      row.failure = ci.failure_reason;
      row.bootstrap_total = ci.bootstrap_total;
      row.bootstrap_dropped = ci.bootstrap_dropped;
    }
  }
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.n_total < 4 || cfg.n_total % 2 != 0)
    throw ConfigInvalid("config: n_total must be even and at least 4");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigInvalid("config: alpha must be in (0, 1)");
  if (cfg.n_replicates < 2) throw ConfigInvalid("config: need at least 2 replicates");
  if (cfg.r2_target && !(*cfg.r2_target > 0.0 && *cfg.r2_target <= 1.0))
    throw ConfigInvalid("config: r2_target must be in (0, 1]");
  if (!(cfg.generator.sigma >= 0.0)) throw ConfigInvalid("config: sigma must be non-negative");

  const CorrectionKind kind = correction_kind(cfg.error_model);
  if (kind != CorrectionKind::None) {
    if (cfg.k_calibration >= cfg.n_total)
      throw ConfigInvalid("config: calibration size K must be smaller than N");
    if (kind == CorrectionKind::Systematic && cfg.k_calibration < 3)
      throw ConfigInvalid("config: systematic calibration needs K >= 3");
    if (kind == CorrectionKind::Differential) {
      if (cfg.k_calibration % 2 != 0)
        throw ConfigInvalid("config: differential calibration needs even K");
      if (cfg.k_calibration < 6)
        throw ConfigInvalid("config: differential calibration needs K >= 6");
    }
    if ((cfg.methods & kMethodFieller) && kind == CorrectionKind::Differential)
      throw ConfigInvalid("config: the Fieller method applies to systematic error only");
    if ((cfg.methods & kMethodBootstrap) && cfg.bootstrap_b < 100)
      throw ConfigInvalid("config: bootstrap_b must be at least 100");
  } else if (cfg.methods != 0) {
    throw ConfigInvalid("config: corrected-estimator CI methods need a systematic or "
                        "differential error model");
  }

  if (const auto* het = std::get_if<HeteroscedasticError>(&cfg.error_model)) {
    if (het->tau0 < 0.0 || het->tau1 < 0.0) throw ConfigInvalid("config: tau must be >= 0");
  }
  if (const auto* sys = std::get_if<SystematicError>(&cfg.error_model)) {
    if (sys->theta1 == 0.0) throw ConfigInvalid("config: theta1 must be nonzero");
    if (sys->tau < 0.0) throw ConfigInvalid("config: tau must be >= 0");
  }
  if (const auto* dif = std::get_if<DifferentialError>(&cfg.error_model)) {
    if (dif->theta10 == 0.0 || dif->theta11 == 0.0)
      throw ConfigInvalid("config: arm slopes theta10/theta11 must be nonzero");
    if (dif->tau0 < 0.0 || dif->tau1 < 0.0) throw ConfigInvalid("config: tau must be >= 0");
  }
  if (const auto* cls = std::get_if<ClassicalError>(&cfg.error_model)) {
    if (cls->tau < 0.0) throw ConfigInvalid("config: tau must be >= 0");
  }
  if (const auto* prog = std::get_if<PrognosticFactorError>(&cfg.error_model)) {
    if (!(prog->prevalence >= 0.0 && prog->prevalence <= 1.0))
      throw ConfigInvalid("config: prevalence must be in [0, 1]");
    if (prog->tau < 0.0) throw ConfigInvalid("config: tau must be >= 0");
  }
}

ErrorModelSpec resolve_error_model(const ScenarioConfig& cfg) {
  ErrorModelSpec model = cfg.error_model;
  if (!cfg.r2_target) return model;
  const double r2 = *cfg.r2_target;
  const double sigma = cfg.generator.sigma;
  if (auto* cls = std::get_if<ClassicalError>(&model)) {
    cls->tau = tau_from_r2(r2, 1.0, sigma);
  } else if (auto* het = std::get_if<HeteroscedasticError>(&model)) {
    het->tau0 = tau_from_r2(r2, 1.0, sigma);
    het->tau1 = tau_from_r2(r2, 1.0, sigma);
  } else if (auto* sys = std::get_if<SystematicError>(&model)) {
    sys->tau = tau_from_r2(r2, sys->theta1, sigma);
  } else if (auto* dif = std::get_if<DifferentialError>(&model)) {
    dif->tau0 = tau_from_r2(r2, dif->theta10, sigma);
    dif->tau1 = tau_from_r2(r2, dif->theta11, sigma);
  } else if (auto* prog = std::get_if<PrognosticFactorError>(&model)) {
    prog->tau = tau_from_r2(r2, 1.0, sigma);
  }
  return model;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const ScenarioEngine engine(cfg);

  const std::size_t stride = engine.rows_per_replicate();
  std::vector<ReplicateRow> rows(cfg.n_replicates * stride);
  run_blocks(cfg.n_replicates, cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t rep = lo; rep < hi; ++rep) {
      engine.simulate_replicate(static_cast<std::uint32_t>(rep),
                                std::span<ReplicateRow>(rows).subspan(rep * stride, stride));
    }
  });

  ScenarioResult result;
  result.metrics = aggregate(rows, cfg.generator.beta_y);
  result.replicates = std::move(rows);
  return result;
}

MetricsReport aggregate(std::span<const ReplicateRow> rows, double true_beta,
                        double fieller_suppression) {
  if (rows.size() < 2) throw TooFewRows("aggregate: need at least 2 rows");

  struct Group {
    EstimatorKind estimator;
    CiMethod method;
    std::vector<double> estimates;
    std::size_t n_rows = 0;
    std::size_t n_defined = 0;
    std::size_t n_covered = 0;
    std::size_t n_reject = 0;  // interval excludes 0
    std::size_t n_fieller_failed = 0;
    double width_sum = 0.0;
    long long boot_total = 0;
    long long boot_dropped = 0;
  };
  std::vector<Group> groups;
  const auto group_for = [&](const ReplicateRow& row) -> Group& {
    for (auto& g : groups) {
      if (g.estimator == row.estimator && g.method == row.method) return g;
    }
    groups.push_back(Group{row.estimator, row.method, {}, 0, 0, 0, 0, 0, 0.0, 0, 0});
    return groups.back();
  };

  for (const auto& row : rows) {
    Group& g = group_for(row);
    ++g.n_rows;
    if (std::isfinite(row.estimate)) g.estimates.push_back(row.estimate);
    if (row.failure == CiFailure::FiellerUnbounded) ++g.n_fieller_failed;
    if (row.defined) {
      ++g.n_defined;
      if (row.lower <= true_beta && true_beta <= row.upper) ++g.n_covered;
      if (row.lower > 0.0 || row.upper < 0.0) ++g.n_reject;
      g.width_sum += row.upper - row.lower;
    }
    g.boot_total += row.bootstrap_total;
    g.boot_dropped += row.bootstrap_dropped;
  }

  MetricsReport report;
  report.true_beta = true_beta;
  for (const auto& g : groups) {
    report.n_replicates = std::max(report.n_replicates, g.n_rows);
    if (g.estimates.size() < 2)
      throw TooFewRows("aggregate: fewer than 2 usable estimates in a group");

    const auto n = static_cast<double>(g.estimates.size());
    double mean = 0.0;
    for (double e : g.estimates) mean += e;
    mean /= n;
    double ss = 0.0;
    double mse = 0.0;
    for (double e : g.estimates) {
      ss += (e - mean) * (e - mean);
      mse += (e - true_beta) * (e - true_beta);
    }
    mse /= n;
    const double emp_se = std::sqrt(ss / (n - 1.0));

    MetricRow row;
    row.estimator = g.estimator;
    row.method = g.method;
    row.n_replicates = g.estimates.size();
    row.n_defined = g.n_defined;
    row.pct_bias = true_beta != 0.0 ? 100.0 * (mean - true_beta) / true_beta : kNaN;
    row.emp_se = emp_se;
    row.sqrt_mse = std::sqrt(mse);
    row.mc_se_bias = emp_se / std::sqrt(n);
    row.mc_se_empse = emp_se / (2.0 * std::sqrt(n - 1.0));
    double mse_ss = 0.0;
    for (double e : g.estimates) {
      const double d = (e - true_beta) * (e - true_beta) - mse;
      mse_ss += d * d;
    }
    row.mc_se_mse = std::sqrt(mse_ss / ((n - 1.0) * n));
    row.fieller_failure_rate =
        g.n_rows > 0 ? static_cast<double>(g.n_fieller_failed) / static_cast<double>(g.n_rows)
                     : 0.0;
    row.dropped_bootstrap_rate =
        g.boot_total > 0 ? static_cast<double>(g.boot_dropped) / static_cast<double>(g.boot_total)
                         : 0.0;

    const bool suppressed =
        g.method == CiMethod::Fieller && row.fieller_failure_rate > fieller_suppression;
    if (g.n_defined > 0 && !suppressed) {
      const double coverage =
          static_cast<double>(g.n_covered) / static_cast<double>(g.n_defined);
      row.coverage = coverage;
      row.avg_ci_width = g.width_sum / static_cast<double>(g.n_defined);
      row.mc_se_coverage =
          std::sqrt(coverage * (1.0 - coverage) / static_cast<double>(g.n_defined));
    }
    if (g.n_defined > 0) {
      const double reject_rate =
          static_cast<double>(g.n_reject) / static_cast<double>(g.n_defined);
      if (true_beta == 0.0) {
        row.type1_error = reject_rate;
      } else {
        row.type2_error = 1.0 - reject_rate;
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

IllustrationReport run_illustration(const IllustrationConfig& cfg) {
  if (cfg.n_per_arm < 2) throw ConfigInvalid("illustration: need at least 2 per arm");
  if (cfg.n_replicates < 2) throw ConfigInvalid("illustration: need at least 2 replicates");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigInvalid("illustration: alpha must be in (0, 1)");

  const double tau = cfg.error_sd_fraction * cfg.sigma;
  ErrorModelSpec model = ClassicalError{0.0};
  switch (cfg.variant) {
    case IllustrationVariant::NoError:
      break;
    case IllustrationVariant::Classical:
      model = ClassicalError{tau};
      break;
    case IllustrationVariant::Systematic:
      model = SystematicError{0.0, cfg.theta1, tau};
      break;
    case IllustrationVariant::Differential:
      // Multiplicative systematic error in the active arm, classical error
      // in the placebo arm.
      model = DifferentialError{0.0, 0.0, 1.0, cfg.theta1, tau, tau};
      break;
  }

  const std::size_t n = 2 * cfg.n_per_arm;
  std::vector<int> treatment(n, 0);
  for (std::size_t i = cfg.n_per_arm; i < n; ++i) treatment[i] = 1;
  const double tq = t_quantile(1.0 - 0.5 * cfg.alpha, static_cast<double>(n - 2));

  std::vector<double> wald_alt(cfg.n_replicates);
  std::vector<double> wald_null(cfg.n_replicates);
  std::vector<double> estimates(cfg.n_replicates);

  const auto run_arm = [&](double beta, std::uint64_t tag_base, std::vector<double>& wald,
                           std::vector<double>* est) {
    run_blocks(cfg.n_replicates, cfg.threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t rep = lo; rep < hi; ++rep) {
        RngStream truth(cfg.seed, rep, tag_base + kTagTruth);
        RngStream contamination(cfg.seed, rep, tag_base + kTagContamination);
        std::vector<double> y_true(n);
        for (std::size_t i = 0; i < n; ++i) {
          y_true[i] = cfg.alpha_y + beta * treatment[i] +
                      truth.next_normal(0.0, cfg.sigma);
        }
        std::vector<double> y_obs = contaminate(y_true, treatment, model, contamination);
        const TrialDataset trial(treatment, std::move(y_obs));
        const TrialSummary ts = summarize_trial(trial);
        wald[rep] = ts.beta_star / std::sqrt(ts.s2 / ts.sxx);
        if (est) (*est)[rep] = ts.beta_star;
      }
    });
  };

  run_arm(cfg.beta_y, 0, wald_alt, &estimates);
  run_arm(0.0, kTagNullBlock, wald_null, nullptr);

  std::size_t reject_null = 0;
  for (double w : wald_null) {
    if (std::fabs(w) > tq) ++reject_null;
  }
  std::size_t accept_alt = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < cfg.n_replicates; ++i) {
    if (std::fabs(wald_alt[i]) <= tq) ++accept_alt;
    mean += estimates[i];
  }
  const auto reps = static_cast<double>(cfg.n_replicates);
  mean /= reps;
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  const double emp_var = ss / (reps - 1.0);

  IllustrationReport report;
  report.type1_error = static_cast<double>(reject_null) / reps;
  report.type2_error = static_cast<double>(accept_alt) / reps;
  report.mean_estimate = mean;
  report.emp_se = std::sqrt(emp_var);
  const double error_free_var =
      2.0 * cfg.sigma * cfg.sigma / static_cast<double>(cfg.n_per_arm);
  report.variance_inflation = emp_var / error_free_var;
  report.wald_null = std::move(wald_null);
  report.wald_alt = std::move(wald_alt);
  return report;
}

PrognosticReport run_prognostic_check(const PrognosticConfig& cfg) {
  if (cfg.n_total < 4 || cfg.n_total % 2 != 0)
    throw ConfigInvalid("prognostic check: n_total must be even and at least 4");
  if (cfg.n_replicates < 2) throw ConfigInvalid("prognostic check: need at least 2 replicates");

  const std::size_t n = cfg.n_total;
  const std::size_t n_per_arm = n / 2;
  std::vector<int> treatment(n, 0);
  for (std::size_t i = n_per_arm; i < n; ++i) treatment[i] = 1;
  const ErrorModelSpec model = cfg.error;

  std::vector<double> naive(cfg.n_replicates);
  std::vector<double> conditional(cfg.n_replicates);

  run_blocks(cfg.n_replicates, cfg.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t rep = lo; rep < hi; ++rep) {
      RngStream truth(cfg.seed, rep, kTagTruth);
      RngStream contamination(cfg.seed, rep, kTagContamination);
      RngStream factor_rng(cfg.seed, rep, kTagFactor);
      const std::vector<int> factor =
          assign_prognostic_factor(n, cfg.error.prevalence, factor_rng);
      std::vector<double> y_true(n);
      for (std::size_t i = 0; i < n; ++i) {
        y_true[i] = cfg.alpha_y + cfg.beta_y * treatment[i] +
                    cfg.error.gamma_y * factor[i] + truth.next_normal(0.0, cfg.sigma);
      }
      const std::vector<double> y =
          contaminate(y_true, treatment, model, contamination, factor);

      double x_mean = 0.0, s_mean = 0.0, y_mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x_mean += treatment[i];
        s_mean += factor[i];
        y_mean += y[i];
      }
      const double nd = static_cast<double>(n);
      x_mean /= nd;
      s_mean /= nd;
      y_mean /= nd;
      double sxx = 0.0, sss = 0.0, sxs = 0.0, sxy = 0.0, ssy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = treatment[i] - x_mean;
        const double ds = factor[i] - s_mean;
        const double dy = y[i] - y_mean;
        sxx += dx * dx;
        sss += ds * ds;
        sxs += dx * ds;
        sxy += dx * dy;
        ssy += ds * dy;
      }
      naive[rep] = sxy / sxx;
      // Coefficient on treatment when the factor enters the regression.
      conditional[rep] = (sss * sxy - sxs * ssy) / (sxx * sss - sxs * sxs);
    }
  });

  const auto mean_var = [](const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair<double, double>(mean, ss / (n - 1.0));
  };

  PrognosticReport report;
  std::tie(report.naive_mean, report.naive_empvar) = mean_var(naive);
  std::tie(report.conditional_mean, report.conditional_empvar) = mean_var(conditional);
  return report;
}

// ---------- config file format ----------

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigInvalid("config: invalid number for key '" + key + "': " + value);
  }
}

unsigned long long parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    return v;
  } catch (const std::exception&) {
    throw ConfigInvalid("config: invalid integer for key '" + key + "': " + value);
  }
}

unsigned parse_methods(const std::string& value) {
  unsigned mask = 0;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string name = trim(item);
    if (name.empty()) continue;
    if (name == "zero-variance") {
      mask |= kMethodZeroVariance;
    } else if (name == "delta") {
      mask |= kMethodDelta;
    } else if (name == "fieller") {
      mask |= kMethodFieller;
    } else if (name == "bootstrap") {
      mask |= kMethodBootstrap;
    } else if (name == "none") {
      // explicit empty set
    } else {
      throw ConfigInvalid("config: unknown CI method '" + name + "'");
    }
  }
  return mask;
}

}  // namespace

unsigned parse_ci_methods(std::string_view list) { return parse_methods(std::string(list)); }

ScenarioConfig parse_scenario_config(std::string_view text, bool* seed_present) {
  std::map<std::string, std::string> kv;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string line(text.substr(start, end - start));
    start = end + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigInvalid("config: expected 'key = value', got: " + trimmed);
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigInvalid("config: empty key or value in line: " + trimmed);
    if (!kv.emplace(key, value).second)
      throw ConfigInvalid("config: duplicate key '" + key + "'");
  }

  ScenarioConfig cfg;
  const auto take = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  const std::string model_name = take("error_model").value_or("classical");
  const auto num = [&](const char* key, double fallback) {
    const auto v = take(key);
    return v ? parse_double(key, *v) : fallback;
  };

  if (model_name == "classical") {
    cfg.error_model = ClassicalError{num("tau", 0.0)};
  } else if (model_name == "heteroscedastic") {
    cfg.error_model = HeteroscedasticError{num("tau0", 0.0), num("tau1", 0.0)};
  } else if (model_name == "systematic") {
    cfg.error_model = SystematicError{num("theta0", 0.0), num("theta1", 1.0), num("tau", 0.0)};
  } else if (model_name == "differential") {
    cfg.error_model =
        DifferentialError{num("theta00", 0.0), num("theta01", 0.0), num("theta10", 1.0),
                          num("theta11", 1.0),  num("tau0", 0.0),   num("tau1", 0.0)};
  } else if (model_name == "prognostic") {
    cfg.error_model = PrognosticFactorError{num("zeta", 0.0), num("gamma_y", 0.0),
                                            num("prevalence", 0.25), num("tau", 0.0)};
  } else {
    throw ConfigInvalid("config: unknown error_model '" + model_name + "'");
  }

  if (const auto v = take("n_total")) cfg.n_total = parse_uint("n_total", *v);
  if (const auto v = take("k_calibration"))
    cfg.k_calibration = parse_uint("k_calibration", *v);
  cfg.generator.alpha_y = num("alpha_y", cfg.generator.alpha_y);
  cfg.generator.beta_y = num("beta_y", cfg.generator.beta_y);
  cfg.generator.sigma = num("sigma", cfg.generator.sigma);
  if (const auto v = take("r2_target")) cfg.r2_target = parse_double("r2_target", *v);
  if (const auto v = take("n_replicates")) cfg.n_replicates = parse_uint("n_replicates", *v);
  cfg.alpha = num("alpha", cfg.alpha);
  if (const auto v = take("bootstrap_b"))
    cfg.bootstrap_b = static_cast<int>(parse_uint("bootstrap_b", *v));
  if (seed_present) *seed_present = false;
  if (const auto v = take("seed")) {
    cfg.seed = parse_uint("seed", *v);
    if (seed_present) *seed_present = true;
  }
  if (const auto v = take("threads"))
    cfg.threads = static_cast<int>(parse_uint("threads", *v));

  if (const auto v = take("methods")) {
    cfg.methods = parse_methods(*v);
  } else {
    switch (correction_kind(cfg.error_model)) {
      case CorrectionKind::Systematic:
        cfg.methods = kMethodZeroVariance | kMethodDelta | kMethodFieller | kMethodBootstrap;
        break;
      case CorrectionKind::Differential:
        cfg.methods = kMethodZeroVariance | kMethodDelta | kMethodBootstrap;
        break;
      case CorrectionKind::None:
        cfg.methods = 0;
        break;
    }
  }

  if (!kv.empty()) throw ConfigInvalid("config: unknown key '" + kv.begin()->first + "'");
  validate_config(cfg);
  return cfg;
}

std::string canonical_scenario_text(const ScenarioConfig& cfg) {
  const ErrorModelSpec model = resolve_error_model(cfg);
  std::map<std::string, std::string> kv;
  kv["n_total"] = std::to_string(cfg.n_total);
  kv["k_calibration"] = std::to_string(cfg.k_calibration);
  kv["alpha_y"] = format_double(cfg.generator.alpha_y);
  kv["beta_y"] = format_double(cfg.generator.beta_y);
  kv["sigma"] = format_double(cfg.generator.sigma);
  kv["n_replicates"] = std::to_string(cfg.n_replicates);
  kv["alpha"] = format_double(cfg.alpha);
  kv["bootstrap_b"] = std::to_string(cfg.bootstrap_b);
  kv["seed"] = std::to_string(cfg.seed);

  std::string methods;
  for (const CiMethod m : requested_methods(cfg.methods)) {
    if (!methods.empty()) methods += ',';
    methods += method_name(m);
  }
  kv["methods"] = methods.empty() ? "none" : methods;

  if (const auto* cls = std::get_if<ClassicalError>(&model)) {
    kv["error_model"] = "classical";
    kv["tau"] = format_double(cls->tau);
  } else if (const auto* het = std::get_if<HeteroscedasticError>(&model)) {
    kv["error_model"] = "heteroscedastic";
    kv["tau0"] = format_double(het->tau0);
    kv["tau1"] = format_double(het->tau1);
  } else if (const auto* sys = std::get_if<SystematicError>(&model)) {
    kv["error_model"] = "systematic";
    kv["theta0"] = format_double(sys->theta0);
    kv["theta1"] = format_double(sys->theta1);
    kv["tau"] = format_double(sys->tau);
  } else if (const auto* dif = std::get_if<DifferentialError>(&model)) {
    kv["error_model"] = "differential";
    kv["theta00"] = format_double(dif->theta00);
    kv["theta01"] = format_double(dif->theta01);
    kv["theta10"] = format_double(dif->theta10);
    kv["theta11"] = format_double(dif->theta11);
    kv["tau0"] = format_double(dif->tau0);
    kv["tau1"] = format_double(dif->tau1);
  } else if (const auto* prog = std::get_if<PrognosticFactorError>(&model)) {
    kv["error_model"] = "prognostic";
    kv["zeta"] = format_double(prog->zeta);
    kv["gamma_y"] = format_double(prog->gamma_y);
    kv["prevalence"] = format_double(prog->prevalence);
    kv["tau"] = format_double(prog->tau);
  }

  std::string out;
  for (const auto& [key, value] : kv) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Naive:
      return "naive";
    case EstimatorKind::SystematicCorrected:
    case EstimatorKind::DifferentialCorrected:
      return "corrected";
  }
  return "unknown";
}

const char* method_name(CiMethod method) {
  switch (method) {
    case CiMethod::NaiveWald:
      return "naive-wald";
    case CiMethod::ZeroVariance:
      return "zero-variance";
    case CiMethod::Delta:
      return "delta";
    case CiMethod::Fieller:
      return "fieller";
    case CiMethod::Bootstrap:
      return "bootstrap";
  }
  return "unknown";
}

}  // namespace mecor
