// mecor: measurement error correction for continuous trial endpoints.
//
// Subcommands: correct (analyse user data), simulate (Monte Carlo scenario
// runs), illustrate (example-trial error-impact runs), power (Type-II error
// and sample-size utilities). Exit codes: 0 success, 2 usage/config/schema
// error, 3 data or degeneracy error.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mecor/sim_harness.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------- small formatting / io helpers ----------

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open output file: " + path.string());
  out << content;
  if (!out) throw SchemaError("failed writing output file: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const std::string& canonical_config, std::uint64_t seed) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config_digest"] = fnv1a_hex(canonical_config);
  manifest["seed"] = seed;
  manifest["tool_version"] = kToolVersion;
  manifest["timestamp"] = utc_timestamp();
  manifest["schemas"] = {{"metrics.csv", 1}, {"replicates.csv", 1}, {"report.csv", 1}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------- csv input ----------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw SchemaError("missing required column '" + name + "'");
  }
  bool has_column(const std::string& name) const {
    for (const auto& h : header) {
      if (h == name) return true;
    }
    return false;
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

CsvTable read_csv(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  CsvTable table;
  std::istringstream ss(content);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size())
        throw SchemaError(path.string() + ": row has " + std::to_string(fields.size()) +
                          " fields, header has " + std::to_string(table.header.size()));
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw SchemaError(path.string() + ": empty file");
  return table;
}

double parse_csv_double(const std::string& value, const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw SchemaError("column '" + column + "': invalid number '" + value + "'");
  }
}

int parse_csv_binary(const std::string& value, const std::string& column) {
  if (value == "0") return 0;
  if (value == "1") return 1;
  throw SchemaError("column '" + column + "': expected 0 or 1, got '" + value + "'");
}

mecor::TrialDataset read_trial_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t treat_col = table.column("treatment");
  const std::size_t y_col = table.column("y_observed");
  std::vector<int> treatment;
  std::vector<double> endpoint;
  treatment.reserve(table.rows.size());
  endpoint.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    treatment.push_back(parse_csv_binary(row[treat_col], "treatment"));
    endpoint.push_back(parse_csv_double(row[y_col], "y_observed"));
  }
  return mecor::TrialDataset(std::move(treatment), std::move(endpoint));
}

mecor::CalibrationDataset read_calibration_csv(const std::filesystem::path& path,
                                               bool need_treatment) {
  const CsvTable table = read_csv(path);
  const std::size_t true_col = table.column("y_true");
  const std::size_t obs_col = table.column("y_observed");
  if (need_treatment && !table.has_column("treatment"))
    throw SchemaError("differential model: calibration file needs a 'treatment' column");
  std::optional<std::size_t> treat_col;
  if (table.has_column("treatment")) treat_col = table.column("treatment");

  std::vector<double> y_true;
  std::vector<double> y_observed;
  std::optional<std::vector<int>> treatment;
  if (treat_col) treatment.emplace();
  for (const auto& row : table.rows) {
    y_true.push_back(parse_csv_double(row[true_col], "y_true"));
    y_observed.push_back(parse_csv_double(row[obs_col], "y_observed"));
    if (treat_col) treatment->push_back(parse_csv_binary(row[*treat_col], "treatment"));
  }
  return mecor::CalibrationDataset(std::move(y_true), std::move(y_observed),
                                   std::move(treatment));
}

// ---------- csv output ----------

const char* failure_name(mecor::CiFailure f) {
  switch (f) {
    case mecor::CiFailure::None:
      return "";
    case mecor::CiFailure::FiellerUnbounded:
      return "fieller-unbounded";
    case mecor::CiFailure::DegenerateBootstrap:
      return "degenerate-bootstrap";
  }
  return "";
}

std::string metrics_csv(const mecor::MetricsReport& report) {
  std::string out =
      "estimator,method,n_replicates,n_defined,pct_bias,emp_se,sqrt_mse,coverage,"
      "avg_ci_width,type1_error,type2_error,fieller_failure_rate,dropped_bootstrap_rate,"
      "mc_se_bias,mc_se_empse,mc_se_mse,mc_se_coverage\n";
  for (const auto& r : report.rows) {
    out += mecor::estimator_name(r.estimator);
    out += ',';
    out += mecor::method_name(r.method);
    out += ',' + std::to_string(r.n_replicates) + ',' + std::to_string(r.n_defined);
    out += ',' + (std::isfinite(r.pct_bias) ? fmt(r.pct_bias) : std::string());
    out += ',' + fmt(r.emp_se) + ',' + fmt(r.sqrt_mse);
    out += ',' + fmt_opt(r.coverage) + ',' + fmt_opt(r.avg_ci_width);
    out += ',' + fmt_opt(r.type1_error) + ',' + fmt_opt(r.type2_error);
    out += ',' + fmt(r.fieller_failure_rate) + ',' + fmt(r.dropped_bootstrap_rate);
    out += ',' + fmt(r.mc_se_bias) + ',' + fmt(r.mc_se_empse) + ',' + fmt(r.mc_se_mse);
    out += ',' + fmt_opt(r.mc_se_coverage);
    out += '\n';
  }
  return out;
}

std::string replicates_csv(const std::vector<mecor::ReplicateRow>& rows) {
  std::string out =
      "replicate_id,estimator,method,estimate,ci_lower,ci_upper,defined,theta1_hat\n";
  for (const auto& r : rows) {
    out += std::to_string(r.replicate);
    out += ',';
    out += mecor::estimator_name(r.estimator);
    out += ',';
    out += mecor::method_name(r.method);
    out += ',' + (std::isfinite(r.estimate) ? fmt(r.estimate) : std::string());
    out += ',' + (r.defined ? fmt(r.lower) : std::string());
    out += ',' + (r.defined ? fmt(r.upper) : std::string());
    out += r.defined ? ",1" : ",0";
    out += ',' + (std::isfinite(r.theta1_hat) ? fmt(r.theta1_hat) : std::string());
    out += '\n';
  }
  return out;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MECOR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// ---------- correct ----------

struct CorrectOptions {
  std::string trial_file;
  std::string calibration_file;
  std::string model = "systematic";
  std::string ci_list;
  double alpha = 0.05;
  int boot_reps = 999;
  std::optional<std::uint64_t> seed;
  std::string out_file = "report.csv";
};

int run_correct(const CorrectOptions& opt) {
  if (opt.model != "systematic" && opt.model != "differential")
    throw mecor::ConfigInvalid("--model must be 'systematic' or 'differential'");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw mecor::ConfigInvalid("--alpha must be in (0, 1)");
  const bool differential = opt.model == "differential";

  unsigned methods;
  if (opt.ci_list.empty()) {
    methods = differential
                  ? (mecor::kMethodZeroVariance | mecor::kMethodDelta | mecor::kMethodBootstrap)
                  : (mecor::kMethodZeroVariance | mecor::kMethodDelta | mecor::kMethodFieller |
                     mecor::kMethodBootstrap);
  } else {
    methods = mecor::parse_ci_methods(opt.ci_list);
  }
  if (differential && (methods & mecor::kMethodFieller))
    throw mecor::ConfigInvalid("the Fieller method applies to the systematic model only");

  const mecor::TrialDataset trial = read_trial_csv(opt.trial_file);
  const mecor::CalibrationDataset cal = read_calibration_csv(opt.calibration_file, differential);

  const double level = 1.0 - opt.alpha;
  const auto flavor =
      differential ? mecor::VarianceFlavor::HC3 : mecor::VarianceFlavor::Homoscedastic;
  const auto [naive, naive_ci] = mecor::naive_estimate(trial, flavor, level);

  double observed_scale;
  {
    double mean = 0.0;
    for (const double v : cal.y_observed()) mean += v;
    mean /= static_cast<double>(cal.size());
    double ss = 0.0;
    for (const double v : cal.y_observed()) ss += (v - mean) * (v - mean);
    observed_scale = std::sqrt(ss / std::max(1.0, static_cast<double>(cal.size()) - 1.0));
  }

  mecor::CorrectedEstimate corrected;
  double theta1_hat;
  if (differential) {
    const mecor::DifferentialCalibration fit = mecor::fit_differential(cal);
    corrected = mecor::correct_differential(naive.trial, fit);
    theta1_hat = fit.theta11_hat;
    std::printf("calibration: theta00=%.6g theta10=%.6g theta01=%.6g theta11=%.6g\n",
                fit.theta00_hat, fit.theta10_hat, fit.theta01_hat, fit.theta11_hat);
  } else {
    const mecor::SystematicCalibration fit = mecor::fit_systematic(cal);
    corrected = mecor::correct_systematic(naive.trial, fit);
    theta1_hat = fit.theta1_hat;
    std::printf("calibration: theta0=%.6g theta1=%.6g t2=%.6g\n", fit.theta0_hat,
                fit.theta1_hat, fit.t2);
  }
  if (std::fabs(theta1_hat) < 1e-6 * observed_scale) {
    std::fprintf(stderr,
                 "warning: estimated calibration slope %.6g is within 1e-6 of zero at the "
                 "data scale; corrected estimates are unstable\n",
                 theta1_hat);
  }

  std::vector<std::pair<const char*, mecor::IntervalResult>> rows;
  rows.emplace_back("naive", naive_ci);
  if (methods & mecor::kMethodZeroVariance)
    rows.emplace_back("corrected", mecor::ci_zero_variance(corrected, level));
  if (methods & mecor::kMethodDelta)
    rows.emplace_back("corrected", mecor::ci_delta(corrected, level));
  if (methods & mecor::kMethodFieller)
    rows.emplace_back("corrected", mecor::ci_fieller(corrected, level));
  if (methods & mecor::kMethodBootstrap) {
    std::uint64_t seed;
    if (opt.seed) {
      seed = *opt.seed;
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::printf("bootstrap seed (generated): %" PRIu64 "\n", seed);
    }
    mecor::RngStream rng(seed);
    rows.emplace_back("corrected", mecor::ci_bootstrap(trial, cal, corrected.method, level,
                                                       opt.boot_reps, rng));
  }

  std::string out = "estimator,method,estimate,ci_lower,ci_upper,level,defined,failure_reason\n";
  for (const auto& [estimator, ci] : rows) {
    const bool is_naive = std::string_view(estimator) == "naive";
    const double estimate = is_naive ? naive.beta_hat : corrected.beta_hat;
    out += estimator;
    out += ',';
    out += mecor::method_name(ci.method);
    out += ',' + fmt(estimate);
    out += ',' + (ci.defined ? fmt(ci.lower) : std::string());
    out += ',' + (ci.defined ? fmt(ci.upper) : std::string());
    out += ',' + fmt(ci.level);
    out += ci.defined ? ",1," : ",0,";
    out += failure_name(ci.failure_reason);
    out += '\n';
  }
  write_file(opt.out_file, out);
  std::printf("naive estimate: %.10g\ncorrected estimate: %.10g\nreport: %s\n", naive.beta_hat,
              corrected.beta_hat, opt.out_file.c_str());
  return 0;
}

// ---------- simulate ----------

struct SimulateOptions {
  std::string config_file;
  std::optional<std::uint64_t> replicates;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool emit_replicates = false;
  int threads = 0;
};

int run_simulate(const SimulateOptions& opt) {
  const std::string text = read_file(opt.config_file);
  bool seed_in_config = false;
  mecor::ScenarioConfig cfg = mecor::parse_scenario_config(text, &seed_in_config);
  if (opt.replicates) cfg.n_replicates = *opt.replicates;
  if (opt.seed) {
    cfg.seed = *opt.seed;
  } else if (!seed_in_config) {
    throw mecor::ConfigInvalid("simulate needs a seed (config 'seed' key or --seed)");
  }
  cfg.threads = resolve_threads(opt.threads > 0 ? opt.threads : cfg.threads);
  mecor::validate_config(cfg);

  const mecor::ScenarioResult result = mecor::run_scenario(cfg);

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "metrics.csv", metrics_csv(result.metrics));
  if (opt.emit_replicates) write_file(dir / "replicates.csv", replicates_csv(result.replicates));
  write_manifest(dir, "simulate", mecor::canonical_scenario_text(cfg), cfg.seed);

  std::printf("scenario complete: %zu replicates, %zu metric rows -> %s\n",
              result.metrics.n_replicates, result.metrics.rows.size(),
              (dir / "metrics.csv").string().c_str());
  return 0;
}

// ---------- illustrate ----------

struct IllustrateOptions {
  std::string variant = "no-error";
  std::uint64_t replicates = 2000;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t n_per_arm = 54;
  double alpha = 0.05;
};

int run_illustrate(const IllustrateOptions& opt) {
  mecor::IllustrationConfig cfg;
  if (opt.variant == "no-error") {
    cfg.variant = mecor::IllustrationVariant::NoError;
  } else if (opt.variant == "classical") {
    cfg.variant = mecor::IllustrationVariant::Classical;
  } else if (opt.variant == "systematic") {
    cfg.variant = mecor::IllustrationVariant::Systematic;
  } else if (opt.variant == "differential") {
    cfg.variant = mecor::IllustrationVariant::Differential;
  } else {
    throw mecor::ConfigInvalid(
        "--variant must be one of no-error, classical, systematic, differential");
  }
  if (!opt.seed) throw mecor::ConfigInvalid("illustrate needs --seed");
  cfg.seed = *opt.seed;
  cfg.n_replicates = opt.replicates;
  cfg.n_per_arm = opt.n_per_arm;
  cfg.alpha = opt.alpha;
  cfg.threads = resolve_threads(opt.threads);

  const mecor::IllustrationReport report = mecor::run_illustration(cfg);

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);
  std::string summary =
      "variant,n_replicates,type1_error,type2_error,mean_estimate,emp_se,variance_inflation\n";
  summary += opt.variant + ',' + std::to_string(cfg.n_replicates) + ',' +
             fmt(report.type1_error) + ',' + fmt(report.type2_error) + ',' +
             fmt(report.mean_estimate) + ',' + fmt(report.emp_se) + ',' +
             fmt(report.variance_inflation) + '\n';
  write_file(dir / "illustration.csv", summary);

  const auto dump_column = [](const std::vector<double>& values) {
    std::string out = "wald_statistic\n";
    for (const double v : values) out += fmt(v) + '\n';
    return out;
  };
  write_file(dir / "wald_null.csv", dump_column(report.wald_null));
  write_file(dir / "wald_alt.csv", dump_column(report.wald_alt));

  const std::string canonical = "command = illustrate\nvariant = " + opt.variant +
                                "\nn_per_arm = " + std::to_string(cfg.n_per_arm) +
                                "\nn_replicates = " + std::to_string(cfg.n_replicates) +
                                "\nalpha = " + fmt(cfg.alpha) +
                                "\nseed = " + std::to_string(cfg.seed) + "\n";
  write_manifest(dir, "illustrate", canonical, cfg.seed);

  std::printf("%s: type1=%.4f type2=%.4f mean=%.4f inflation=%.3f -> %s\n", opt.variant.c_str(),
              report.type1_error, report.type2_error, report.mean_estimate,
              report.variance_inflation, (dir / "illustration.csv").string().c_str());
  return 0;
}

// ---------- power ----------

struct PowerOptions {
  double effect = 0.0;
  std::optional<double> se;
  std::optional<double> sd;
  std::optional<std::uint64_t> n_per_arm;
  std::optional<std::uint64_t> n_total;
  double alpha = 0.05;
  std::optional<double> reliability;
  std::optional<double> target_type2;
  bool json = false;
};

int run_power(const PowerOptions& opt) {
  double se;
  long long n;
  if (opt.se) {
    if (!opt.n_total) throw mecor::ConfigInvalid("--se needs --n (total sample size) for df");
    se = *opt.se;
    n = static_cast<long long>(*opt.n_total);
  } else if (opt.sd && opt.n_per_arm) {
    if (!(*opt.sd > 0.0)) throw mecor::ConfigInvalid("--sd must be positive");
    n = 2 * static_cast<long long>(*opt.n_per_arm);
    se = *opt.sd * std::sqrt(2.0 / static_cast<double>(*opt.n_per_arm));
  } else {
    throw mecor::ConfigInvalid("power needs --se with --n, or --sd with --n-per-arm");
  }
  if (!(se > 0.0)) throw mecor::ConfigInvalid("standard error must be positive");
  if (n < 4) throw mecor::ConfigInvalid("total sample size must be at least 4");

  const double df = static_cast<double>(n - 2);
  const double type2 = mecor::power_type2(opt.effect, se, df, opt.alpha);

  std::optional<long long> inflated;
  std::optional<long long> solved;
  std::optional<double> solved_se;
  if (opt.reliability) {
    inflated = mecor::sample_size_inflation(n, *opt.reliability);
    const double target = opt.target_type2 ? *opt.target_type2 : type2;
    solved = mecor::solve_sample_size(opt.effect, se, n, *opt.reliability, opt.alpha, target);
    solved_se = se * std::sqrt(static_cast<double>(n) / static_cast<double>(*solved)) /
                std::sqrt(*opt.reliability);
  }

  if (opt.json) {
    nlohmann::json out;
    out["effect"] = opt.effect;
    out["se"] = se;
    out["n"] = n;
    out["df"] = df;
    out["alpha"] = opt.alpha;
    out["type2_error"] = type2;
    if (opt.reliability) {
      out["reliability"] = *opt.reliability;
      out["n_inflated"] = *inflated;
      out["n_solved"] = *solved;
      out["se_at_n_solved"] = *solved_se;
      out["target_type2"] = opt.target_type2 ? *opt.target_type2 : type2;
    }
    std::printf("%s\n", out.dump(2).c_str());
  } else {
    std::printf("effect %.10g, se %.10g, n %lld (df %g), alpha %.10g\n", opt.effect, se, n, df,
                opt.alpha);
    std::printf("type-II error: %.6f (power %.6f)\n", type2, 1.0 - type2);
    if (opt.reliability) {
      std::printf("reliability %.10g:\n", *opt.reliability);
      std::printf("  n inflated (N/R): %lld\n", *inflated);
      std::printf("  n solved (type-II <= %.6f): %lld (se %.6f)\n",
                  opt.target_type2 ? *opt.target_type2 : type2, *solved, *solved_se);
    }
  }
  return 0;
}

int map_exception_to_exit(const std::exception& e) {
  if (dynamic_cast<const mecor::ConfigInvalid*>(&e) != nullptr) return 2;
  if (dynamic_cast<const SchemaError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const mecor::Error*>(&e) != nullptr) return 3;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement error correction for continuous trial endpoints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CorrectOptions correct_opt;
  auto* correct = app.add_subcommand("correct", "correct a trial analysis for endpoint error");
  correct
      ->add_option("--trial", correct_opt.trial_file, "trial CSV with columns treatment,y_observed")
      ->required();
  correct
      ->add_option("--calibration", correct_opt.calibration_file,
                   "calibration CSV with columns y_true,y_observed[,treatment]")
      ->required();
  correct->add_option("--model", correct_opt.model, "error model: systematic | differential");
  correct->add_option("--ci", correct_opt.ci_list,
                      "comma list of zero-variance,delta,fieller,bootstrap");
  correct->add_option("--alpha", correct_opt.alpha, "two-sided alpha (default 0.05)");
  correct->add_option("--boot-reps", correct_opt.boot_reps, "bootstrap replicates (default 999)");
  correct->add_option("--seed", correct_opt.seed, "bootstrap seed (generated if omitted)");
  correct->add_option("--out", correct_opt.out_file, "report path (default report.csv)");

  SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo scenario from a config");
  simulate->add_option("--config", sim_opt.config_file, "key = value scenario config")->required();
  simulate->add_option("--replicates", sim_opt.replicates, "override n_replicates");
  simulate->add_option("--seed", sim_opt.seed, "override seed (required if absent from config)");
  simulate->add_option("--out-dir", sim_opt.out_dir, "output directory (default .)");
  simulate->add_flag("--emit-replicates", sim_opt.emit_replicates,
                     "also write per-replicate rows (replicates.csv)");
  simulate->add_option("--threads", sim_opt.threads,
                       "worker threads (default MECOR_THREADS or 1; results are identical for "
                       "any value)");

  IllustrateOptions ill_opt;
  auto* illustrate =
      app.add_subcommand("illustrate", "reproduce the example-trial error-impact runs");
  illustrate
      ->add_option("--variant", ill_opt.variant, "no-error | classical | systematic | differential")
      ->required();
  illustrate->add_option("--replicates", ill_opt.replicates, "simulation replicates");
  illustrate->add_option("--seed", ill_opt.seed, "seed (required)");
  illustrate->add_option("--out-dir", ill_opt.out_dir, "output directory (default .)");
  illustrate->add_option("--threads", ill_opt.threads, "worker threads");
  illustrate->add_option("--n-per-arm", ill_opt.n_per_arm, "subjects per arm (default 54)");
  illustrate->add_option("--alpha", ill_opt.alpha, "two-sided alpha (default 0.05)");

  PowerOptions pow_opt;
  auto* power = app.add_subcommand("power", "Type-II error and sample-size utilities");
  power->add_option("--effect", pow_opt.effect, "treatment effect")->required();
  power->add_option("--se", pow_opt.se, "standard error of the effect estimate");
  power->add_option("--n", pow_opt.n_total, "total sample size (df = n - 2)");
  power->add_option("--sd", pow_opt.sd, "endpoint SD (alternative to --se)");
  power->add_option("--n-per-arm", pow_opt.n_per_arm, "per-arm size (with --sd)");
  power->add_option("--alpha", pow_opt.alpha, "two-sided alpha (default 0.05)");
  power->add_option("--reliability", pow_opt.reliability,
                    "reliability coefficient R, enables N/R and the iterative N solve");
  power->add_option("--target-type2", pow_opt.target_type2,
                    "Type-II target for the N solve (default: the baseline value)");
  power->add_flag("--json", pow_opt.json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (correct->parsed()) return run_correct(correct_opt);
    if (simulate->parsed()) return run_simulate(sim_opt);
    if (illustrate->parsed()) return run_illustrate(ill_opt);
    if (power->parsed()) return run_power(pow_opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return map_exception_to_exit(e);
  }
  return 0;
}
