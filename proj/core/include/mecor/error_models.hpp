#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "mecor/errors.hpp"
#include "mecor/rng.hpp"

namespace mecor {

/// Two-arm trial data: binary treatment plus a continuous endpoint that may
/// carry measurement error. Construction validates eagerly: length >= 4,
/// both arms present, all values finite, treatment coded 0/1.
class TrialDataset {
 public:
  TrialDataset(std::vector<int> treatment, std::vector<double> endpoint);

  std::span<const int> treatment() const noexcept { return treatment_; }
  std::span<const double> endpoint() const noexcept { return endpoint_; }
  std::size_t size() const noexcept { return endpoint_.size(); }
  std::array<std::size_t, 2> arm_counts() const noexcept { return arm_counts_; }

 private:
  std::vector<int> treatment_;
  std::vector<double> endpoint_;
  std::array<std::size_t, 2> arm_counts_{};
};

/// Generating model for the true endpoint: Y = alpha_y + beta_y * X + eps,
/// eps iid Normal(0, sigma^2), with n_per_arm subjects in each arm.
struct TrialGenerator {
  double alpha_y = 120.0;
  double beta_y = 6.9;
  double sigma = 12.6;
  std::size_t n_per_arm = 200;
};

// ---------- contamination structures ----------

struct ClassicalError {
  double tau = 0.0;  // Y* = Y + e, e ~ N(0, tau^2)
};

struct HeteroscedasticError {
  double tau0 = 0.0;  // arm-specific classical error SDs
  double tau1 = 0.0;
};

struct SystematicError {
  double theta0 = 0.0;  // Y* = theta0 + theta1 * Y + e
  double theta1 = 1.0;
  double tau = 0.0;
};

struct DifferentialError {
  double theta00 = 0.0;  // arm-0 intercept/slope, arm-1 intercept/slope
  double theta01 = 0.0;
  double theta10 = 1.0;
  double theta11 = 1.0;
  double tau0 = 0.0;
  double tau1 = 0.0;
};

/// Error depending on a prognostic factor S in {0,1}: the true endpoint
/// gains gamma_y * S and the observed one additionally zeta * S plus
/// classical noise. `prevalence` is the share of subjects with S = 1.
struct PrognosticFactorError {
  double zeta = 0.0;
  double gamma_y = 0.0;
  double prevalence = 0.25;
  double tau = 0.0;
};

using ErrorModelSpec = std::variant<ClassicalError, HeteroscedasticError, SystematicError,
                                    DifferentialError, PrognosticFactorError>;

/// True endpoints per the trial model; arm 0 first, then arm 1.
TrialDataset generate_true(const TrialGenerator& gen, RngStream& rng);

/// True endpoints with a prognostic-factor term: Y = a + b X + gamma_y S + eps.
TrialDataset generate_true_with_factor(const TrialGenerator& gen, double gamma_y,
                                       std::span<const int> factor, RngStream& rng);

/// Assigns the prognostic factor: exactly round(n * prevalence) subjects get
/// S = 1, positions shuffled, so the sample prevalence is fixed while the
/// split across arms varies.
std::vector<int> assign_prognostic_factor(std::size_t n, double prevalence, RngStream& rng);

/// Applies the contamination structure to true endpoints. The prognostic
/// variant requires the per-subject factor vector.
std::vector<double> contaminate(std::span<const double> y_true, std::span<const int> treatment,
                                const ErrorModelSpec& spec, RngStream& rng,
                                std::span<const int> factor = {});

/// Error SD that makes the coefficient of determination between observed
/// and true endpoint equal r2: tau = |theta1| * sigma * sqrt((1-r2)/r2).
double tau_from_r2(double r2, double theta1, double sigma);

}  // namespace mecor
