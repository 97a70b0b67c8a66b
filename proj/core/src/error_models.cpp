#include "mecor/error_models.hpp"

#include <cmath>
#include <utility>

namespace mecor {

TrialDataset::TrialDataset(std::vector<int> treatment, std::vector<double> endpoint)
    : treatment_(std::move(treatment)), endpoint_(std::move(endpoint)) {
  if (treatment_.size() != endpoint_.size())
    throw LengthMismatch("trial dataset: treatment and endpoint lengths differ");
  if (endpoint_.size() < 4) throw TooFewObservations("trial dataset: need at least 4 rows");
  for (std::size_t i = 0; i < endpoint_.size(); ++i) {
    if (treatment_[i] != 0 && treatment_[i] != 1)
      throw OutOfDomain("trial dataset: treatment must be 0 or 1");
    if (!std::isfinite(endpoint_[i]))
      throw NonFiniteInput("trial dataset: non-finite endpoint");
    ++arm_counts_[static_cast<std::size_t>(treatment_[i])];
  }
  if (arm_counts_[0] == 0 || arm_counts_[1] == 0)
    throw DegenerateRegressor("trial dataset: both arms must be non-empty");
}

TrialDataset generate_true(const TrialGenerator& gen, RngStream& rng) {
  if (gen.n_per_arm < 2) throw ConfigInvalid("generator: need at least 2 per arm");
  if (!(gen.sigma >= 0.0)) throw ConfigInvalid("generator: sigma must be non-negative");
  const std::size_t n = 2 * gen.n_per_arm;
  std::vector<int> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int arm = i < gen.n_per_arm ? 0 : 1;
    x[i] = arm;
    y[i] = gen.alpha_y + gen.beta_y * arm + rng.next_normal(0.0, gen.sigma);
  }
  return TrialDataset(std::move(x), std::move(y));
}

TrialDataset generate_true_with_factor(const TrialGenerator& gen, double gamma_y,
                                       std::span<const int> factor, RngStream& rng) {
  if (gen.n_per_arm < 2) throw ConfigInvalid("generator: need at least 2 per arm");
  const std::size_t n = 2 * gen.n_per_arm;
  if (factor.size() != n) throw LengthMismatch("generator: factor length must equal 2*n_per_arm");
  std::vector<int> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int arm = i < gen.n_per_arm ? 0 : 1;
    x[i] = arm;
    y[i] = gen.alpha_y + gen.beta_y * arm + gamma_y * factor[i] +
           rng.next_normal(0.0, gen.sigma);
  }
  return TrialDataset(std::move(x), std::move(y));
}

std::vector<int> assign_prognostic_factor(std::size_t n, double prevalence, RngStream& rng) {
  if (!(prevalence >= 0.0 && prevalence <= 1.0))
    throw OutOfDomain("prognostic factor: prevalence must be in [0, 1]");
  const auto ones = static_cast<std::size_t>(
      std::llround(prevalence * static_cast<double>(n)));
  std::vector<int> s(n, 0);
  for (std::size_t i = 0; i < ones && i < n; ++i) s[i] = 1;
  // Fisher-Yates with the stream's bounded draws.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.next_index(i);
    std::swap(s[i - 1], s[j]);
  }
  return s;
}

std::vector<double> contaminate(std::span<const double> y_true, std::span<const int> treatment,
                                const ErrorModelSpec& spec, RngStream& rng,
                                std::span<const int> factor) {
  const std::size_t n = y_true.size();
  if (treatment.size() != n)
    throw LengthMismatch("contaminate: treatment and endpoint lengths differ");

  std::vector<double> out(n);
  std::visit(
      [&](const auto& model) {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, ClassicalError>) {
          for (std::size_t i = 0; i < n; ++i)
            out[i] = y_true[i] + rng.next_normal(0.0, model.tau);
        } else if constexpr (std::is_same_v<M, HeteroscedasticError>) {
          for (std::size_t i = 0; i < n; ++i) {
            const double tau = treatment[i] == 0 ? model.tau0 : model.tau1;
            out[i] = y_true[i] + rng.next_normal(0.0, tau);
          }
        } else if constexpr (std::is_same_v<M, SystematicError>) {
          for (std::size_t i = 0; i < n; ++i)
            out[i] = model.theta0 + model.theta1 * y_true[i] + rng.next_normal(0.0, model.tau);
        } else if constexpr (std::is_same_v<M, DifferentialError>) {
          for (std::size_t i = 0; i < n; ++i) {
            const bool active = treatment[i] == 1;
            const double theta0 = active ? model.theta01 : model.theta00;
            const double theta1 = active ? model.theta11 : model.theta10;
            const double tau = active ? model.tau1 : model.tau0;
            out[i] = theta0 + theta1 * y_true[i] + rng.next_normal(0.0, tau);
          }
        } else if constexpr (std::is_same_v<M, PrognosticFactorError>) {
          if (factor.size() != n)
            throw LengthMismatch("contaminate: prognostic model needs a factor per subject");
          for (std::size_t i = 0; i < n; ++i)
            out[i] = y_true[i] + model.zeta * factor[i] + rng.next_normal(0.0, model.tau);
        }
      },
      spec);
  return out;
}

double tau_from_r2(double r2, double theta1, double sigma) {
  if (!(r2 > 0.0 && r2 <= 1.0)) throw OutOfDomain("tau_from_r2: r2 must be in (0, 1]");
  if (!(sigma >= 0.0)) throw OutOfDomain("tau_from_r2: sigma must be non-negative");
  return std::fabs(theta1) * sigma * std::sqrt((1.0 - r2) / r2);
}

}  // namespace mecor
