// Test-only oracles, independent of the library implementation paths they
// check: brute-force least squares by grid refinement, t CDF by adaptive
// quadrature of the density, and Monte Carlo noncentral-t probabilities.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace oracles {

inline double sse(std::span<const double> x, std::span<const double> y, double a, double b) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - a - b * x[i];
    s += r * r;
  }
  return s;
}

/// Minimizes sum (y - a - b x)^2 by grid refinement. The search runs in the
/// centered parameterization (mu, b) with a = mu - b * mean(x), whose SSE
/// axes are orthogonal, so shrinking grids cannot lose the valley; the final
/// step is below 1e-8.
inline std::pair<double, double> grid_least_squares(std::span<const double> x,
                                                    std::span<const double> y) {
  double x_mean = 0.0;
  for (const double v : x) x_mean += v;
  x_mean /= static_cast<double>(x.size());

  double scale = 1.0;
  for (const double v : y) scale = std::max(scale, std::fabs(v));
  for (const double v : x) scale = std::max(scale, std::fabs(v));
  const auto value = [&](double mu, double b) { return sse(x, y, mu - b * x_mean, b); };

  double mu_center = 0.0;
  double b_center = 0.0;
  double half = 8.0 * scale;
  constexpr int kPoints = 24;
  for (int round = 0; round < 28; ++round) {
    double best_mu = mu_center;
    double best_b = b_center;
    double best = value(mu_center, b_center);
    const double step = half / kPoints;
    for (int i = -kPoints; i <= kPoints; ++i) {
      for (int j = -kPoints; j <= kPoints; ++j) {
        const double mu = mu_center + i * step;
        const double b = b_center + j * step;
        const double v = value(mu, b);
        if (v < best) {
          best = v;
          best_mu = mu;
          best_b = b;
        }
      }
    }
    mu_center = best_mu;
    b_center = best_b;
    half = 2.5 * step;
    if (step < 1e-9) break;
  }
  return {mu_center - b_center * x_mean, b_center};
}

inline double t_density(double t, double df) {
  const double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * M_PI) -
                    0.5 * (df + 1.0) * std::log1p(t * t / df);
  return std::exp(ln);
}

inline double simpson(double lo, double hi, double df) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 *
         (t_density(lo, df) + 4.0 * t_density(mid, df) + t_density(hi, df));
}

inline double adaptive_simpson(double lo, double hi, double df, double whole, double tol,
                               int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = simpson(lo, mid, df);
  const double right = simpson(mid, hi, df);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(lo, mid, df, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(mid, hi, df, right, 0.5 * tol, depth - 1);
}

/// Central-t CDF by numeric integration of the density (tolerance ~1e-10).
inline double t_cdf_quadrature(double t, double df) {
  if (t == 0.0) return 0.5;
  const double hi = std::fabs(t);
  const double integral = adaptive_simpson(0.0, hi, df, simpson(0.0, hi, df), 1e-12, 40);
  return t > 0.0 ? 0.5 + integral : 0.5 - integral;
}

/// Quantile by bisection on the quadrature CDF.
inline double t_quantile_quadrature(double p, double df) {
  double lo = -1e3;
  double hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf_quadrature(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Monte Carlo estimate of P(t_lo < T <= t_hi) for noncentral T, using the
/// standard-library generators (an implementation route disjoint from the
/// incomplete-beta series under test).
inline double mc_noncentral_t_interval(double df, double delta, double t_lo, double t_hi,
                                       std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> chi2(0.5 * df, 2.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double t = (normal(rng) + delta) / std::sqrt(chi2(rng) / df);
    if (t > t_lo && t <= t_hi) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

/// White estimator assembled directly from arm means and residuals, written
/// against a two-arm design from first principles.
inline double white_hc0_two_arm(std::span<const double> x, std::span<const double> y) {
  double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      ++n0;
      s0 += y[i];
    } else {
      ++n1;
      s1 += y[i];
    }
  }
  const double m0 = s0 / n0;
  const double m1 = s1 / n1;
  const double n = n0 + n1;
  const double x_mean = n1 / n;
  double num = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_mean;
    const double resid = y[i] - (x[i] == 0.0 ? m0 : m1);
    num += d * d * resid * resid;
    sxx += d * d;
  }
  return num / (sxx * sxx);
}

}  // namespace oracles
