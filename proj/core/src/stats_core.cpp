#include "mecor/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mecor {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NonFiniteInput(std::string(what) + ": non-finite value");
  }
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 600;
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) break;
  }
  return h;
}

}  // namespace

RegressionFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("ols_fit: x and y lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw TooFewObservations("ols_fit: need at least 2 observations");
  require_finite(x, "ols_fit x");
  require_finite(y, "ols_fit y");

  double x_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x_mean += x[i];
    y_mean += y[i];
  }
  x_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - x_mean;
    sxx += dx * dx;
    sxy += dx * (y[i] - y_mean);
  }
  if (!(sxx > 0.0)) throw DegenerateRegressor("ols_fit: regressor has zero variance");

  RegressionFit fit;
  fit.n = n;
  fit.sxx = sxx;
  fit.x_mean = x_mean;
  fit.slope = sxy / sxx;
  fit.intercept = y_mean - fit.slope * x_mean;
  fit.residuals.resize(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.residuals[i] = r;
    rss += r * r;
  }
  fit.residual_variance = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  fit.slope_variance = fit.residual_variance / sxx;
  fit.intercept_variance =
      fit.residual_variance * (1.0 / static_cast<double>(n) + x_mean * x_mean / sxx);
  fit.slope_intercept_covariance = -fit.residual_variance * x_mean / sxx;
  return fit;
}

double hc_variance(const RegressionFit& fit, std::span<const double> x, HcFlavor flavor) {
  if (x.size() != fit.n || fit.residuals.size() != fit.n)
    throw LengthMismatch("hc_variance: fit was not produced from this regressor");
  if (!(fit.sxx > 0.0)) throw DegenerateRegressor("hc_variance: zero regressor variance");

  const double n_inv = 1.0 / static_cast<double>(fit.n);
  double num = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double d = x[i] - fit.x_mean;
    double w2 = fit.residuals[i] * fit.residuals[i];
    if (w2 == 0.0) continue;
    if (flavor == HcFlavor::HC3) {
      const double h = n_inv + d * d / fit.sxx;
      const double one_minus_h = 1.0 - h;
      w2 /= one_minus_h * one_minus_h;
    }
    num += d * d * w2;
  }
  return num / (fit.sxx * fit.sxx);
}

double normal_cdf(double z) {
  if (std::isnan(z)) throw NonFiniteInput("normal_cdf: NaN");
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Wichura (1988), algorithm AS 241 PPND16.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw OutOfDomain("normal_quantile: p must be in (0, 1)");

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0.0 ? -val : val;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw OutOfDomain("incomplete_beta: a, b must be positive");
  if (std::isnan(x)) throw NonFiniteInput("incomplete_beta: NaN argument");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_pdf(double t, double df) {
  if (!(df > 0.0)) throw OutOfDomain("t_pdf: df must be positive");
  const double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * M_PI) -
                    0.5 * (df + 1.0) * std::log1p(t * t / df);
  return std::exp(ln);
}

double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw OutOfDomain("t_cdf: df must be positive");
  if (std::isnan(t)) throw NonFiniteInput("t_cdf: NaN");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  if (t == 0.0) return 0.5;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double df) {
  if (!(df > 0.0)) throw OutOfDomain("t_quantile: df must be positive");
  if (!(p > 0.0 && p < 1.0)) throw OutOfDomain("t_quantile: p must be in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);

  // Hill's expansion around the normal quantile as the starting point.
  const double z = normal_quantile(p);
  const double z2 = z * z;
  double t0 = z;
  if (df >= 1.0) {
    const double g1 = (z2 + 1.0) * z / 4.0;
    const double g2 = ((5.0 * z2 + 16.0) * z2 + 3.0) * z / 96.0;
    const double g3 = (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) * z / 384.0;
    t0 = z + g1 / df + g2 / (df * df) + g3 / (df * df * df);
  }

  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * std::fabs(t0));
  while (t_cdf(hi, df) < p) hi *= 2.0;
  double t = std::clamp(t0, lo, hi);

  // Newton with a bisection safeguard; the density is positive so this
  // converges quadratically once close.
  for (int iter = 0; iter < 200; ++iter) {
    const double f = t_cdf(t, df) - p;
    if (f > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    if (std::fabs(f) <= 1e-13) break;
    const double dens = t_pdf(t, df);
    double next = dens > 0.0 ? t - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return t;
}

// Series of incomplete-beta terms with Poisson-type weights (Lenth 1989).
double noncentral_t_cdf(double t, const TDistSpec& spec) {
  const double df = spec.df;
  const double delta = spec.noncentrality;
  if (!(df > 0.0)) throw OutOfDomain("noncentral_t_cdf: df must be positive");
  if (!std::isfinite(delta)) throw NonFiniteInput("noncentral_t_cdf: non-finite noncentrality");
  if (std::isnan(t)) throw NonFiniteInput("noncentral_t_cdf: NaN");
  if (delta == 0.0) return t_cdf(t, df);
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  if (t < 0.0) return 1.0 - noncentral_t_cdf(-t, TDistSpec{df, -delta});

  const double lambda = 0.5 * delta * delta;
  if (lambda > 600.0) {
    // Series weights underflow; fall back to the Jennett-Welch normal
    // approximation, adequate in this extreme regime.
    const double num = t * (1.0 - 1.0 / (4.0 * df)) - delta;
    const double den = std::sqrt(1.0 + t * t / (2.0 * df));
    return normal_cdf(num / den);
  }

  double result = normal_cdf(-delta);
  if (t > 0.0) {
    const double x = t * t / (t * t + df);
    double pj = std::exp(-lambda);
    double qj = delta * std::exp(-lambda) * std::sqrt(2.0 / M_PI);
    double pcum = 0.0;
    double sum = 0.0;
    for (int j = 0; j < 5000; ++j) {
      const double jd = static_cast<double>(j);
      const double term = 0.5 * (pj * incomplete_beta(jd + 0.5, 0.5 * df, x) +
                                 qj * incomplete_beta(jd + 1.0, 0.5 * df, x));
      sum += term;
      pcum += pj;
      if (1.0 - pcum < 1e-14 && std::fabs(term) < 1e-15) break;
      pj *= lambda / (jd + 1.0);
      qj *= lambda / (jd + 1.5);
    }
    result += sum;
  }
  return std::clamp(result, 0.0, 1.0);
}

WaldResult wald_test(const RegressionFit& fit, double null_value, double variance, double df) {
  if (!(variance > 0.0)) throw ZeroVariance("wald_test: variance must be positive");
  if (!(df > 0.0)) throw OutOfDomain("wald_test: df must be positive");
  WaldResult res;
  res.statistic = (fit.slope - null_value) / std::sqrt(variance);
  res.p_value = 2.0 * t_cdf(-std::fabs(res.statistic), df);
  return res;
}

}  // namespace mecor
