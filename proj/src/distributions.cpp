#include "marketlab/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "marketlab/errors.hpp"

namespace marketlab::dist {

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z * M_SQRT1_2); }

namespace {

// AS241 PPND16 rational approximations (Wichura 1988).
double ppnd16(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num = q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                                 6.7265770927008700853e+4) *
                                    r +
                                4.5921953931549871457e+4) *
                                   r +
                               1.3731693765509461125e+4) *
                                  r +
                              1.9715909503065514427e+3) *
                                 r +
                             1.3314166789178437745e+2) *
                                r +
                            3.3871328727963666080e+0);
    const double den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                             3.9307895800092710610e+4) *
                                r +
                            2.1213794301586595867e+4) *
                               r +
                           5.3941960214247511077e+3) *
                              r +
                          6.8718700749205790830e+2) *
                             r +
                         4.2313330701600911252e+1) *
                            r +
                        1.0);
    return num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                             2.41780725177450611770e-1) *
                                r +
                            1.27045825245236838258e+0) *
                               r +
                           3.64784832476320460504e+0) *
                              r +
                          5.76949722146069140550e+0) *
                             r +
                         4.63033784615654529590e+0) *
                            r +
                        1.42343711074968357734e+0);
    const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                             1.51986665636164571966e-2) *
                                r +
                            1.48103976427480074590e-1) *
                               r +
                           6.89767334985100004550e-1) *
                              r +
                          1.67638483018380384940e+0) *
                             r +
                         2.05319162663775882187e+0) *
                            r +
                        1.0);
    x = num / den;
  } else {
    r -= 5.0;
    const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                             1.24266094738807843860e-3) *
                                r +
                            2.65321895265761230930e-2) *
                               r +
                           2.96560571828504891230e-1) *
                              r +
                          1.78482653991729133580e+0) *
                             r +
                         5.46378491116411436990e+0) *
                            r +
                        6.65790464350110377720e+0);
    const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                             1.84631831751005468180e-5) *
                                r +
                            7.86869131145613259100e-4) *
                               r +
                           1.48753612908506148525e-2) *
                              r +
                          1.36929880922735805310e-1) *
                             r +
                         5.99832206555887937690e-1) *
                            r +
                        1.0);
    x = num / den;
  }
  return q < 0.0 ? -x : x;
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
double inc_beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return h;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie strictly in (0,1), got " +
                            std::to_string(p));
  }
  return ppnd16(p);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reg_inc_beta: shape parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * inc_beta_cf(a, b, x) / a;
  }
  return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

BetaDist BetaDist::from_moments(double mean, double var) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw InfeasibleSpecError("beta marginal: mean must lie in (0,1), got " + std::to_string(mean));
  }
  const double bound = mean * (1.0 - mean);
  if (!(var > 0.0 && var < bound)) {
    throw InfeasibleSpecError("beta marginal: variance must lie in (0, mean(1-mean)) = (0, " +
                              std::to_string(bound) + "), got " + std::to_string(var));
  }
  const double nu = bound / var - 1.0;
  return BetaDist{mean * nu, (1.0 - mean) * nu};
}

double BetaDist::variance() const noexcept {
  const double s = a + b;
  return a * b / (s * s * (s + 1.0));
}

double BetaDist::pdf(double x) const {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b));
}

double BetaDist::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("beta quantile: u must lie strictly in (0,1)");
  }
  // Abramowitz & Stegun 26.5.22 initial guess (good for a, b >= 1), mean
  // otherwise; safeguarded Newton keeps the iterate inside a shrinking
  // bracket so convergence is guaranteed.
  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double y = ppnd16(u);
    const double lam = (y * y - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = y * std::sqrt(lam + h) / h -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) *
                         (lam + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    x = a / (a + b);
  }
  constexpr double kFloor = 1e-15;
  x = std::fmin(std::fmax(x, kFloor), 1.0 - kFloor);

  double lo = 0.0;
  double hi = 1.0;
  const double lnB = log_beta(a, b);
  for (int it = 0; it < 100; ++it) {
    const double err = reg_inc_beta(a, b, x) - u;
    if (err > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    if (std::fabs(err) <= 1e-10 * std::fmax(u, 1.0 - u)) break;
    const double pdf_x =
        std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lnB);
    double next = x - err / std::fmax(pdf_x, 1e-300);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-15 * std::fmax(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return std::fmin(std::fmax(x, kFloor), 1.0 - kFloor);
}

LognormalDist LognormalDist::from_moments(double mean, double var) {
  if (!(mean > 0.0)) {
    throw InfeasibleSpecError("lognormal marginal: mean must be positive, got " +
                              std::to_string(mean));
  }
  if (!(var > 0.0)) {
    throw InfeasibleSpecError("lognormal marginal: variance must be positive, got " +
                              std::to_string(var));
  }
  const double s2 = std::log1p(var / (mean * mean));
  return LognormalDist{std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

double LognormalDist::mean() const noexcept { return std::exp(mu + 0.5 * sigma * sigma); }

double LognormalDist::variance() const noexcept {
  const double s2 = sigma * sigma;
  return (std::exp(s2) - 1.0) * std::exp(2.0 * mu + s2);
}

double LognormalDist::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("lognormal quantile: u must lie strictly in (0,1)");
  }
  return std::exp(mu + sigma * ppnd16(u));
}

}  // namespace marketlab::dist
