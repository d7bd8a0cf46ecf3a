#pragma once

#include <cstddef>

namespace marketlab::dist {

/// Standard normal CDF.
double normal_cdf(double z) noexcept;

/// Clamps u into the open unit interval (one ulp away from 1, 2^-54 above
/// 0) so continuous CDF values can feed quantile functions that reject the
/// endpoints; |z| >~ 8.3 already rounds normal_cdf(z) to exactly 1.
inline double clamp_open_unit(double u) noexcept {
  constexpr double lo = 0x1.0p-54;
  constexpr double hi = 1.0 - 0x1.0p-53;
  return u < lo ? lo : (u > hi ? hi : u);
}

/// Standard normal quantile (inverse CDF), Wichura's AS241 PPND16.
/// Accurate to ~1e-16 relative over (0, 1); p must lie strictly inside.
double normal_quantile(double p);

/// log of the Beta function B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz). a, b > 0; x clamped to [0, 1].
double reg_inc_beta(double a, double b, double x);

/// Beta distribution with shape parameters (a, b).
struct BetaDist {
  double a = 1.0;
  double b = 1.0;

  /// Moment-matched shapes for a given mean in (0,1) and variance in
  /// (0, mean(1-mean)). Throws InfeasibleSpecError otherwise.
  static BetaDist from_moments(double mean, double var);

  double mean() const noexcept { return a / (a + b); }
  double variance() const noexcept;
  double pdf(double x) const;
  double cdf(double x) const { return reg_inc_beta(a, b, x); }

  /// Inverse CDF by safeguarded Newton on I_x(a,b) = u; CDF residual
  /// tolerance 1e-10, at most 100 iterations, bisection fallback keeps the
  /// iterate bracketed. u must lie strictly inside (0, 1).
  double quantile(double u) const;
};

/// Lognormal distribution parameterized by the underlying normal (mu, sigma).
struct LognormalDist {
  double mu = 0.0;
  double sigma = 1.0;

  /// Moment-matched parameters for a given mean > 0 and variance > 0.
  static LognormalDist from_moments(double mean, double var);

  double mean() const noexcept;
  double variance() const noexcept;
  double quantile(double u) const;
};

}  // namespace marketlab::dist
