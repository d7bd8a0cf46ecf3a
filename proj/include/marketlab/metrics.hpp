#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "marketlab/market.hpp"

namespace marketlab::metrics {

/// Mean squared error between a truth vector and an estimate vector.
double mse(const std::vector<double>& truth, const std::vector<double>& estimate);

/// Binary cross-entropy -mean[y log p + (1-y) log(1-p)] (natural log).
/// Probabilities at the {0,1} boundary are clamped to 1e-12 / 1 - 1e-12 and
/// counted in `clamped` instead of producing infinities.
struct XentResult {
  double value = 0.0;
  std::size_t clamped = 0;
};
XentResult xent(const std::vector<int>& outcomes, const std::vector<double>& probs);

/// KL divergence sum p_i log(p_i / q_i) between two distributions over the
/// same support (each normalized within 1e-6). p_i = 0 terms vanish;
/// q_i = 0 with p_i > 0 is a domain error.
double kl(const std::vector<double>& p, const std::vector<double>& q);

/// Pearson correlation; throws std::domain_error when either input has zero
/// variance (undefined correlation).
double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Correlation between trader and market estimates after linearly removing
/// the true value from both (residuals of least-squares fits of T on R and
/// M on R). A constant R degrades gracefully to the plain correlation;
/// zero residual variance is a domain error.
double partial_corr_tm_given_r(const std::vector<market::EstimateTriple>& triples);

/// Fraction of bets where the threshold prediction (estimate > 1/2) matches
/// the realized outcome.
double accuracy(const std::vector<int>& outcomes, const std::vector<double>& probs);

/// Joint right/wrong census of trader and market threshold predictions,
/// as fractions of all bets:
///   consensus - both right;  upset  - both wrong;
///   missed    - trader wrong, market right;
///   spotted   - trader right, market wrong.
struct Breakdown {
  double consensus = 0.0;
  double upset = 0.0;
  double missed = 0.0;
  double spotted = 0.0;
};
Breakdown breakdown(const std::vector<int>& outcomes, const std::vector<double>& trader,
                    const std::vector<double>& market_est);

/// Reliability curve over `bins` equal-width probability bins. Empty bins
/// keep count 0 and NaN statistics.
struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_prob = 0.0;
  double emp_freq = 0.0;
  std::size_t count = 0;
};
std::vector<CalibrationBin> calibration_curve(const std::vector<int>& outcomes,
                                              const std::vector<double>& probs, int bins = 10);

/// One-stop quality report for a trader estimate against sampled truth.
/// cond_variance is the variance of T unexplained by a linear fit on R, so
/// for constant truth mse == bias^2 + cond_variance exactly.
struct EstimatorReport {
  double mse = 0.0;
  double xent = 0.0;
  double bias = 0.0;
  double cond_variance = 0.0;
  double pearson_tm = 0.0;
  double partial_corr_tm_given_r = 0.0;
  double accuracy = 0.0;
  std::size_t clamped = 0;
};
EstimatorReport estimator_report(const std::vector<market::EstimateTriple>& triples,
                                 const std::vector<int>& outcomes);

}  // namespace marketlab::metrics
