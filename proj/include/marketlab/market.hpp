#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "marketlab/distributions.hpp"
#include "marketlab/rng.hpp"

namespace marketlab::market {

/// Two-way market: betting quotes outcome probabilities in (0,1), stock
/// quotes positive prices.
enum class Mode { betting, stock };

/// Side alpha is the quoted outcome / buy side; beta is the complement /
/// sell side.
enum class Side { alpha, beta };

/// How the Gaussian-copula latent correlations are chosen: `direct` uses the
/// spec targets as-is, `matched` calibrates each pair so the *observed*
/// Pearson correlation of the transformed marginals hits the target.
enum class CopulaCalibration { direct, matched };

/// One joint draw: true value r, market estimate m, trader estimate t.
struct EstimateTriple {
  double r = 0.0;
  double m = 0.0;
  double t = 0.0;
};

/// Joint distribution of (r, m, t): per-variable moments, pairwise Pearson
/// correlation targets, quoting margin, and the calibration mode.
struct MarketSpec {
  Mode mode = Mode::betting;
  double mean_r = 0.5;
  double mean_m = 0.5;
  double mean_t = 0.5;
  double var_r = 0.08;
  double var_m = 0.054;
  double var_t = 0.054;
  double corr_tm = 0.9;
  double corr_tr = 0.9;
  double corr_rm = 0.9;
  double margin = 0.0;
  CopulaCalibration calibration = CopulaCalibration::matched;

  /// Throws InfeasibleSpecError when the moments do not fit the marginal
  /// family or the correlation target matrix is not positive semidefinite;
  /// std::invalid_argument for out-of-range scalars (negative margin, ...).
  void validate() const;
};

/// Both sides of a margined two-way quote. With margin eps a betting market
/// quotes prob_alpha = m + eps and prob_beta = (1 - m) + eps; odds are the
/// reciprocals, so odds * prob == 1 on each side and the book's overround is
/// prob_alpha + prob_beta - 1 = 2 eps.
struct TwoWayQuote {
  double prob_alpha = 0.0;
  double prob_beta = 0.0;
  double odds_alpha = 0.0;
  double odds_beta = 0.0;
};

/// Margined quote for a betting market with fair probability m.
/// Throws std::invalid_argument for m outside (0,1) or margin < 0, and
/// std::domain_error when a margined probability would reach 1.
TwoWayQuote apply_margin(double m, double margin);

/// n i.i.d. triples uniform on the unit cube; draw order is (r, m, t) per
/// triple, counters 3i, 3i+1, 3i+2 of the stream keyed by seed.
std::vector<EstimateTriple> sample_uniform(std::size_t n, std::uint64_t seed);

/// Gaussian-copula sampler compiled from a MarketSpec: moment-matched
/// marginals (Beta for betting, lognormal for stock), latent normal
/// correlations (direct or matched), 3x3 Cholesky factor.
///
/// A triple consumes three stream words at counters c, c+1, c+2 (latent
/// shocks for r, m, t in that order), so any consumer can address triple i
/// at base counter 3i and reproduce the serial stream in parallel.
class CorrelatedSampler {
 public:
  explicit CorrelatedSampler(const MarketSpec& spec);

  const MarketSpec& spec() const noexcept { return spec_; }

  /// Latent pairwise correlations (rm, tr, tm) actually used after
  /// calibration.
  std::array<double, 3> latent_correlations() const noexcept;

  EstimateTriple sample_at(const rng::Stream& stream, std::uint64_t base_counter) const;

  std::vector<EstimateTriple> sample(std::size_t n, std::uint64_t seed) const;

 private:
  double quantile_r(double u) const;
  double quantile_m(double u) const;
  double quantile_t(double u) const;

  MarketSpec spec_;
  // Marginals; the unused family is left default-initialized.
  dist::BetaDist beta_r_, beta_m_, beta_t_;
  dist::LognormalDist logn_r_, logn_m_, logn_t_;
  // Latent correlations in variable order (r, m, t) and the packed lower
  // Cholesky factor [l11, l21, l22, l31, l32, l33].
  double rho_rm_ = 0.0, rho_tr_ = 0.0, rho_tm_ = 0.0;
  std::array<double, 6> chol_{};
};

/// Convenience wrapper: compile the spec and draw n triples.
std::vector<EstimateTriple> sample_correlated(const MarketSpec& spec, std::size_t n,
                                              std::uint64_t seed);

/// Bernoulli settlement of a betting market: alpha realizes iff u < r.
inline bool alpha_realized(double r, double u) noexcept { return u < r; }

/// Draw the outcome of a betting market with true probability r.
Side realize_outcome(double r, const rng::Stream& stream, std::uint64_t counter);

}  // namespace marketlab::market
