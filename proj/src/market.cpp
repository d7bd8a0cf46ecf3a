#include "marketlab/market.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "marketlab/errors.hpp"

namespace marketlab::market {

namespace {

constexpr double kPsdTol = 1e-12;

// Determinant of the 3x3 correlation matrix with pairwise entries
// (rm, tr, tm) in variable order (r, m, t).
double corr_det(double rm, double tr, double tm) {
  return 1.0 + 2.0 * rm * tr * tm - rm * rm - tr * tr - tm * tm;
}

void check_corr_range(double rho, const char* name) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw InfeasibleSpecError(std::string(name) + " must lie in [-1,1], got " +
                              std::to_string(rho));
  }
}

// Packed lower Cholesky of the 3x3 correlation matrix; tiny negative pivots
// (PSD boundary, e.g. a pairwise correlation of exactly +-1) are clamped to
// zero, genuinely negative ones reject the spec.
std::array<double, 6> cholesky3(double rm, double tr, double tm, const char* what) {
  const double l11 = 1.0;
  const double l21 = rm;
  double d22 = 1.0 - l21 * l21;
  if (d22 < -kPsdTol) throw InfeasibleSpecError(std::string(what) + ": correlation matrix is not PSD");
  const double l22 = std::sqrt(std::fmax(d22, 0.0));
  const double l31 = tr;
  const double l32 = l22 > 0.0 ? (tm - l31 * l21) / l22 : 0.0;
  if (l22 == 0.0 && std::fabs(tm - l31 * l21) > 1e-9) {
    throw InfeasibleSpecError(std::string(what) + ": correlation matrix is not PSD");
  }
  double d33 = 1.0 - l31 * l31 - l32 * l32;
  if (d33 < -kPsdTol) throw InfeasibleSpecError(std::string(what) + ": correlation matrix is not PSD");
  const double l33 = std::sqrt(std::fmax(d33, 0.0));
  return {l11, l21, l22, l31, l32, l33};
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

// ----- matched-mode calibration ------------------------------------------
//
// The Pearson correlation of two non-normal marginals joined by a Gaussian
// copula is attenuated relative to the latent normal correlation, so matched
// mode solves est_pearson(rho_latent) = target by bisection on a fixed pilot
// sample (common random numbers make the estimate a smooth monotone function
// of rho_latent). Pilot draws use an internal constant seed: calibration is a
// property of the spec, not of the caller's --seed.

constexpr std::size_t kPilotCount = 100000;
constexpr std::uint64_t kPilotSeed = 0x5eedca11b8a7ed00ull;
constexpr double kCalibrationTol = 0.005;

// Quantile lookup q(w) = F^{-1}(Phi(w)) tabulated on an even grid in the
// normal-quantile domain; built with the exact Newton inverse, evaluated by
// linear interpolation (error far below the calibration tolerance).
struct QuantileTable {
  static constexpr int kNodes = 4097;
  static constexpr double kWMax = 8.5;
  std::array<double, kNodes> value{};

  template <typename Quantile>
  static QuantileTable build(Quantile&& q) {
    QuantileTable t;
    for (int i = 0; i < kNodes; ++i) {
      const double w = -kWMax + 2.0 * kWMax * i / (kNodes - 1);
      t.value[static_cast<std::size_t>(i)] = q(dist::clamp_open_unit(dist::normal_cdf(w)));
    }
    return t;
  }

  double operator()(double w) const {
    const double pos = (w + kWMax) / (2.0 * kWMax) * (kNodes - 1);
    if (pos <= 0.0) return value.front();
    if (pos >= kNodes - 1) return value.back();
    const int i = static_cast<int>(pos);
    const double frac = pos - i;
    return value[static_cast<std::size_t>(i)] * (1.0 - frac) +
           value[static_cast<std::size_t>(i + 1)] * frac;
  }
};

struct PilotDraws {
  std::vector<double> z1, z2;
};

const PilotDraws& pilot_draws() {
  static const PilotDraws draws = [] {
    PilotDraws d;
    d.z1.resize(kPilotCount);
    d.z2.resize(kPilotCount);
    rng::Stream s(kPilotSeed);
    for (std::size_t i = 0; i < kPilotCount; ++i) {
      d.z1[i] = dist::normal_quantile(s.uniform_at(2 * i));
      d.z2[i] = dist::normal_quantile(s.uniform_at(2 * i + 1));
    }
    return d;
  }();
  return draws;
}

// Calibration key: the marginal pair is identified by its defining
// parameters (Beta shapes or lognormal mu/sigma share the slot).
using CalKey = std::tuple<double, double, double, double, double>;

double calibrate_pair(const QuantileTable& qx, const QuantileTable& qy, double target,
                      const CalKey& key) {
  static std::map<CalKey, double> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  const PilotDraws& pd = pilot_draws();
  std::vector<double> x(kPilotCount), y(kPilotCount);
  for (std::size_t i = 0; i < kPilotCount; ++i) x[i] = qx(pd.z1[i]);

  auto estimate = [&](double rho) {
    const double s = std::sqrt(std::fmax(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < kPilotCount; ++i) y[i] = qy(rho * pd.z1[i] + s * pd.z2[i]);
    return pearson(x, y);
  };

  double lo = -0.999999, hi = 0.999999;
  if (target > estimate(hi) + kCalibrationTol || target < estimate(lo) - kCalibrationTol) {
    throw InfeasibleSpecError(
        "matched calibration: Pearson target " + std::to_string(target) +
        " is not attainable for this marginal pair under a Gaussian copula");
  }
  double rho = target;  // good starting midpoint: attenuation is mild
  for (int it = 0; it < 60; ++it) {
    const double est = estimate(rho);
    if (std::fabs(est - target) <= kCalibrationTol || hi - lo < 1e-7) break;
    if (est < target) {
      lo = rho;
    } else {
      hi = rho;
    }
    rho = 0.5 * (lo + hi);
  }

  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, rho);
  return rho;
}

}  // namespace

void MarketSpec::validate() const {
  if (mode == Mode::betting) {
    // Moment feasibility is delegated to the Beta family below.
    dist::BetaDist::from_moments(mean_r, var_r);
    dist::BetaDist::from_moments(mean_m, var_m);
    dist::BetaDist::from_moments(mean_t, var_t);
  } else {
    dist::LognormalDist::from_moments(mean_r, var_r);
    dist::LognormalDist::from_moments(mean_m, var_m);
    dist::LognormalDist::from_moments(mean_t, var_t);
  }
  check_corr_range(corr_rm, "corr_rm");
  check_corr_range(corr_tr, "corr_tr");
  check_corr_range(corr_tm, "corr_tm");
  if (corr_det(corr_rm, corr_tr, corr_tm) < -kPsdTol) {
    throw InfeasibleSpecError("correlation targets (corr_rm=" + std::to_string(corr_rm) +
                              ", corr_tr=" + std::to_string(corr_tr) +
                              ", corr_tm=" + std::to_string(corr_tm) +
                              ") do not form a PSD matrix");
  }
  if (!(margin >= 0.0)) {
    throw std::invalid_argument("margin must be nonnegative, got " + std::to_string(margin));
  }
  if (mode == Mode::betting && margin >= 1.0) {
    throw std::invalid_argument("betting margin must be < 1, got " + std::to_string(margin));
  }
}

TwoWayQuote apply_margin(double m, double margin) {
  if (!(m > 0.0 && m < 1.0)) {
    throw std::invalid_argument("apply_margin: m must lie in (0,1), got " + std::to_string(m));
  }
  if (!(margin >= 0.0)) {
    throw std::invalid_argument("apply_margin: margin must be nonnegative, got " +
                                std::to_string(margin));
  }
  TwoWayQuote q;
  q.prob_alpha = m + margin;
  q.prob_beta = (1.0 - m) + margin;
  if (q.prob_alpha >= 1.0 || q.prob_beta >= 1.0) {
    throw std::domain_error("apply_margin: margined probability reaches 1 (m=" +
                            std::to_string(m) + ", margin=" + std::to_string(margin) + ")");
  }
  q.odds_alpha = 1.0 / q.prob_alpha;
  q.odds_beta = 1.0 / q.prob_beta;
  return q;
}

std::vector<EstimateTriple> sample_uniform(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_uniform: n must be positive");
  rng::Stream s(seed);
  std::vector<EstimateTriple> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].r = s.uniform_at(3 * i);
    out[i].m = s.uniform_at(3 * i + 1);
    out[i].t = s.uniform_at(3 * i + 2);
  }
  return out;
}

CorrelatedSampler::CorrelatedSampler(const MarketSpec& spec) : spec_(spec) {
  spec_.validate();

  const bool betting = spec_.mode == Mode::betting;
  QuantileTable table_r, table_m, table_t;
  CalKey key_r, key_m, key_t;
  if (betting) {
    beta_r_ = dist::BetaDist::from_moments(spec_.mean_r, spec_.var_r);
    beta_m_ = dist::BetaDist::from_moments(spec_.mean_m, spec_.var_m);
    beta_t_ = dist::BetaDist::from_moments(spec_.mean_t, spec_.var_t);
  } else {
    logn_r_ = dist::LognormalDist::from_moments(spec_.mean_r, spec_.var_r);
    logn_m_ = dist::LognormalDist::from_moments(spec_.mean_m, spec_.var_m);
    logn_t_ = dist::LognormalDist::from_moments(spec_.mean_t, spec_.var_t);
  }

  if (spec_.calibration == CopulaCalibration::direct) {
    rho_rm_ = spec_.corr_rm;
    rho_tr_ = spec_.corr_tr;
    rho_tm_ = spec_.corr_tm;
  } else {
    if (betting) {
      table_r = QuantileTable::build([&](double u) { return beta_r_.quantile(u); });
      table_m = QuantileTable::build([&](double u) { return beta_m_.quantile(u); });
      table_t = QuantileTable::build([&](double u) { return beta_t_.quantile(u); });
      key_r = {0.0, beta_r_.a, beta_r_.b, 0.0, 0.0};
      key_m = {0.0, beta_m_.a, beta_m_.b, 0.0, 0.0};
      key_t = {0.0, beta_t_.a, beta_t_.b, 0.0, 0.0};
    } else {
      table_r = QuantileTable::build([&](double u) { return logn_r_.quantile(u); });
      table_m = QuantileTable::build([&](double u) { return logn_m_.quantile(u); });
      table_t = QuantileTable::build([&](double u) { return logn_t_.quantile(u); });
      key_r = {1.0, logn_r_.mu, logn_r_.sigma, 0.0, 0.0};
      key_m = {1.0, logn_m_.mu, logn_m_.sigma, 0.0, 0.0};
      key_t = {1.0, logn_t_.mu, logn_t_.sigma, 0.0, 0.0};
    }
    auto pair_key = [](const CalKey& a, const CalKey& b, double target) {
      return CalKey{std::get<0>(a) * 2.0 + std::get<0>(b), std::get<1>(a) * 1e3 + std::get<1>(b),
                    std::get<2>(a) * 1e3 + std::get<2>(b), target, 0.0};
    };
    // Degenerate targets (+-1, 0) pass through: the copula preserves them
    // exactly (comonotone / antimonotone / independent coupling).
    auto match = [&](const QuantileTable& qa, const QuantileTable& qb, const CalKey& ka,
                     const CalKey& kb, double target) {
      if (target == 0.0 || target == 1.0 || target == -1.0) return target;
      return calibrate_pair(qa, qb, target, pair_key(ka, kb, target));
    };
    rho_rm_ = match(table_r, table_m, key_r, key_m, spec_.corr_rm);
    rho_tr_ = match(table_t, table_r, key_t, key_r, spec_.corr_tr);
    rho_tm_ = match(table_t, table_m, key_t, key_m, spec_.corr_tm);
  }

  chol_ = cholesky3(rho_rm_, rho_tr_, rho_tm_,
                    spec_.calibration == CopulaCalibration::direct
                        ? "latent correlations"
                        : "matched latent correlations");
}

std::array<double, 3> CorrelatedSampler::latent_correlations() const noexcept {
  return {rho_rm_, rho_tr_, rho_tm_};
}

double CorrelatedSampler::quantile_r(double u) const {
  return spec_.mode == Mode::betting ? beta_r_.quantile(u) : logn_r_.quantile(u);
}
double CorrelatedSampler::quantile_m(double u) const {
  return spec_.mode == Mode::betting ? beta_m_.quantile(u) : logn_m_.quantile(u);
}
double CorrelatedSampler::quantile_t(double u) const {
  return spec_.mode == Mode::betting ? beta_t_.quantile(u) : logn_t_.quantile(u);
}

EstimateTriple CorrelatedSampler::sample_at(const rng::Stream& stream,
                                            std::uint64_t base_counter) const {
  const double xr = dist::normal_quantile(stream.uniform_at(base_counter));
  const double xm = dist::normal_quantile(stream.uniform_at(base_counter + 1));
  const double xt = dist::normal_quantile(stream.uniform_at(base_counter + 2));
  const double zr = chol_[0] * xr;
  const double zm = chol_[1] * xr + chol_[2] * xm;
  const double zt = chol_[3] * xr + chol_[4] * xm + chol_[5] * xt;
  EstimateTriple e;
  e.r = quantile_r(dist::clamp_open_unit(dist::normal_cdf(zr)));
  e.m = quantile_m(dist::clamp_open_unit(dist::normal_cdf(zm)));
  e.t = quantile_t(dist::clamp_open_unit(dist::normal_cdf(zt)));
  return e;
}

std::vector<EstimateTriple> CorrelatedSampler::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("CorrelatedSampler::sample: n must be positive");
  rng::Stream s(seed);
  std::vector<EstimateTriple> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sample_at(s, 3 * i);
  return out;
}

std::vector<EstimateTriple> sample_correlated(const MarketSpec& spec, std::size_t n,
                                              std::uint64_t seed) {
  return CorrelatedSampler(spec).sample(n, seed);
}

Side realize_outcome(double r, const rng::Stream& stream, std::uint64_t counter) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("realize_outcome: r must lie in [0,1], got " + std::to_string(r));
  }
  // Uniforms are strictly inside (0,1), so r = 1 is certain alpha and r = 0
  // certain beta.
  return alpha_realized(r, stream.uniform_at(counter)) ? Side::alpha : Side::beta;
}

}  // namespace marketlab::market
