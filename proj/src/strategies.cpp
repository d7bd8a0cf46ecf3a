#include "marketlab/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "marketlab/errors.hpp"
#include "marketlab/metrics.hpp"

namespace marketlab::strategies {

namespace {

constexpr double kNormTol = 1e-9;

void check_prob_vector(const std::vector<double>& p, const char* name, bool require_norm) {
  if (p.empty()) throw std::invalid_argument(std::string(name) + " must be nonempty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) {
      throw std::domain_error(std::string(name) + " entries must lie in (0,1), got " +
                              std::to_string(v));
    }
    sum += v;
  }
  if (require_norm && std::fabs(sum - 1.0) > kNormTol) {
    throw std::domain_error(std::string(name) + " must sum to 1 (got " + std::to_string(sum) +
                            ")");
  }
}

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  int support = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    css += u[k];
    const double cand = (css - 1.0) / static_cast<double>(k + 1);
    if (u[k] - cand > 0.0) {
      theta = cand;
      support = static_cast<int>(k + 1);
    }
  }
  (void)support;
  for (double& x : v) x = std::fmax(0.0, x - theta);
  return v;
}

// Stationarity residual on the simplex for a maximization problem: on an
// optimal face every supported coordinate shares the maximal gradient.
double kkt_residual(const std::vector<double>& grad, const std::vector<double>& f) {
  double lambda = -HUGE_VAL;
  for (double g : grad) lambda = std::fmax(lambda, g);
  double res = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > 1e-12) res = std::fmax(res, lambda - grad[i]);
  }
  return res;
}

}  // namespace

double Allocation::total_staked() const noexcept {
  return std::accumulate(fractions.begin(), fractions.end(), 0.0);
}

void StrategyConfig::validate() const {
  if (!(unit_stake >= 0.0)) {
    throw std::invalid_argument("unit_stake must be nonnegative, got " +
                                std::to_string(unit_stake));
  }
  if (kind == StrategyKind::unif && unit_stake > 1.0) {
    throw BudgetError("unit_stake " + std::to_string(unit_stake) + " exceeds the unit budget");
  }
  if (!(risk_weight >= 0.0)) {
    throw std::invalid_argument("risk_weight must be nonnegative, got " +
                                std::to_string(risk_weight));
  }
  if (!(kelly_fraction > 0.0 && kelly_fraction <= 1.0)) {
    throw std::domain_error("kelly_fraction must lie in (0,1], got " +
                            std::to_string(kelly_fraction));
  }
}

std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::unif: return "unif";
    case StrategyKind::kelly: return "kelly";
    case StrategyKind::fractional_kelly: return "fractional_kelly";
    case StrategyKind::mpt: return "mpt";
    case StrategyKind::sharpe: return "sharpe";
  }
  return "sharpe";
}

StrategyKind strategy_kind_from(const std::string& name) {
  if (name == "unif") return StrategyKind::unif;
  if (name == "kelly") return StrategyKind::kelly;
  if (name == "fractional_kelly") return StrategyKind::fractional_kelly;
  if (name == "mpt") return StrategyKind::mpt;
  if (name == "sharpe") return StrategyKind::sharpe;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

Allocation allocate_unif(const std::vector<double>& estimated_rois, double d) {
  if (!(d > 0.0)) {
    throw std::invalid_argument("unif stake must be positive, got " + std::to_string(d));
  }
  Allocation a;
  a.fractions.assign(estimated_rois.size(), 0.0);
  std::size_t selected = 0;
  for (std::size_t i = 0; i < estimated_rois.size(); ++i) {
    if (estimated_rois[i] > 0.0) {
      a.fractions[i] = d;
      ++selected;
    }
  }
  const double staked = d * static_cast<double>(selected);
  if (staked > 1.0 + 1e-12) {
    throw BudgetError("unif: stake " + std::to_string(d) + " on " + std::to_string(selected) +
                      " bets exceeds the unit budget");
  }
  a.cash = std::fmax(0.0, 1.0 - staked);
  return a;
}

Allocation allocate_kelly(const std::vector<double>& beliefs) {
  check_prob_vector(beliefs, "beliefs", /*require_norm=*/true);
  Allocation a;
  a.fractions = beliefs;
  a.cash = 0.0;
  return a;
}

Allocation allocate_fractional_kelly(const std::vector<double>& beliefs, double fraction) {
  check_prob_vector(beliefs, "beliefs", /*require_norm=*/true);
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::domain_error("kelly fraction must lie in (0,1], got " + std::to_string(fraction));
  }
  Allocation a;
  a.fractions.resize(beliefs.size());
  for (std::size_t i = 0; i < beliefs.size(); ++i) a.fractions[i] = fraction * beliefs[i];
  a.cash = 1.0 - fraction;
  return a;
}

double kelly_growth(const std::vector<double>& r, const Allocation& alloc,
                    const std::vector<double>& m, LogBase base) {
  if (r.size() != m.size() || r.size() != alloc.fractions.size() || r.empty()) {
    throw std::invalid_argument("kelly_growth: r, m and the allocation must share a size");
  }
  double rsum = 0.0;
  for (double v : r) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::domain_error("kelly_growth: probabilities must lie in [0,1]");
    }
    rsum += v;
  }
  if (std::fabs(rsum - 1.0) > kNormTol) {
    throw std::domain_error("kelly_growth: r must sum to 1 (got " + std::to_string(rsum) + ")");
  }
  if (!(alloc.cash >= 0.0)) {
    throw std::domain_error("kelly_growth: cash must be nonnegative");
  }
  double g = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(m[i] > 0.0 && m[i] < 1.0)) {
      throw std::domain_error("kelly_growth: prices must lie in (0,1)");
    }
    if (alloc.fractions[i] < 0.0) {
      throw std::domain_error("kelly_growth: stakes must be nonnegative");
    }
    if (r[i] == 0.0) continue;
    const double wealth = alloc.cash + alloc.fractions[i] / m[i];
    if (!(wealth > 0.0)) {
      throw std::domain_error(
          "kelly_growth: ruin (zero wealth on outcome " + std::to_string(i) +
          " which has positive probability)");
    }
    g += r[i] * std::log(wealth);
  }
  return base == LogBase::natural ? g : g / std::log(10.0);
}

GrowthIdentity kl_growth_identity(const std::vector<double>& r, const std::vector<double>& t,
                                  const std::vector<double>& m) {
  Allocation full;
  full.fractions = t;
  full.cash = 0.0;
  GrowthIdentity out;
  out.growth = kelly_growth(r, full, m, LogBase::natural);
  out.kl_rm = metrics::kl(r, m);
  out.kl_rt = metrics::kl(r, t);
  return out;
}

Allocation allocate_sharpe(const std::vector<double>& mu, const std::vector<double>& var) {
  if (mu.empty() || mu.size() != var.size()) {
    throw std::invalid_argument("allocate_sharpe: mu and var must be nonempty and equal-sized");
  }
  Allocation a;
  a.fractions.assign(mu.size(), 0.0);
  double norm = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    if (!(var[i] > 0.0)) {
      throw std::domain_error("allocate_sharpe: positive-edge opportunity " + std::to_string(i) +
                              " needs positive variance");
    }
    a.fractions[i] = mu[i] / var[i];
    norm += a.fractions[i];
  }
  if (norm == 0.0) {
    throw NoPositiveEdgeError("allocate_sharpe: no opportunity has positive expected profit");
  }
  for (double& f : a.fractions) f /= norm;
  a.cash = 0.0;
  return a;
}

double sharpe_objective(const std::vector<double>& mu, const std::vector<double>& var,
                        const std::vector<double>& f) {
  if (mu.size() != var.size() || mu.size() != f.size() || mu.empty()) {
    throw std::invalid_argument("sharpe_objective: size mismatch");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    num += mu[i] * f[i];
    den += var[i] * f[i] * f[i];
  }
  if (!(den > 0.0)) throw std::domain_error("sharpe_objective: zero portfolio variance");
  return num / std::sqrt(den);
}

double mpt_objective(const std::vector<double>& mu, const std::vector<double>& cov, double gamma,
                     const std::vector<double>& f) {
  const std::size_t n = mu.size();
  if (f.size() != n || cov.size() != n * n || n == 0) {
    throw std::invalid_argument("mpt_objective: size mismatch");
  }
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += mu[i] * f[i];
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += cov[i * n + j] * f[j];
    quad += f[i] * row;
  }
  return lin - gamma * quad;
}

Allocation allocate_mpt(const std::vector<double>& mu, const std::vector<double>& cov,
                        double gamma) {
  const std::size_t n = mu.size();
  if (n == 0 || cov.size() != n * n) {
    throw std::invalid_argument("allocate_mpt: need n means and an n x n covariance");
  }
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("allocate_mpt: gamma must be nonnegative");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::fabs(cov[i * n + j] - cov[j * n + i]) > 1e-9 * std::fmax(1.0, scale)) {
        throw std::domain_error("allocate_mpt: covariance must be symmetric");
      }
    }
    if (cov[i * n + i] < -1e-12) {
      throw std::domain_error("allocate_mpt: covariance must be PSD (negative diagonal)");
    }
    scale = std::fmax(scale, std::fabs(cov[i * n + i]));
  }

  Allocation a;
  a.cash = 0.0;

  if (gamma == 0.0) {
    // Linear objective: all budget on the best mean (lowest index on ties).
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (mu[i] > mu[best]) best = i;
    }
    a.fractions.assign(n, 0.0);
    a.fractions[best] = 1.0;
    return a;
  }

  std::vector<double> f(n, 1.0 / static_cast<double>(n));
  std::vector<double> grad(n), trial(n);
  auto compute_grad = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += cov[i * n + j] * x[j];
      grad[i] = mu[i] - 2.0 * gamma * row;
    }
  };

  double mu_max = 0.0;
  for (double v : mu) mu_max = std::fmax(mu_max, std::fabs(v));
  double step = 1.0 / (2.0 * gamma * std::fmax(scale, 1e-12) * static_cast<double>(n) + mu_max + 1.0);
  double obj = mpt_objective(mu, cov, gamma, f);

  for (int it = 0; it < 10000; ++it) {
    compute_grad(f);
    if (kkt_residual(grad, f) < 1e-8) break;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = f[i] + step * grad[i];
      trial = project_simplex(std::move(trial));
      const double trial_obj = mpt_objective(mu, cov, gamma, trial);
      if (trial_obj >= obj) {
        f = trial;
        obj = trial_obj;
        step *= 1.25;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // step underflow: stationary to machine precision
  }
  a.fractions = std::move(f);
  return a;
}

TaylorCheck kelly_taylor_mpt_check(const std::vector<double>& r, const std::vector<double>& m) {
  check_prob_vector(r, "r", /*require_norm=*/true);
  check_prob_vector(m, "m", /*require_norm=*/true);
  if (r.size() != m.size()) {
    throw std::invalid_argument("kelly_taylor_mpt_check: r and m must share a size");
  }
  const std::size_t n = r.size();

  TaylorCheck out;
  out.kelly = r;

  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu[i] = r[i] / m[i] - 1.0;
    if (std::fabs(mu[i]) >= 0.1) out.outside_regime = true;
  }
  // Sigma = E[rho rho'] with rho_i(outcome k) = delta_ik / m_i - 1.
  std::vector<double> cov(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double gi = (k == i ? 1.0 / m[i] : 0.0) - 1.0;
        const double gj = (k == j ? 1.0 / m[j] : 0.0) - 1.0;
        s += r[k] * gi * gj;
      }
      cov[i * n + j] = s;
    }
  }
  out.mpt = allocate_mpt(mu, cov, 0.5).fractions;
  for (std::size_t i = 0; i < n; ++i) {
    out.max_abs_diff = std::fmax(out.max_abs_diff, std::fabs(out.kelly[i] - out.mpt[i]));
  }
  return out;
}

ProfitMoments bet_profit_moments(double r, double m, double f) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("bet_profit_moments: r must lie in [0,1]");
  }
  if (!(m > 0.0 && m < 1.0)) {
    throw std::domain_error("bet_profit_moments: m must lie in (0,1)");
  }
  if (!(f >= 0.0)) {
    throw std::domain_error("bet_profit_moments: stake must be nonnegative");
  }
  ProfitMoments pm;
  pm.mean = (r / m - 1.0) * f;
  pm.variance = (1.0 - r) * r * f * f / (m * m);
  return pm;
}

}  // namespace marketlab::strategies
