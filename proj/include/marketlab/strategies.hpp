#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace marketlab::strategies {

/// Stake fractions per opportunity plus the cash fraction held back.
/// Budget invariant: fractions >= 0, cash >= 0, sum + cash == 1 for the
/// fully-budgeted allocators (unif leaves the unused budget as cash).
struct Allocation {
  std::vector<double> fractions;
  double cash = 0.0;

  double total_staked() const noexcept;
};

enum class StrategyKind { unif, kelly, fractional_kelly, mpt, sharpe };

enum class LogBase { natural, ten };

/// Strategy selection plus its knobs; unused knobs are ignored.
struct StrategyConfig {
  StrategyKind kind = StrategyKind::sharpe;
  double unit_stake = 0.0;     // unif stake per selected bet; 0 = 1/n
  double risk_weight = 1.0;    // mpt gamma
  double kelly_fraction = 1.0; // fractional_kelly
  LogBase log_base = LogBase::natural;

  void validate() const;
};

std::string to_string(StrategyKind k);
StrategyKind strategy_kind_from(const std::string& name);

/// Fixed stake d on every opportunity with a positive estimated ROI.
/// Throws BudgetError when d * (number selected) exceeds the unit budget.
Allocation allocate_unif(const std::vector<double>& estimated_rois, double d);

/// Bet-your-beliefs Kelly over one asset's exclusive outcomes: f = beliefs,
/// no cash. Beliefs must each lie in (0,1) and sum to 1 within 1e-9.
Allocation allocate_kelly(const std::vector<double>& beliefs);

/// Fractional Kelly: f = fraction * beliefs, cash = 1 - fraction.
Allocation allocate_fractional_kelly(const std::vector<double>& beliefs, double fraction);

/// Expected log growth sum_i r_i * log(cash + f_i / m_i) for exclusive
/// outcomes priced at m with true probabilities r (must sum to 1 within
/// 1e-9). Throws std::domain_error (ruin) when an outcome with positive
/// probability has zero wealth.
double kelly_growth(const std::vector<double>& r, const Allocation& alloc,
                    const std::vector<double>& m, LogBase base = LogBase::natural);

/// The growth of fully-invested bet-your-beliefs Kelly (f = t) equals
/// KL(r||m) - KL(r||t); returns all three terms for audit.
struct GrowthIdentity {
  double growth = 0.0;
  double kl_rm = 0.0;
  double kl_rt = 0.0;
};
GrowthIdentity kl_growth_identity(const std::vector<double>& r, const std::vector<double>& t,
                                  const std::vector<double>& m);

/// Ratio objective (sum mu_i f_i) / sqrt(sum var_i f_i^2) maximized over the
/// simplex. Opportunities with mu_i <= 0 get zero weight; among the rest the
/// maximizer is exactly f_i proportional to mu_i / var_i (Cauchy-Schwarz
/// equality case), normalized to sum 1.
/// Throws NoPositiveEdgeError when no mu_i is positive and std::domain_error
/// when a selected opportunity has var_i <= 0.
Allocation allocate_sharpe(const std::vector<double>& mu, const std::vector<double>& var);

/// Objective value of an allocation under the Sharpe ratio criterion.
double sharpe_objective(const std::vector<double>& mu, const std::vector<double>& var,
                        const std::vector<double>& f);

/// Mean-variance allocation: maximize mu.f - gamma * f'Sigma f subject to
/// sum f = 1, f >= 0. cov is row-major n x n, symmetric PSD. gamma = 0
/// degenerates to the single best-mean vertex (lowest index on ties);
/// otherwise projected gradient ascent on the simplex, iterated until the
/// KKT residual drops below 1e-8 (at most 1e4 iterations).
Allocation allocate_mpt(const std::vector<double>& mu, const std::vector<double>& cov,
                        double gamma);

/// Objective value of an allocation under the mean-variance criterion.
double mpt_objective(const std::vector<double>& mu, const std::vector<double>& cov, double gamma,
                     const std::vector<double>& f);

/// Correspondence check between exact Kelly (f = r, the bettor's beliefs
/// taken at the true probabilities) and the mean-variance allocation with
/// gamma = 1/2 and Sigma = E[rho rho'] over the per-outcome return vectors
/// rho_i(outcome k) = delta_ik / m_i - 1. Near-fair prices (all per-outcome
/// edges |r_i/m_i - 1| < 0.1) keep the second-order expansion tight;
/// outside_regime flags inputs beyond that.
struct TaylorCheck {
  std::vector<double> kelly;
  std::vector<double> mpt;
  double max_abs_diff = 0.0;
  bool outside_regime = false;
};
TaylorCheck kelly_taylor_mpt_check(const std::vector<double>& r, const std::vector<double>& m);

/// Mean and variance of a single bet's profit at fair odds 1/m with true win
/// probability r and stake f: mean = (r/m - 1) f, variance = (1-r) r f^2/m^2.
struct ProfitMoments {
  double mean = 0.0;
  double variance = 0.0;
};
ProfitMoments bet_profit_moments(double r, double m, double f);

}  // namespace marketlab::strategies
