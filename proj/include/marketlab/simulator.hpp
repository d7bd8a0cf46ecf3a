#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "marketlab/learner.hpp"
#include "marketlab/market.hpp"
#include "marketlab/metrics.hpp"
#include "marketlab/returns.hpp"
#include "marketlab/strategies.hpp"

namespace marketlab::sim {

/// One round's market data: n joint draws plus realized settlements.
/// A round stream is consumed in a fixed order: triple i at counters
/// 3i..3i+2, then settlement uniforms at counters 3n..4n-1 (drawn in both
/// modes to keep the layout mode-independent; stock rounds settle at r and
/// ignore them).
struct RoundData {
  market::Mode mode = market::Mode::betting;
  double margin = 0.0;
  std::vector<market::EstimateTriple> triples;
  std::vector<std::uint8_t> alpha_won;
};

/// Outcome of evaluating one strategy on one round; profits are fractions
/// of the unit round budget. Accuracy flags and the breakdown cover all n
/// bets (abstentions included), not just the staked ones.
struct RoundResult {
  double total_profit = 0.0;
  std::vector<returns::ReturnRecord> records;
  std::vector<std::uint8_t> accuracy_flags;
  metrics::Breakdown breakdown;
  int bets_placed = 0;
};

/// Draw one round's data from a compiled sampler.
RoundData sample_round(const market::CorrelatedSampler& sampler, int bets, std::uint64_t seed);

/// Evaluate a strategy on fixed round data. Rounds with no positive-edge
/// opportunity place no bets (profit 0).
RoundResult evaluate_round(const RoundData& data, const strategies::StrategyConfig& strategy);

/// Sample a fresh round from the spec and evaluate the strategy on it; the
/// seed keys the round stream directly.
RoundResult run_round(const market::MarketSpec& spec, const strategies::StrategyConfig& strategy,
                      int bets, std::uint64_t seed);

/// Correlation grid experiment: one cell per (corr_tr, corr_tm) pair,
/// averaged over the corr_rm values; every strategy sees identical round
/// data. Round streams are keyed by (corr_rm index, round index) only, so
/// cells share latent draws (common random numbers) and results do not
/// depend on the thread count.
struct ExperimentGrid {
  market::MarketSpec base;
  std::vector<double> corr_tr{0.85, 0.90, 0.95};
  std::vector<double> corr_tm{0.85, 0.90, 0.95};
  std::vector<double> corr_rm{0.85, 0.90, 0.95};
  int rounds = 10000;
  int bets_per_round = 30;
  std::vector<strategies::StrategyConfig> strats;
  int threads = 1;
};

/// One grid cell, aggregated over corr_rm values and rounds. Profit means
/// and standard errors are percentages of the round budget, per strategy in
/// grid order; accuracy and the breakdown are percentages over all bets.
struct ExperimentCell {
  double corr_tr = 0.0;
  double corr_tm = 0.0;
  std::vector<double> w_mean;
  std::vector<double> w_se;
  double accuracy = 0.0;
  metrics::Breakdown breakdown;
};

std::vector<ExperimentCell> run_experiment(const ExperimentGrid& grid, std::uint64_t seed);

/// Monte-Carlo census of the six orderings over a triple sample: per-class
/// frequencies, the tie frequency, and the essentially-profitable fraction
/// among strictly ordered triples.
struct CensusResult {
  std::array<double, 6> ordering_freq{};
  double tie_freq = 0.0;
  double profitable_fraction = 0.0;
  std::size_t count = 0;
};
CensusResult ordering_census(const std::vector<market::EstimateTriple>& triples);

/// Round-based backtest over a recorded dataset (chronological order,
/// consecutive groups of bets_per_round bets; a trailing partial round is
/// dropped). Outcomes are 0/1 in betting mode, settlement values in stock
/// mode. Profits are per-round fractions of the unit budget.
struct BacktestResult {
  std::vector<double> round_profits;
  double accuracy = 0.0;
  metrics::Breakdown breakdown;
};
BacktestResult backtest_dataset(const std::vector<double>& outcomes,
                                const std::vector<double>& market_probs,
                                const std::vector<double>& trader_probs, int bets_per_round,
                                const strategies::StrategyConfig& strategy, double margin = 0.0,
                                market::Mode mode = market::Mode::betting);

/// Synthetic bookmaker-vs-learner market. A latent true probability r is
/// drawn from a Beta marginal; the bookmaker quotes the calibrated posterior
/// mean of r given a noisy signal of its normal score (so E[y | m] = m by
/// construction); features are noisy views of the same normal score, plus -
/// when feature_dim >= 2 - one noisy view of the bookmaker's signal (the
/// market view) that lets a learner trade correlation with the market
/// against accuracy.
struct SynthParams {
  std::size_t samples = 16000;
  int feature_dim = 4;
  double trader_noise = 1.0;      // sd of each feature's own noise
  double bookmaker_noise = 0.4;   // sd of the bookmaker's signal noise
  double market_view_noise = 0.5; // extra noise on the market-view feature
  double market_bias = 1.0;       // quote exponent; < 1 compresses toward 1/2
  double mean_r = 0.5;
  double var_r = 0.08;
};

struct SynthMarket {
  std::vector<learner::LabeledSample> samples;
  std::vector<double> true_prob;  // hidden truth, for audits only
};

SynthMarket synth_market_for_learner(const SynthParams& params, std::uint64_t seed);

}  // namespace marketlab::sim
