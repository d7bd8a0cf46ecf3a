#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "marketlab/learner.hpp"
#include "marketlab/metrics.hpp"
#include "marketlab/rng.hpp"
#include "marketlab/simulator.hpp"
#include "marketlab/strategies.hpp"

namespace marketlab::learner {

namespace {

struct EvalPoint {
  double profit_sharpe = 0.0;
  double profit_sharpe_se = 0.0;
  double profit_unif = 0.0;
  double profit_unif_se = 0.0;
  double accuracy = 0.0;
  double accuracy_se = 0.0;
  double corr_tm = 0.0;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

std::vector<SweepRow> gamma_sweep(const std::vector<LabeledSample>& data,
                                  const SweepConfig& config) {
  if (config.gammas.empty()) throw std::invalid_argument("gamma_sweep: empty gamma list");
  if (config.replicates < 1) throw std::invalid_argument("gamma_sweep: replicates must be positive");
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw std::invalid_argument("gamma_sweep: train_fraction must lie in (0, 1)");
  }
  if (config.bets_per_round < 1) {
    throw std::invalid_argument("gamma_sweep: bets_per_round must be positive");
  }
  if (!(config.margin >= 0.0 && config.margin < 0.5)) {
    throw std::invalid_argument("gamma_sweep: margin must lie in [0, 0.5)");
  }
  const std::size_t n = data.size();
  const std::size_t n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.train_fraction));
  const std::size_t n_eval = n - n_train;
  if (n_train < 1 || n_eval < static_cast<std::size_t>(config.bets_per_round)) {
    throw std::invalid_argument(
        "gamma_sweep: split leaves no training data or less than one evaluation round");
  }

  const std::vector<LabeledSample> head(data.begin(),
                                        data.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<double> eval_outcome(n_eval), eval_market(n_eval);
  for (std::size_t i = 0; i < n_eval; ++i) {
    eval_outcome[i] = data[n_train + i].outcome;
    eval_market[i] = data[n_train + i].market;
  }

  strategies::StrategyConfig sharpe_cfg;
  sharpe_cfg.kind = strategies::StrategyKind::sharpe;
  strategies::StrategyConfig unif_cfg;
  unif_cfg.kind = strategies::StrategyKind::unif;

  // One seed per replicate, shared across gammas, so that per-gamma
  // differences come from the loss and not from initialization noise.
  std::vector<std::uint64_t> rep_seeds(static_cast<std::size_t>(config.replicates));
  for (std::size_t rep = 0; rep < rep_seeds.size(); ++rep) {
    rep_seeds[rep] = rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(rep));
  }

  std::vector<SweepRow> rows;
  rows.reserve(config.gammas.size());
  for (double gamma : config.gammas) {
    std::vector<EvalPoint> points;
    points.reserve(rep_seeds.size());
    for (std::uint64_t rep_seed : rep_seeds) {
      TrainConfig tc = config.train;
      tc.gamma = gamma;
      tc.seed = rep_seed;
      const TrainResult trained = train(head, tc);

      std::vector<double> preds(n_eval);
      for (std::size_t i = 0; i < n_eval; ++i) {
        preds[i] = trained.model.predict(data[n_train + i].features);
      }

      EvalPoint p;
      const sim::BacktestResult bt_sharpe =
          sim::backtest_dataset(eval_outcome, eval_market, preds, config.bets_per_round,
                                sharpe_cfg, config.margin);
      const sim::BacktestResult bt_unif = sim::backtest_dataset(
          eval_outcome, eval_market, preds, config.bets_per_round, unif_cfg, config.margin);
      p.profit_sharpe = 100.0 * mean_of(bt_sharpe.round_profits);
      p.profit_sharpe_se = 100.0 * se_of(bt_sharpe.round_profits);
      p.profit_unif = 100.0 * mean_of(bt_unif.round_profits);
      p.profit_unif_se = 100.0 * se_of(bt_unif.round_profits);

      std::size_t hits = 0;
      for (std::size_t i = 0; i < n_eval; ++i) {
        if ((preds[i] > 0.5) == (eval_outcome[i] > 0.5)) ++hits;
      }
      p.accuracy = static_cast<double>(hits) / static_cast<double>(n_eval);
      p.accuracy_se =
          std::sqrt(p.accuracy * (1.0 - p.accuracy) / static_cast<double>(n_eval));
      try {
        p.corr_tm = metrics::pearson(preds, eval_market);
      } catch (const std::domain_error&) {
        p.corr_tm = 0.0;  // saturated predictions have no defined correlation
      }
      points.push_back(p);
    }

    SweepRow row;
    row.gamma = gamma;
    if (points.size() == 1) {
      const EvalPoint& p = points.front();
      row.profit_sharpe = p.profit_sharpe;
      row.profit_sharpe_se = p.profit_sharpe_se;
      row.profit_unif = p.profit_unif;
      row.profit_unif_se = p.profit_unif_se;
      row.accuracy = p.accuracy;
      row.accuracy_se = p.accuracy_se;
      row.corr_tm = p.corr_tm;
    } else {
      std::vector<double> ps, pu, ac, ct;
      for (const EvalPoint& p : points) {
        ps.push_back(p.profit_sharpe);
        pu.push_back(p.profit_unif);
        ac.push_back(p.accuracy);
        ct.push_back(p.corr_tm);
      }
      row.profit_sharpe = mean_of(ps);
      row.profit_sharpe_se = se_of(ps);
      row.profit_unif = mean_of(pu);
      row.profit_unif_se = se_of(pu);
      row.accuracy = mean_of(ac);
      row.accuracy_se = se_of(ac);
      row.corr_tm = mean_of(ct);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace marketlab::learner
