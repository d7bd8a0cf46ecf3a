#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace marketlab::learner {

enum class Link { logistic, identity };

/// Which term augments the squared error in the training loss:
///   residual_cov     mean[(t-y)^2 + gamma (t-y)(m-y)]
///   market_distance  mean[(t-y)^2 - gamma (t-m)^2]
/// gamma in [0,1]; gamma = 0 reduces both to plain MSE.
enum class LossVariant { residual_cov, market_distance };

LossVariant loss_variant_from(const std::string& name);
std::string to_string(LossVariant v);

Link link_from(const std::string& name);
std::string to_string(Link l);

/// One training example: feature vector, realized outcome y (0/1 for
/// betting; a settlement value in stock mode), and the market's quote m.
struct LabeledSample {
  std::vector<double> features;
  double outcome = 0.0;
  double market = 0.0;
};

/// Linear model through a link; weights[0] is the bias.
struct LearnerModel {
  Link link = Link::logistic;
  std::vector<double> weights;

  double predict(const std::vector<double>& features) const;
};

struct TrainConfig {
  double gamma = 0.0;
  LossVariant variant = LossVariant::market_distance;
  Link link = Link::logistic;
  double learning_rate = 0.1;
  int epochs = 40;
  int batch_size = 64;
  double weight_decay = 0.0;  // L2 on non-bias weights; 0 disables
  std::uint64_t seed = 1;
};

struct TrainResult {
  LearnerModel model;
  std::vector<double> epoch_loss;
  int negative_loss_epochs = 0;  // flags persistently negative augmented loss
};

/// Batch loss for predictions t against outcomes y and market quotes m.
double loss_mse_star(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& m, double gamma, LossVariant variant);

/// Analytic gradient of the mean batch loss with respect to the weights
/// (bias first). Matches central finite differences to ~1e-5 relative.
std::vector<double> loss_gradient(const LearnerModel& model,
                                  const std::vector<LabeledSample>& batch, double gamma,
                                  LossVariant variant);

/// Minibatch gradient descent with a fixed learning rate and seeded
/// shuffling; deterministic given the config. Throws DivergenceError when
/// the epoch loss exceeds 1e12 or turns non-finite.
TrainResult train(const std::vector<LabeledSample>& data, const TrainConfig& config);

/// One row of a decorrelation sweep: backtest profits are mean round profit
/// as a percentage of the round budget; corr_tm is the held-out Pearson
/// correlation between predictions and market quotes.
struct SweepRow {
  double gamma = 0.0;
  double profit_sharpe = 0.0;
  double profit_sharpe_se = 0.0;
  double profit_unif = 0.0;
  double profit_unif_se = 0.0;
  double accuracy = 0.0;
  double accuracy_se = 0.0;
  double corr_tm = 0.0;
};

struct SweepConfig {
  std::vector<double> gammas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  TrainConfig train;            // gamma and seed overridden per point
  double train_fraction = 0.7;  // chronological split
  int bets_per_round = 30;
  double margin = 0.0;          // bookmaker margin applied in the backtest
  int replicates = 1;           // per-gamma training replicates (shared seeds)
  std::uint64_t seed = 1;
};

/// Train one model per (gamma, replicate) with a seed schedule shared across
/// gammas, evaluate on the held-out tail (accuracy, corr with the market,
/// sharpe and unif backtest profits), and aggregate replicate means and
/// standard errors.
std::vector<SweepRow> gamma_sweep(const std::vector<LabeledSample>& data,
                                  const SweepConfig& config);

}  // namespace marketlab::learner
