#include "marketlab/learner.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "marketlab/errors.hpp"
#include "marketlab/rng.hpp"

namespace marketlab::learner {

namespace {

constexpr double kDivergenceGuard = 1e12;

double apply_link(Link link, double z) {
  return link == Link::logistic ? 1.0 / (1.0 + std::exp(-z)) : z;
}

// d prediction / d pre-activation.
double link_slope(Link link, double t) { return link == Link::logistic ? t * (1.0 - t) : 1.0; }

// d loss / d prediction for one sample.
double loss_slope(double t, double y, double m, double gamma, LossVariant variant) {
  if (variant == LossVariant::residual_cov) return 2.0 * (t - y) + gamma * (m - y);
  return 2.0 * (t - y) - 2.0 * gamma * (t - m);
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("gamma must lie in [0,1], got " + std::to_string(gamma));
  }
}

std::size_t feature_dim_of(const std::vector<LabeledSample>& data) {
  if (data.empty()) throw std::invalid_argument("training data must be nonempty");
  const std::size_t dim = data.front().features.size();
  for (const auto& s : data) {
    if (s.features.size() != dim) {
      throw std::invalid_argument("all samples must share a feature dimension");
    }
  }
  return dim;
}

}  // namespace

LossVariant loss_variant_from(const std::string& name) {
  if (name == "residual_cov") return LossVariant::residual_cov;
  if (name == "market_distance") return LossVariant::market_distance;
  throw std::invalid_argument("unknown loss variant '" + name + "'");
}

std::string to_string(LossVariant v) {
  return v == LossVariant::residual_cov ? "residual_cov" : "market_distance";
}

Link link_from(const std::string& name) {
  if (name == "logistic") return Link::logistic;
  if (name == "identity") return Link::identity;
  throw std::invalid_argument("unknown link '" + name + "'");
}

std::string to_string(Link l) { return l == Link::logistic ? "logistic" : "identity"; }

double LearnerModel::predict(const std::vector<double>& features) const {
  if (features.size() + 1 != weights.size()) {
    throw std::invalid_argument("predict: feature dimension does not match the model");
  }
  double z = weights[0];
  for (std::size_t j = 0; j < features.size(); ++j) z += weights[j + 1] * features[j];
  return apply_link(link, z);
}

double loss_mse_star(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& m, double gamma, LossVariant variant) {
  if (t.size() != y.size() || t.size() != m.size() || t.empty()) {
    throw std::invalid_argument("loss_mse_star: inputs must be nonempty and equal-sized");
  }
  check_gamma(gamma);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = t[i] - y[i];
    if (variant == LossVariant::residual_cov) {
      s += e * e + gamma * e * (m[i] - y[i]);
    } else {
      const double d = t[i] - m[i];
      s += e * e - gamma * d * d;
    }
  }
  return s / static_cast<double>(t.size());
}

std::vector<double> loss_gradient(const LearnerModel& model,
                                  const std::vector<LabeledSample>& batch, double gamma,
                                  LossVariant variant) {
  if (batch.empty()) throw std::invalid_argument("loss_gradient: batch must be nonempty");
  check_gamma(gamma);
  std::vector<double> grad(model.weights.size(), 0.0);
  for (const auto& s : batch) {
    const double t = model.predict(s.features);
    const double chain =
        loss_slope(t, s.outcome, s.market, gamma, variant) * link_slope(model.link, t);
    grad[0] += chain;
    for (std::size_t j = 0; j < s.features.size(); ++j) grad[j + 1] += chain * s.features[j];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

TrainResult train(const std::vector<LabeledSample>& data, const TrainConfig& config) {
  const std::size_t dim = feature_dim_of(data);
  check_gamma(config.gamma);
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("epochs and batch_size must be positive");
  }
  if (!(config.weight_decay >= 0.0)) {
    throw std::invalid_argument("weight_decay must be nonnegative");
  }

  TrainResult result;
  result.model.link = config.link;
  result.model.weights.assign(dim + 1, 0.0);
  rng::Sequence seq(rng::Stream(config.seed));
  if (dim > 0) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t j = 1; j <= dim; ++j) {
      result.model.weights[j] = (2.0 * seq.next_uniform() - 1.0) * scale;
    }
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledSample> batch;
  std::vector<double> t_all(data.size()), y_all(data.size()), m_all(data.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle.
    for (std::size_t i = data.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(seq.next_word() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < data.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(data.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.assign(stop - start, LabeledSample{});
      for (std::size_t i = start; i < stop; ++i) batch[i - start] = data[order[i]];
      const std::vector<double> grad =
          loss_gradient(result.model, batch, config.gamma, config.variant);
      for (std::size_t j = 0; j < grad.size(); ++j) {
        double g = grad[j];
        if (config.weight_decay > 0.0 && j > 0) {
          g += 2.0 * config.weight_decay * result.model.weights[j];
        }
        result.model.weights[j] -= config.learning_rate * g;
      }
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      t_all[i] = result.model.predict(data[i].features);
      y_all[i] = data[i].outcome;
      m_all[i] = data[i].market;
    }
    const double loss = loss_mse_star(t_all, y_all, m_all, config.gamma, config.variant);
    if (!std::isfinite(loss) || loss > kDivergenceGuard) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                            " (loss " + std::to_string(loss) +
                            "); reduce the learning rate");
    }
    if (loss < 0.0) ++result.negative_loss_epochs;
    result.epoch_loss.push_back(loss);
  }
  return result;
}

}  // namespace marketlab::learner
