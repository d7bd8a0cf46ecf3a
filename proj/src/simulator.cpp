#include "marketlab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "marketlab/errors.hpp"
#include "marketlab/rng.hpp"

namespace marketlab::sim {

namespace {

using market::Mode;
using market::Side;
using returns::Action;

struct SidePrices {
  double alpha = 0.0;
  double beta = 0.0;
};

// Executed prices of the two sides: margined probabilities in betting mode,
// a symmetric bid/ask spread around m in stock mode. Margined probabilities
// are capped just below 1 (an odds floor): books keep quoting near-certain
// outcomes instead of offering odds at or below 1.
SidePrices side_prices(Mode mode, double m, double margin) {
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be nonnegative");
  if (mode == Mode::betting) {
    constexpr double kProbCap = 1.0 - 1e-6;
    return {std::fmin(m + margin, kProbCap), std::fmin((1.0 - m) + margin, kProbCap)};
  }
  const double bid = m - margin;
  if (!(bid > 0.0)) {
    throw std::domain_error("stock margin " + std::to_string(margin) +
                            " wipes out the bid at price " + std::to_string(m));
  }
  return {m + margin, bid};
}

// Per-bet census used for accuracy and the trader/market breakdown; bets
// are judged on the threshold prediction (estimate > 1/2), outcomes on the
// realized side.
struct RoundCensus {
  int acc_hits = 0;
  std::array<int, 4> counts{};  // consensus, upset, missed, spotted
};

RoundCensus census_of(const RoundData& data) {
  RoundCensus c;
  if (data.mode != Mode::betting) return c;
  for (std::size_t i = 0; i < data.triples.size(); ++i) {
    const bool won = data.alpha_won[i] != 0;
    const bool trader_right = (data.triples[i].t > 0.5) == won;
    const bool market_right = (data.triples[i].m > 0.5) == won;
    c.acc_hits += trader_right ? 1 : 0;
    if (trader_right && market_right) {
      ++c.counts[0];
    } else if (!trader_right && !market_right) {
      ++c.counts[1];
    } else if (!trader_right) {
      ++c.counts[2];
    } else {
      ++c.counts[3];
    }
  }
  return c;
}

}  // namespace

RoundData sample_round(const market::CorrelatedSampler& sampler, int bets, std::uint64_t seed) {
  if (bets < 1) throw std::invalid_argument("sample_round: need at least one bet");
  const std::size_t n = static_cast<std::size_t>(bets);
  RoundData data;
  data.mode = sampler.spec().mode;
  data.margin = sampler.spec().margin;
  data.triples.resize(n);
  data.alpha_won.resize(n);
  rng::Stream stream(seed);
  for (std::size_t i = 0; i < n; ++i) data.triples[i] = sampler.sample_at(stream, 3 * i);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = stream.uniform_at(3 * n + i);
    data.alpha_won[i] =
        data.mode == Mode::betting && market::alpha_realized(data.triples[i].r, u) ? 1 : 0;
  }
  return data;
}

RoundResult evaluate_round(const RoundData& data, const strategies::StrategyConfig& strategy) {
  strategy.validate();
  const std::size_t n = data.triples.size();
  if (n == 0 || data.alpha_won.size() != n) {
    throw std::invalid_argument("evaluate_round: malformed round data");
  }

  RoundResult res;
  res.records.resize(n);
  std::vector<SidePrices> prices(n);
  std::vector<double> rois(n);
  for (std::size_t i = 0; i < n; ++i) {
    prices[i] = side_prices(data.mode, data.triples[i].m, data.margin);
    res.records[i].decision =
        returns::decide(data.triples[i].t, prices[i].alpha, prices[i].beta, data.mode);
    rois[i] = res.records[i].decision.estimated_roi;
  }

  const bool kelly_family = strategy.kind == strategies::StrategyKind::kelly ||
                            strategy.kind == strategies::StrategyKind::fractional_kelly;

  std::vector<double> stake(n, 0.0);
  if (!kelly_family) {
    bool any_edge = false;
    for (double roi : rois) any_edge = any_edge || roi > 0.0;
    if (any_edge) {
      switch (strategy.kind) {
        case strategies::StrategyKind::unif: {
          const double d =
              strategy.unit_stake > 0.0 ? strategy.unit_stake : 1.0 / static_cast<double>(n);
          stake = strategies::allocate_unif(rois, d).fractions;
          break;
        }
        case strategies::StrategyKind::sharpe:
        case strategies::StrategyKind::mpt: {
          // Per-unit profit moments of the chosen side, with the trader's
          // estimate standing in for the unknown true probability.
          std::vector<double> var(n, 1.0);
          for (std::size_t i = 0; i < n; ++i) {
            if (rois[i] <= 0.0) continue;
            const bool buy = res.records[i].decision.action == Action::buy;
            if (data.mode == Mode::betting) {
              const double p = buy ? data.triples[i].t : 1.0 - data.triples[i].t;
              const double price = buy ? prices[i].alpha : prices[i].beta;
              var[i] = p * (1.0 - p) / (price * price);
            } else {
              // Stock mode has no Bernoulli structure; weight edges equally.
              var[i] = 1.0;
            }
          }
          if (strategy.kind == strategies::StrategyKind::sharpe) {
            stake = strategies::allocate_sharpe(rois, var).fractions;
          } else {
            // Same positive-edge filter as sharpe, then mean-variance over
            // the selected subset with a diagonal covariance.
            std::vector<std::size_t> sel;
            for (std::size_t i = 0; i < n; ++i) {
              if (rois[i] > 0.0) sel.push_back(i);
            }
            const std::size_t k = sel.size();
            std::vector<double> mu_s(k), cov_s(k * k, 0.0);
            for (std::size_t a = 0; a < k; ++a) {
              mu_s[a] = rois[sel[a]];
              cov_s[a * k + a] = var[sel[a]];
            }
            const std::vector<double> f_s =
                strategies::allocate_mpt(mu_s, cov_s, strategy.risk_weight).fractions;
            for (std::size_t a = 0; a < k; ++a) stake[sel[a]] = f_s[a];
          }
          break;
        }
        default:
          break;
      }
    }
  }

  double total = 0.0;
  int placed = 0;
  const double asset_budget = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& rec = res.records[i];
    const bool alpha_won = data.alpha_won[i] != 0;

    if (kelly_family) {
      // Bet-your-beliefs on both sides of each asset, equal budget split
      // across the round's assets, cash held per the Kelly fraction.
      const double fraction = strategy.kind == strategies::StrategyKind::kelly
                                  ? 1.0
                                  : strategy.kelly_fraction;
      const double t_i = data.triples[i].t;
      double multiplier;
      if (data.mode == Mode::betting) {
        const double f_won = fraction * (alpha_won ? t_i : 1.0 - t_i);
        const double p_won = alpha_won ? prices[i].alpha : prices[i].beta;
        multiplier = (1.0 - fraction) + f_won / p_won;
      } else {
        // Long t/(t+price)-weighted book has no natural stock analogue;
        // settle a buy-side holding of the fraction at the true value.
        const double ask = prices[i].alpha;
        multiplier = (1.0 - fraction) + fraction * data.triples[i].r / ask;
      }
      rec.stake = asset_budget * fraction;
      rec.realized_profit = asset_budget * (multiplier - 1.0);
      rec.true_expected_roi = 0.0;
      if (rec.stake > 0.0) ++placed;
      total += rec.realized_profit;
      continue;
    }

    const double f = stake[i];
    rec.stake = f;
    if (f <= 0.0 || rec.decision.action == Action::abstain) {
      rec.realized_profit = 0.0;
      rec.true_expected_roi = 0.0;
      continue;
    }
    ++placed;
    const bool buy = rec.decision.action == Action::buy;
    const double price = buy ? prices[i].alpha : prices[i].beta;
    rec.true_expected_roi =
        returns::true_roi_at_price(data.triples[i].r, price, rec.decision.action, data.mode);
    if (data.mode == Mode::betting) {
      const bool won = buy == alpha_won;
      rec.realized_profit = won ? f * (1.0 / price - 1.0) : -f;
    } else {
      // Deterministic settlement at the true value.
      rec.realized_profit = f * rec.true_expected_roi;
    }
    total += rec.realized_profit;
  }
  res.total_profit = total;
  res.bets_placed = placed;

  res.accuracy_flags.resize(n);
  const RoundCensus c = census_of(data);
  if (data.mode == Mode::betting) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool won = data.alpha_won[i] != 0;
      res.accuracy_flags[i] = (data.triples[i].t > 0.5) == won ? 1 : 0;
    }
    const double dn = static_cast<double>(n);
    res.breakdown = metrics::Breakdown{c.counts[0] / dn, c.counts[1] / dn, c.counts[2] / dn,
                                       c.counts[3] / dn};
  } else {
    // Directional accuracy relative to the quote; the probabilistic
    // breakdown has no stock analogue.
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = data.triples[i];
      res.accuracy_flags[i] = (e.t > e.m) == (e.r > e.m) ? 1 : 0;
    }
  }
  return res;
}

RoundResult run_round(const market::MarketSpec& spec, const strategies::StrategyConfig& strategy,
                      int bets, std::uint64_t seed) {
  const market::CorrelatedSampler sampler(spec);
  return evaluate_round(sample_round(sampler, bets, seed), strategy);
}

std::vector<ExperimentCell> run_experiment(const ExperimentGrid& grid, std::uint64_t seed) {
  if (grid.corr_tr.empty() || grid.corr_tm.empty() || grid.corr_rm.empty()) {
    throw std::invalid_argument("run_experiment: correlation lists must be nonempty");
  }
  if (grid.rounds < 1 || grid.bets_per_round < 1) {
    throw std::invalid_argument("run_experiment: rounds and bets_per_round must be positive");
  }
  if (grid.strats.empty()) {
    throw std::invalid_argument("run_experiment: need at least one strategy");
  }
  for (const auto& s : grid.strats) s.validate();
  const int threads = std::max(1, grid.threads);

  const std::size_t n_strats = grid.strats.size();
  const std::size_t rounds_total = grid.corr_rm.size() * static_cast<std::size_t>(grid.rounds);
  std::vector<ExperimentCell> cells;
  cells.reserve(grid.corr_tr.size() * grid.corr_tm.size());

  // Round streams are keyed by (corr_rm index, round index) only: every
  // (corr_tr, corr_tm) cell transforms the same latent draws, which is a
  // variance reduction for cross-cell comparisons.
  std::vector<std::uint64_t> rm_keys(grid.corr_rm.size());
  for (std::size_t k = 0; k < grid.corr_rm.size(); ++k) {
    rm_keys[k] = rng::derive(seed, static_cast<std::uint64_t>(k));
  }

  for (double tr : grid.corr_tr) {
    for (double tm : grid.corr_tm) {
      std::vector<std::vector<double>> w(n_strats, std::vector<double>(rounds_total));
      std::vector<int> acc_hits(rounds_total);
      std::vector<std::array<int, 4>> brk(rounds_total);

      for (std::size_t k = 0; k < grid.corr_rm.size(); ++k) {
        market::MarketSpec spec = grid.base;
        spec.corr_tr = tr;
        spec.corr_tm = tm;
        spec.corr_rm = grid.corr_rm[k];
        const market::CorrelatedSampler sampler(spec);
        const std::size_t slot0 = k * static_cast<std::size_t>(grid.rounds);

        auto worker = [&](int tid) {
          for (int j = tid; j < grid.rounds; j += threads) {
            const std::uint64_t round_key =
                rng::derive(rm_keys[k], static_cast<std::uint64_t>(j));
            const RoundData data = sample_round(sampler, grid.bets_per_round, round_key);
            const std::size_t slot = slot0 + static_cast<std::size_t>(j);
            for (std::size_t s = 0; s < n_strats; ++s) {
              w[s][slot] = evaluate_round(data, grid.strats[s]).total_profit;
            }
            const RoundCensus c = census_of(data);
            acc_hits[slot] = c.acc_hits;
            brk[slot] = c.counts;
          }
        };
        if (threads == 1) {
          worker(0);
        } else {
          std::vector<std::thread> pool;
          pool.reserve(static_cast<std::size_t>(threads));
          for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
          for (auto& th : pool) th.join();
        }
      }

      ExperimentCell cell;
      cell.corr_tr = tr;
      cell.corr_tm = tm;
      cell.w_mean.resize(n_strats);
      cell.w_se.resize(n_strats);
      const double nr = static_cast<double>(rounds_total);
      for (std::size_t s = 0; s < n_strats; ++s) {
        double sum = 0.0, sumsq = 0.0;
        for (double v : w[s]) {
          sum += v;
          sumsq += v * v;
        }
        const double mean = sum / nr;
        const double var = nr > 1.0 ? std::fmax(0.0, (sumsq - sum * sum / nr) / (nr - 1.0)) : 0.0;
        cell.w_mean[s] = 100.0 * mean;
        cell.w_se[s] = 100.0 * std::sqrt(var / nr);
      }
      long hits = 0;
      std::array<long, 4> counts{};
      for (std::size_t i = 0; i < rounds_total; ++i) {
        hits += acc_hits[i];
        for (int q = 0; q < 4; ++q) counts[static_cast<std::size_t>(q)] += brk[i][static_cast<std::size_t>(q)];
      }
      const double bets_total = nr * static_cast<double>(grid.bets_per_round);
      cell.accuracy = 100.0 * static_cast<double>(hits) / bets_total;
      cell.breakdown =
          metrics::Breakdown{100.0 * static_cast<double>(counts[0]) / bets_total,
                             100.0 * static_cast<double>(counts[1]) / bets_total,
                             100.0 * static_cast<double>(counts[2]) / bets_total,
                             100.0 * static_cast<double>(counts[3]) / bets_total};
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

CensusResult ordering_census(const std::vector<market::EstimateTriple>& triples) {
  if (triples.empty()) throw std::invalid_argument("ordering_census: input must be nonempty");
  CensusResult out;
  out.count = triples.size();
  std::array<std::size_t, 6> counts{};
  std::size_t ties = 0, profitable = 0, strict = 0;
  for (const auto& e : triples) {
    const returns::OrderingClass c = returns::classify_ordering(e.r, e.m, e.t);
    if (c.ordering == returns::Ordering::degenerate) {
      ++ties;
      continue;
    }
    ++strict;
    ++counts[static_cast<std::size_t>(c.ordering)];
    if (c.profitable) ++profitable;
  }
  const double n = static_cast<double>(triples.size());
  for (std::size_t i = 0; i < 6; ++i) out.ordering_freq[i] = static_cast<double>(counts[i]) / n;
  out.tie_freq = static_cast<double>(ties) / n;
  out.profitable_fraction =
      strict > 0 ? static_cast<double>(profitable) / static_cast<double>(strict) : 0.0;
  return out;
}

BacktestResult backtest_dataset(const std::vector<double>& outcomes,
                                const std::vector<double>& market_probs,
                                const std::vector<double>& trader_probs, int bets_per_round,
                                const strategies::StrategyConfig& strategy, double margin,
                                market::Mode mode) {
  const std::size_t n = outcomes.size();
  if (n == 0 || market_probs.size() != n || trader_probs.size() != n) {
    throw std::invalid_argument("backtest_dataset: inputs must be nonempty and equal-sized");
  }
  if (bets_per_round < 1) {
    throw std::invalid_argument("backtest_dataset: bets_per_round must be positive");
  }
  if (!(margin >= 0.0 && margin < 0.5)) {
    throw std::invalid_argument("backtest_dataset: margin must lie in [0, 0.5)");
  }
  const std::size_t per_round = static_cast<std::size_t>(bets_per_round);
  const std::size_t rounds = n / per_round;
  if (rounds == 0) {
    throw std::invalid_argument("backtest_dataset: fewer samples than one round");
  }

  BacktestResult out;
  out.round_profits.reserve(rounds);
  long hits = 0;
  std::array<long, 4> counts{};
  for (std::size_t r = 0; r < rounds; ++r) {
    RoundData data;
    data.mode = mode;
    data.margin = margin;
    data.triples.resize(per_round);
    data.alpha_won.resize(per_round);
    for (std::size_t i = 0; i < per_round; ++i) {
      const std::size_t idx = r * per_round + i;
      // The realized outcome stands in for the (unobserved) true value.
      data.triples[i] = market::EstimateTriple{outcomes[idx], market_probs[idx],
                                               trader_probs[idx]};
      data.alpha_won[i] = outcomes[idx] > 0.5 ? 1 : 0;
    }
    const RoundResult rr = evaluate_round(data, strategy);
    out.round_profits.push_back(rr.total_profit);
    const RoundCensus c = census_of(data);
    hits += c.acc_hits;
    for (int q = 0; q < 4; ++q) counts[static_cast<std::size_t>(q)] += c.counts[static_cast<std::size_t>(q)];
  }
  const double bets_total = static_cast<double>(rounds * per_round);
  out.accuracy = static_cast<double>(hits) / bets_total;
  out.breakdown = metrics::Breakdown{static_cast<double>(counts[0]) / bets_total,
                                     static_cast<double>(counts[1]) / bets_total,
                                     static_cast<double>(counts[2]) / bets_total,
                                     static_cast<double>(counts[3]) / bets_total};
  return out;
}

namespace {

// 20-point Gauss-Hermite rule (weight exp(-x^2)); used for the bookmaker's
// posterior-mean quote, which keeps the synthetic market calibrated by
// construction.
constexpr std::array<std::array<double, 2>, 20> kGaussHermite20 = {{
    {-5.3874808900112328, 2.2293936455341447e-13},
    {-4.6036824495507442, 4.3993409922731747e-10},
    {-3.9447640401156252, 1.0860693707692782e-07},
    {-3.3478545673832163, 7.8025564785320599e-06},
    {-2.7888060584281305, 0.00022833863601635365},
    {-2.2549740020892757, 0.0032437733422378567},
    {-1.7385377121165861, 0.024810520887463643},
    {-1.2340762153953231, 0.10901720602002329},
    {-0.73747372854539439, 0.28667550536283415},
    {-0.24534070830090124, 0.46224366960061009},
    {0.24534070830090124, 0.46224366960061009},
    {0.73747372854539439, 0.28667550536283415},
    {1.2340762153953231, 0.10901720602002329},
    {1.7385377121165861, 0.024810520887463643},
    {2.2549740020892757, 0.0032437733422378567},
    {2.7888060584281305, 0.00022833863601635365},
    {3.3478545673832163, 7.8025564785320599e-06},
    {3.9447640401156252, 1.0860693707692782e-07},
    {4.6036824495507442, 4.3993409922731747e-10},
    {5.3874808900112328, 2.2293936455341447e-13},
}};

constexpr double kInvSqrtPi = 0.56418958354775628694;

}  // namespace

SynthMarket synth_market_for_learner(const SynthParams& params, std::uint64_t seed) {
  if (params.samples == 0) {
    throw std::invalid_argument("synth_market_for_learner: need at least one sample");
  }
  if (params.feature_dim < 1) {
    throw std::invalid_argument("synth_market_for_learner: need at least one feature");
  }
  if (!(params.trader_noise >= 0.0 && params.bookmaker_noise >= 0.0 &&
        params.market_view_noise >= 0.0)) {
    throw std::invalid_argument("synth_market_for_learner: noise levels must be nonnegative");
  }
  if (!(params.market_bias > 0.0)) {
    throw std::invalid_argument("synth_market_for_learner: market_bias must be positive");
  }
  const dist::BetaDist beta = dist::BetaDist::from_moments(params.mean_r, params.var_r);

  const int dim = params.feature_dim;
  const bool market_view = dim >= 2;
  const int r_views = market_view ? dim - 1 : dim;
  const double bn = params.bookmaker_noise;
  const double tn = params.trader_noise;
  const double mv = params.market_view_noise;
  const double post_mean_shrink = 1.0 / (1.0 + bn * bn);
  const double post_sd = std::sqrt(bn * bn / (1.0 + bn * bn));
  const double r_view_scale = 1.0 / std::sqrt(1.0 + tn * tn);
  const double mv_scale = 1.0 / std::sqrt(1.0 + bn * bn + mv * mv);

  SynthMarket out;
  out.samples.resize(params.samples);
  out.true_prob.resize(params.samples);
  rng::Stream stream(seed);
  const std::uint64_t words_per_sample = static_cast<std::uint64_t>(dim) + 4;

  for (std::size_t i = 0; i < params.samples; ++i) {
    const std::uint64_t base = i * words_per_sample;
    const double u_r = stream.uniform_at(base);
    const double z = dist::normal_quantile(u_r);
    const double r = beta.quantile(u_r);
    const double eta = dist::normal_quantile(stream.uniform_at(base + 1));
    const double zeta = dist::normal_quantile(stream.uniform_at(base + 2));
    const double u_out = stream.uniform_at(base + 3);

    const double signal = z + bn * eta;
    double m;
    if (bn == 0.0) {
      m = r;  // noiseless bookmaker quotes the truth
    } else {
      const double mu_p = signal * post_mean_shrink;
      double acc = 0.0;
      for (const auto& node : kGaussHermite20) {
        const double zq = mu_p + M_SQRT2 * post_sd * node[0];
        acc += node[1] * beta.quantile(dist::clamp_open_unit(dist::normal_cdf(zq)));
      }
      m = acc * kInvSqrtPi;
    }
    if (params.market_bias != 1.0) {
      // Favorite-longshot distortion of the quote: exponents below 1
      // compress toward 1/2, overpricing longshots and underpricing
      // favorites; the posterior mean above stays the fair value.
      const double num = std::pow(m, params.market_bias);
      const double den = num + std::pow(1.0 - m, params.market_bias);
      m = num / den;
    }

    auto& s = out.samples[i];
    s.features.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < r_views; ++j) {
      const double xi = dist::normal_quantile(stream.uniform_at(base + 4 + static_cast<std::uint64_t>(j)));
      s.features[static_cast<std::size_t>(j)] = (z + tn * xi) * r_view_scale;
    }
    if (market_view) {
      s.features[static_cast<std::size_t>(dim - 1)] = (signal + mv * zeta) * mv_scale;
    }
    s.outcome = u_out < r ? 1.0 : 0.0;
    s.market = m;
    out.true_prob[i] = r;
  }
  return out;
}

}  // namespace marketlab::sim
