#include "marketlab/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace marketlab::metrics {

namespace {

constexpr double kClamp = 1e-12;

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b || a == 0) {
    throw std::invalid_argument(std::string(what) + ": inputs must be nonempty and equal-sized");
  }
}

void check_outcomes(const std::vector<int>& y) {
  for (int v : y) {
    if (v != 0 && v != 1) {
      throw std::invalid_argument("outcomes must be 0/1, got " + std::to_string(v));
    }
  }
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};

// Least-squares fit of y on x; a (numerically) constant x yields the mean
// predictor so downstream residuals stay well-defined.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 1e-30 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

std::vector<double> residuals(const std::vector<double>& x, const std::vector<double>& y) {
  const LinearFit f = fit_line(x, y);
  std::vector<double> r(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i] - (f.intercept + f.slope * x[i]);
  return r;
}

}  // namespace

double mse(const std::vector<double>& truth, const std::vector<double>& estimate) {
  check_same_size(truth.size(), estimate.size(), "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    s += d * d;
  }
  return s / static_cast<double>(truth.size());
}

XentResult xent(const std::vector<int>& outcomes, const std::vector<double>& probs) {
  check_same_size(outcomes.size(), probs.size(), "xent");
  check_outcomes(outcomes);
  XentResult out;
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("xent: probabilities must lie in [0,1], got " + std::to_string(p));
    }
    if (p < kClamp || p > 1.0 - kClamp) {
      p = std::fmin(std::fmax(p, kClamp), 1.0 - kClamp);
      ++out.clamped;
    }
    s += outcomes[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  out.value = -s / static_cast<double>(probs.size());
  return out;
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  check_same_size(p.size(), q.size(), "kl");
  double sp = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) {
      throw std::domain_error("kl: probabilities must be nonnegative");
    }
    sp += p[i];
    sq += q[i];
  }
  if (std::fabs(sp - 1.0) > 1e-6 || std::fabs(sq - 1.0) > 1e-6) {
    throw std::domain_error("kl: inputs must be normalized distributions");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) {
      throw std::domain_error("kl: q has zero mass where p is positive (divergence is infinite)");
    }
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  check_same_size(a.size(), b.size(), "pearson");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 1e-24) || !(sbb > 1e-24)) {
    throw std::domain_error("pearson: correlation undefined for a constant input");
  }
  return sab / std::sqrt(saa * sbb);
}

double partial_corr_tm_given_r(const std::vector<market::EstimateTriple>& triples) {
  if (triples.empty()) {
    throw std::invalid_argument("partial_corr_tm_given_r: input must be nonempty");
  }
  std::vector<double> r(triples.size()), m(triples.size()), t(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    r[i] = triples[i].r;
    m[i] = triples[i].m;
    t[i] = triples[i].t;
  }
  return pearson(residuals(r, t), residuals(r, m));
}

double accuracy(const std::vector<int>& outcomes, const std::vector<double>& probs) {
  check_same_size(outcomes.size(), probs.size(), "accuracy");
  check_outcomes(outcomes);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if ((probs[i] > 0.5) == (outcomes[i] == 1)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(probs.size());
}

Breakdown breakdown(const std::vector<int>& outcomes, const std::vector<double>& trader,
                    const std::vector<double>& market_est) {
  check_same_size(outcomes.size(), trader.size(), "breakdown");
  check_same_size(outcomes.size(), market_est.size(), "breakdown");
  check_outcomes(outcomes);
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const bool won = outcomes[i] == 1;
    const bool trader_right = (trader[i] > 0.5) == won;
    const bool market_right = (market_est[i] > 0.5) == won;
    if (trader_right && market_right) {
      ++counts[0];
    } else if (!trader_right && !market_right) {
      ++counts[1];
    } else if (!trader_right) {
      ++counts[2];
    } else {
      ++counts[3];
    }
  }
  const double n = static_cast<double>(outcomes.size());
  return Breakdown{counts[0] / n, counts[1] / n, counts[2] / n, counts[3] / n};
}

std::vector<CalibrationBin> calibration_curve(const std::vector<int>& outcomes,
                                              const std::vector<double>& probs, int bins) {
  check_same_size(outcomes.size(), probs.size(), "calibration_curve");
  check_outcomes(outcomes);
  if (bins < 1) throw std::invalid_argument("calibration_curve: need at least one bin");
  std::vector<CalibrationBin> out(static_cast<std::size_t>(bins));
  std::vector<double> prob_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> hits(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)].lo = static_cast<double>(b) / bins;
    out[static_cast<std::size_t>(b)].hi = static_cast<double>(b + 1) / bins;
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::domain_error("calibration_curve: probabilities must lie in [0,1]");
    }
    int b = static_cast<int>(p * bins);
    if (b >= bins) b = bins - 1;
    auto& bin = out[static_cast<std::size_t>(b)];
    ++bin.count;
    prob_sum[static_cast<std::size_t>(b)] += p;
    hits[static_cast<std::size_t>(b)] += static_cast<std::size_t>(outcomes[i]);
  }
  for (int b = 0; b < bins; ++b) {
    auto& bin = out[static_cast<std::size_t>(b)];
    if (bin.count == 0) {
      bin.mean_prob = std::nan("");
      bin.emp_freq = std::nan("");
    } else {
      bin.mean_prob = prob_sum[static_cast<std::size_t>(b)] / static_cast<double>(bin.count);
      bin.emp_freq =
          static_cast<double>(hits[static_cast<std::size_t>(b)]) / static_cast<double>(bin.count);
    }
  }
  return out;
}

EstimatorReport estimator_report(const std::vector<market::EstimateTriple>& triples,
                                 const std::vector<int>& outcomes) {
  if (triples.empty() || triples.size() != outcomes.size()) {
    throw std::invalid_argument("estimator_report: triples and outcomes must match");
  }
  std::vector<double> r(triples.size()), m(triples.size()), t(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    r[i] = triples[i].r;
    m[i] = triples[i].m;
    t[i] = triples[i].t;
  }
  EstimatorReport rep;
  rep.mse = mse(r, t);
  const XentResult x = xent(outcomes, t);
  rep.xent = x.value;
  rep.clamped = x.clamped;
  double bias = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) bias += t[i] - r[i];
  rep.bias = bias / static_cast<double>(t.size());
  const std::vector<double> res_t = residuals(r, t);
  double cv = 0.0;
  for (double v : res_t) cv += v * v;
  rep.cond_variance = cv / static_cast<double>(res_t.size());
  rep.pearson_tm = pearson(t, m);
  rep.partial_corr_tm_given_r = partial_corr_tm_given_r(triples);
  rep.accuracy = accuracy(outcomes, t);
  return rep;
}

}  // namespace marketlab::metrics
