#include "marketlab/returns.hpp"

#include <cassert>
#include <stdexcept>

namespace marketlab::returns {

namespace {

void check_prob(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in (0,1), got " + std::to_string(v));
  }
}

void check_price(double v, const char* name) {
  if (!(v > 0.0)) {
    throw std::domain_error(std::string(name) + " must be positive, got " + std::to_string(v));
  }
}

}  // namespace

double estimated_roi(double t, double price, Action action, market::Mode mode) {
  if (action == Action::abstain) {
    throw std::invalid_argument("estimated_roi: no ROI for an abstained trade");
  }
  if (mode == market::Mode::betting) {
    check_prob(t, "t");
    check_prob(price, "price");
    return action == Action::buy ? t / price - 1.0 : (1.0 - t) / price - 1.0;
  }
  check_price(t, "t");
  check_price(price, "price");
  return action == Action::buy ? (t - price) / price : (price - t) / price;
}

double true_roi_at_price(double r, double price, Action action, market::Mode mode) {
  if (action == Action::abstain) {
    throw std::invalid_argument("true_roi_at_price: no ROI for an abstained trade");
  }
  if (mode == market::Mode::betting) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw std::domain_error("r must lie in [0,1], got " + std::to_string(r));
    }
    check_prob(price, "price");
    return action == Action::buy ? r / price - 1.0 : (1.0 - r) / price - 1.0;
  }
  check_price(r, "r");
  check_price(price, "price");
  return action == Action::buy ? (r - price) / price : (price - r) / price;
}

double true_roi(double r, double m, Action action, market::Mode mode) {
  if (mode == market::Mode::betting) {
    check_prob(m, "m");
    return true_roi_at_price(r, action == Action::sell ? 1.0 - m : m, action, mode);
  }
  return true_roi_at_price(r, m, action, mode);
}

TradeDecision decide(double t, double price_alpha, double price_beta, market::Mode mode) {
  const double roi_alpha = estimated_roi(t, price_alpha, Action::buy, mode);
  const double roi_beta = estimated_roi(t, price_beta, Action::sell, mode);
  // Both sides positive would mean the book quotes a negative overround;
  // sanity-checked rather than handled.
  assert(!(roi_alpha > 0.0 && roi_beta > 0.0));
  TradeDecision d;
  if (roi_alpha >= roi_beta) {
    d.action = roi_alpha > 0.0 ? Action::buy : Action::abstain;
    d.estimated_roi = roi_alpha;
  } else {
    d.action = roi_beta > 0.0 ? Action::sell : Action::abstain;
    d.estimated_roi = roi_beta;
  }
  return d;
}

bool essentially_profitable(double r, double m, double t) noexcept {
  return (m < r && t > m) || (m > r && t < m);
}

OrderingClass classify_ordering(double r, double m, double t) noexcept {
  OrderingClass c;
  if (r == m || r == t || m == t) return c;  // degenerate: ties carry no signal
  if (r < t && t < m) {
    c.ordering = Ordering::r_t_m;
  } else if (r < m && m < t) {
    c.ordering = Ordering::r_m_t;
  } else if (t < r && r < m) {
    c.ordering = Ordering::t_r_m;
  } else if (t < m && m < r) {
    c.ordering = Ordering::t_m_r;
  } else if (m < t && t < r) {
    c.ordering = Ordering::m_t_r;
  } else {
    c.ordering = Ordering::m_r_t;
  }
  c.decision = t > m ? Action::buy : Action::sell;
  c.profitable = essentially_profitable(r, m, t);
  c.tendency = t > r ? KellyTendency::overbet : KellyTendency::underbet;
  return c;
}

std::string to_string(Ordering o) {
  switch (o) {
    case Ordering::r_t_m: return "r<t<m";
    case Ordering::r_m_t: return "r<m<t";
    case Ordering::t_r_m: return "t<r<m";
    case Ordering::t_m_r: return "t<m<r";
    case Ordering::m_t_r: return "m<t<r";
    case Ordering::m_r_t: return "m<r<t";
    case Ordering::degenerate: return "tie";
  }
  return "tie";
}

std::string to_string(Action a) {
  switch (a) {
    case Action::buy: return "buy";
    case Action::sell: return "sell";
    case Action::abstain: return "abstain";
  }
  return "abstain";
}

std::string to_string(KellyTendency k) {
  switch (k) {
    case KellyTendency::overbet: return "overbet";
    case KellyTendency::underbet: return "underbet";
    case KellyTendency::none: return "none";
  }
  return "none";
}

}  // namespace marketlab::returns
