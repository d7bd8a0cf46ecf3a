#pragma once

#include <string>

#include "marketlab/market.hpp"

namespace marketlab::returns {

/// Trader action on a two-way market.
enum class Action { buy, sell, abstain };

/// Decision for one opportunity: the chosen action and the estimated ROI of
/// the better side (nonpositive when abstaining).
struct TradeDecision {
  Action action = Action::abstain;
  double estimated_roi = 0.0;
};

/// The six strict orderings of (r, m, t), plus a degenerate class for ties.
enum class Ordering { r_t_m, r_m_t, t_r_m, t_m_r, m_t_r, m_r_t, degenerate };

/// Whether the trader's estimate overshoots or undershoots the true value.
enum class KellyTendency { overbet, underbet, none };

/// Full classification of a triple: ordering, implied decision, whether the
/// trade is profitable in expectation, and the Kelly stake tendency.
struct OrderingClass {
  Ordering ordering = Ordering::degenerate;
  Action decision = Action::abstain;
  bool profitable = false;
  KellyTendency tendency = KellyTendency::none;
};

/// ROI the trader expects from executing `action` at `price`, believing the
/// estimate t. Betting: buy pays t/price - 1, sell pays (1-t)/price - 1
/// (price is the executed side's quoted probability). Stock: buy pays
/// (t - price)/price, sell pays (price - t)/price.
/// Independent of r by construction; abstain is a contract violation.
double estimated_roi(double t, double price, Action action, market::Mode mode);

/// Expected ROI given the true value r at an explicit execution price
/// (margined quotes supply the executed side's price). Betting: buy pays
/// r/price - 1, sell pays (1-r)/price - 1. Stock: buy (r - price)/price,
/// sell (price - r)/price. Independent of t.
double true_roi_at_price(double r, double price, Action action, market::Mode mode);

/// Expected ROI given the true value at fair prices derived from m: betting
/// buy executes at m and sell at 1 - m; stock trades at m on both sides.
double true_roi(double r, double m, Action action, market::Mode mode);

/// Pick the side with the larger estimated ROI when it is strictly positive,
/// abstain otherwise (ties at zero margin mean t == price and abstain).
/// price_alpha / price_beta are the executed prices of the two sides (for a
/// fair betting market: m and 1 - m).
TradeDecision decide(double t, double price_alpha, double price_beta, market::Mode mode);

/// Definition of an essentially profitable configuration: the trader is on
/// the correct side of the market price (m < r and t > m, or m > r and
/// t < m).
bool essentially_profitable(double r, double m, double t) noexcept;

/// Classify a triple into its ordering row. Any tie lands in the degenerate
/// class with no decision and no tendency. For strict orderings the decision
/// is buy iff t > m, the trade is profitable iff the decision sides with the
/// true value (sell when m > r, buy when m < r), and the Kelly tendency is
/// overbet iff t > r.
OrderingClass classify_ordering(double r, double m, double t) noexcept;

/// Stable text labels used in CSV dumps.
std::string to_string(Ordering o);
std::string to_string(Action a);
std::string to_string(KellyTendency k);

/// Per-bet accounting record produced by round evaluation.
struct ReturnRecord {
  TradeDecision decision;
  double true_expected_roi = 0.0;
  double stake = 0.0;
  double realized_profit = 0.0;
};

}  // namespace marketlab::returns
