#pragma once
// Agent-side model: the published decision rule and utility-maximizing
// responses to it. An agent moves only when doing so flips it to positive at
// cost <= 1, and moving at cost exactly 1 is still worth it.

#include <cstddef>
#include <span>

#include "spl/core.hpp"

namespace spl {

// Halfspace rule published to agents: positive iff x.w >= raw_threshold
// (normalized form: x.w/|w| >= raw_threshold/|w|). While w = 0 the rule
// degenerates to a constant prediction given by zero_positive.
struct DecisionRule {
  Vec w;
  double raw_threshold = 0.0;
  bool zero_positive = true;
  double w_norm = 0.0;

  static DecisionRule make(Vec w, double raw_threshold, bool zero_positive = true);

  bool is_zero() const { return w_norm == 0.0; }
  double threshold() const;  // raw_threshold / |w|; 0 while w = 0
  Label predict(const Vec& x) const;
};

// Margin band (0, alpha) that rational agents vacate: strictly inside, with
// kEpsEq slack on both edges so on-threshold landings never count.
bool inside_margin_band(const DecisionRule& rule, const Vec& x, double alpha);

struct Manipulation {
  Vec x;                // observed point (== z when not moved)
  bool moved = false;
  double distance = 0.0;  // geometric distance traveled
  double cost = 0.0;
  Vec direction;          // unit movement direction (empty when not moved)
  int coord = -1;         // coordinate moved along, -1 for non-axis moves
};

// Best response under distance-for-cost budget alpha_true: move straight
// toward the hyperplane iff the required distance is <= alpha_true, landing
// exactly on the threshold.
Manipulation best_response_l2(const Vec& z, const DecisionRule& rule, double alpha_true);

// Best response when movement along e_j costs 1/alphas[j] per unit
// (alphas[j] = 0: unmovable coordinate). The agent picks the signed axis
// maximizing gain-per-cost alphas[j]*|w_j| (lowest index on ties) and moves
// iff the landing is affordable.
Manipulation best_response_weighted_l1(const Vec& z, const DecisionRule& rule,
                                       std::span<const double> alphas_true);

// Cost of moving z to x under the model; +infinity when unaffordable at any
// price (movement on a zero-budget coordinate).
double manipulation_cost(const CostModel& model, const Vec& z, const Vec& x);

// Grid-search oracle: best utility destination among z, the exact threshold
// projections, and all grid offsets within grid_radius (axis-aligned box,
// step grid_step). Ties favor zero movement. Refuses grids above 1e7 points.
Vec brute_force_best_response(const Vec& z, const DecisionRule& rule,
                              const CostModel& model, double grid_step,
                              double grid_radius);

// Utility of claiming destination x: 1 if classified positive, minus cost.
double agent_utility(const DecisionRule& rule, const CostModel& model,
                     const Vec& z, const Vec& x);

}  // namespace spl
