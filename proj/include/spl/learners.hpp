#pragma once
// Online learners: the classic perceptron and the threshold-shifted variants
// that stay sound when the points they observe have been strategically moved.
// All states are plain values; steps mutate in place and report what happened.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spl/agents.hpp"
#include "spl/core.hpp"

namespace spl {

// Prediction convention while w = 0. PredictPositive is the default; the
// worked fixtures narrate runs that start all-negative instead.
enum class ZeroWeightPolicy { PredictPositive, PredictNegative };

enum class PhaseEvent { None, PhaseUp, PhaseDown };

// Test-only fault switches; every default-constructed learner runs clean.
struct FaultInjection {
  bool flip_surrogate_sign = false;
  bool skip_correction = false;
  bool zero_eta = false;
};

struct StepResult {
  Label prediction = Label::Positive;
  bool mistake = false;
  std::optional<Vec> update_point;  // the vector added/subtracted, when any
  PhaseEvent event = PhaseEvent::None;
  bool rationality_flag = false;  // observed point sat strictly inside the dead band
  std::optional<std::vector<double>> correction_mus;
  std::optional<double> eta;
};

// ---------------------------------------------------------------- classic --

struct ClassicState {
  Vec w;
  ZeroWeightPolicy zero_policy = ZeroWeightPolicy::PredictPositive;
};

DecisionRule classic_rule(const ClassicState& s);
StepResult classic_step(ClassicState& s, const Vec& x, Label truth);

// ---------------------------------------------------- shifted-threshold l2 --

struct L2State {
  Vec w;
  double alpha = 0.0;  // published distance budget; threshold sits at alpha
  ZeroWeightPolicy zero_policy = ZeroWeightPolicy::PredictPositive;
  FaultInjection faults;
};

DecisionRule l2_rule(const L2State& s);

// Undo the purchased move before updating: a negative observed exactly on the
// threshold is pulled back by alpha along w/|w|; everything else passes
// through. Points strictly inside (0, alpha) are impossible for rational
// agents; they pass through flagged. Requires |w| > 0.
Vec surrogate_l2(const Vec& x, const Vec& w, double alpha, Label truth,
                 bool* rationality_flag = nullptr, bool flip_sign = false);

StepResult strategic_l2_step(L2State& s, const Vec& x, Label truth);

// ------------------------------------------------------------- weighted l1 --

struct L1State {
  Vec w;
  std::vector<double> alphas;  // published per-coordinate budgets
  double R = 0.0;              // norm cap of the true points, sizes eta
  std::size_t dir_index = 0;   // coordinate whose budget sets the threshold
  bool dir_valid = false;      // false while w = 0
  ZeroWeightPolicy zero_policy = ZeroWeightPolicy::PredictPositive;
  FaultInjection faults;
};

DecisionRule l1_rule(const L1State& s);

// Zero out negative coordinates; returns the new w and the per-coordinate
// shifts mu_j = max(0, -w_j).
std::pair<Vec, std::vector<double>> correction_step(const Vec& w);

// eta = 1 / (4|w_pre| + 8(R + alpha_max) + 2), with |w_pre| taken before the
// observed point was added.
double tie_break_eta(double w_norm_pre, double R, double alpha_max);

// Pick i = argmax_j alphas[j]*w_j (lowest index on ties) and nudge w by
// eta*e_i so the argmax is strict. Returns (i, new w). Expects w != 0.
std::pair<std::size_t, Vec> tie_break(const Vec& w, std::span<const double> alphas,
                                      double eta);

// Pull an on-threshold negative back by alphas[i] along e_i.
Vec surrogate_l1(const Vec& x, const Vec& w, std::span<const double> alphas,
                 std::size_t dir_index, Label truth, bool flip_sign = false);

StepResult strategic_l1_step(L1State& s, const Vec& x, Label truth);

// ---------------------------------------------------------- unknown budget --

// Mistakes allowed per phase: floor(4*(R + alpha_guess + gamma/2)^2 / gamma^2).
long long mistake_budget(double R, double alpha_guess, double gamma);

// Doubling-then-bisection search over the budget estimate. The inner learner
// is the shifted-threshold l2 learner run with the current guess; a phase
// ends when its mistake budget overflows (guess too small: double it) or when
// an observed point sits strictly inside (0, guess) (guess too large: bisect
// toward the last known-small guess). Either event resets the inner weights.
struct UnknownCostState {
  double alpha_lo = 0.0;     // last guess known to be too small
  double alpha_guess = 0.0;  // currently published guess
  double R = 0.0;
  double gamma = 0.0;
  L2State inner;
  long long phase_mistakes = 0;
  long long phase_budget = 0;
  int phase_index = 0;
};

UnknownCostState make_unknown_cost_state(std::size_t dim, double R, double gamma,
                                         ZeroWeightPolicy zero_policy,
                                         FaultInjection faults = {});

StepResult unknown_cost_controller_step(UnknownCostState& s, const Vec& x, Label truth);

// Same search when only coordinate 1 is movable (finite budget on e_1,
// infinite elsewhere). Inner learner is the weighted-l1 learner pinned to
// direction e_1: correction kept, no tie-break needed.
struct UnknownL1State {
  Vec w;
  double alpha_lo = 0.0;
  double alpha_guess = 0.0;
  double R = 0.0;
  double gamma = 0.0;
  long long phase_mistakes = 0;
  long long phase_budget = 0;
  int phase_index = 0;
  ZeroWeightPolicy zero_policy = ZeroWeightPolicy::PredictPositive;
  FaultInjection faults;
};

UnknownL1State make_unknown_l1_state(std::size_t dim, double R, double gamma,
                                     ZeroWeightPolicy zero_policy,
                                     FaultInjection faults = {});

DecisionRule unknown_l1_rule(const UnknownL1State& s);
StepResult unknown_cost_l1_single_direction_step(UnknownL1State& s, const Vec& x,
                                                 Label truth);

}  // namespace spl
