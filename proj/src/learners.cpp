#include "spl/learners.hpp"

#include <algorithm>
#include <cmath>

namespace spl {

namespace {

// Strictly inside the dead band (0, alpha) of normalized margin, with kEpsEq
// slack on both edges. Same predicate as inside_margin_band, kept in terms of
// the raw weight vector for the surrogate path.
bool in_dead_band(const Vec& w, double w_norm, const Vec& x, double alpha) {
  if (w_norm == 0.0) return false;
  const double m = dot(x, w) / w_norm;
  return m > kEpsEq && m < alpha - kEpsEq;
}

}  // namespace

// ---------------------------------------------------------------- classic --

DecisionRule classic_rule(const ClassicState& s) {
  return DecisionRule::make(s.w, 0.0, s.zero_policy == ZeroWeightPolicy::PredictPositive);
}

StepResult classic_step(ClassicState& s, const Vec& x, Label truth) {
  require_same_dim(s.w, x, "classic_step");
  StepResult out;
  out.prediction = classic_rule(s).predict(x);
  out.mistake = out.prediction != truth;
  if (out.mistake) {
    axpy(s.w, label_sign(truth), x);
    out.update_point = x;
  }
  return out;
}

// ---------------------------------------------------- shifted-threshold l2 --

DecisionRule l2_rule(const L2State& s) {
  return DecisionRule::make(s.w, s.alpha * norm(s.w),
                            s.zero_policy == ZeroWeightPolicy::PredictPositive);
}

Vec surrogate_l2(const Vec& x, const Vec& w, double alpha, Label truth,
                 bool* rationality_flag, bool flip_sign) {
  const double n = norm(w);
  if (n == 0.0) throw std::domain_error("surrogate_l2: zero-norm weight vector");
  const double raw = dot(x, w);
  const double raw_threshold = alpha * n;
  if (truth == Label::Negative && nearly_equal(raw, raw_threshold)) {
    // on-threshold negative: it bought its way here, take the move back
    const double k = (flip_sign ? 1.0 : -1.0) * (alpha / n);
    Vec xt = x;
    axpy(xt, k, w);
    return xt;
  }
  if (rationality_flag != nullptr && in_dead_band(w, n, x, alpha)) {
    // no utility-maximizing agent stops strictly inside (0, alpha)
    *rationality_flag = true;
  }
  return x;
}

StepResult strategic_l2_step(L2State& s, const Vec& x, Label truth) {
  require_same_dim(s.w, x, "strategic_l2_step");
  StepResult out;
  out.prediction = l2_rule(s).predict(x);
  out.mistake = out.prediction != truth;
  if (!out.mistake) return out;
  Vec xt;
  if (is_zero(s.w)) {
    xt = x;
  } else {
    xt = surrogate_l2(x, s.w, s.alpha, truth, &out.rationality_flag,
                      s.faults.flip_surrogate_sign);
  }
  axpy(s.w, label_sign(truth), xt);
  out.update_point = std::move(xt);
  return out;
}

// ------------------------------------------------------------- weighted l1 --

DecisionRule l1_rule(const L1State& s) {
  const double raw = s.dir_valid ? s.alphas[s.dir_index] * s.w[s.dir_index] : 0.0;
  return DecisionRule::make(s.w, raw, s.zero_policy == ZeroWeightPolicy::PredictPositive);
}

std::pair<Vec, std::vector<double>> correction_step(const Vec& w) {
  Vec wc(w.size());
  std::vector<double> mus(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    mus[j] = std::max(0.0, -w[j]);
    wc[j] = std::max(0.0, w[j]);
  }
  return {std::move(wc), std::move(mus)};
}

double tie_break_eta(double w_norm_pre, double R, double alpha_max) {
  return 1.0 / (4.0 * w_norm_pre + 8.0 * (R + alpha_max) + 2.0);
}

std::pair<std::size_t, Vec> tie_break(const Vec& w, std::span<const double> alphas,
                                      double eta) {
  if (w.empty() || alphas.size() != w.size()) {
    throw std::invalid_argument("tie_break: bad dimensions");
  }
  std::size_t i = 0;
  double best = alphas[0] * w[0];
  for (std::size_t j = 1; j < w.size(); ++j) {
    const double v = alphas[j] * w[j];
    if (v > best) {  // strict: ties resolve to the lowest index
      best = v;
      i = j;
    }
  }
  Vec wn = w;
  wn[i] += eta;
  return {i, std::move(wn)};
}

Vec surrogate_l1(const Vec& x, const Vec& w, std::span<const double> alphas,
                 std::size_t dir_index, Label truth, bool flip_sign) {
  if (dir_index >= w.size()) throw std::invalid_argument("surrogate_l1: bad direction");
  const double raw = dot(x, w);
  const double raw_threshold = alphas[dir_index] * w[dir_index];
  Vec xt = x;
  if (truth == Label::Negative && nearly_equal(raw, raw_threshold)) {
    xt[dir_index] += (flip_sign ? 1.0 : -1.0) * alphas[dir_index];
  }
  return xt;
}

StepResult strategic_l1_step(L1State& s, const Vec& x, Label truth) {
  require_same_dim(s.w, x, "strategic_l1_step");
  if (s.alphas.size() != s.w.size()) {
    throw std::invalid_argument("strategic_l1_step: budget vector dimension mismatch");
  }
  StepResult out;
  out.prediction = l1_rule(s).predict(x);
  out.mistake = out.prediction != truth;
  if (!out.mistake) return out;

  const double w_norm_pre = norm(s.w);
  Vec xt;
  if (is_zero(s.w)) {
    xt = x;
  } else {
    xt = surrogate_l1(x, s.w, s.alphas, s.dir_index, truth,
                      s.faults.flip_surrogate_sign);
  }
  axpy(s.w, label_sign(truth), xt);
  out.update_point = std::move(xt);

  if (!s.faults.skip_correction) {
    auto [wc, mus] = correction_step(s.w);
    s.w = std::move(wc);
    out.correction_mus = std::move(mus);
  }

  if (is_zero(s.w)) {
    // fully corrected away: back to the startup prediction mode
    s.dir_valid = false;
    return out;
  }
  const double amax = *std::max_element(s.alphas.begin(), s.alphas.end());
  const double eta = s.faults.zero_eta ? 0.0 : tie_break_eta(w_norm_pre, s.R, amax);
  auto [i, wn] = tie_break(s.w, s.alphas, eta);
  s.w = std::move(wn);
  s.dir_index = i;
  s.dir_valid = true;
  out.eta = eta;
  return out;
}

// ---------------------------------------------------------- unknown budget --

long long mistake_budget(double R, double alpha_guess, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mistake_budget: gamma must be > 0");
  const double s = R + alpha_guess + gamma / 2.0;
  return static_cast<long long>(std::floor(4.0 * s * s / (gamma * gamma)));
}

UnknownCostState make_unknown_cost_state(std::size_t dim, double R, double gamma,
                                         ZeroWeightPolicy zero_policy,
                                         FaultInjection faults) {
  if (dim == 0) throw std::invalid_argument("unknown-cost learner needs dim >= 1");
  if (!(R > 0.0)) throw std::invalid_argument("unknown-cost learner needs R > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("unknown-cost learner needs gamma > 0");
  UnknownCostState s;
  s.R = R;
  s.gamma = gamma;
  s.inner = L2State{Vec(dim, 0.0), 0.0, zero_policy, faults};
  s.phase_budget = mistake_budget(R, 0.0, gamma);
  return s;
}

namespace {

void reset_unknown_phase(UnknownCostState& s) {
  std::fill(s.inner.w.begin(), s.inner.w.end(), 0.0);
  s.inner.alpha = s.alpha_guess;
  s.phase_mistakes = 0;
  s.phase_budget = mistake_budget(s.R, s.alpha_guess, s.gamma);
  ++s.phase_index;
}

}  // namespace

StepResult unknown_cost_controller_step(UnknownCostState& s, const Vec& x, Label truth) {
  const DecisionRule rule = l2_rule(s.inner);
  if (inside_margin_band(rule, x, s.alpha_guess)) {
    // guess too large: this margin is unreachable for rational agents when
    // alpha_guess <= alpha. Bisect down and restart; no weight update here.
    StepResult out;
    out.prediction = rule.predict(x);
    out.mistake = out.prediction != truth;
    s.alpha_guess = 0.5 * (s.alpha_lo + s.alpha_guess);
    reset_unknown_phase(s);
    out.event = PhaseEvent::PhaseDown;
    return out;
  }
  StepResult out = strategic_l2_step(s.inner, x, truth);
  if (out.mistake && ++s.phase_mistakes > s.phase_budget) {
    // guess too small: the estimate lags alpha by more than gamma/2
    s.alpha_lo = s.alpha_guess;
    s.alpha_guess = std::min(std::max(2.0 * s.alpha_guess, s.gamma / 2.0), s.R);
    reset_unknown_phase(s);
    out.event = PhaseEvent::PhaseUp;
  }
  return out;
}

UnknownL1State make_unknown_l1_state(std::size_t dim, double R, double gamma,
                                     ZeroWeightPolicy zero_policy,
                                     FaultInjection faults) {
  if (dim == 0) throw std::invalid_argument("unknown-l1 learner needs dim >= 1");
  if (!(R > 0.0)) throw std::invalid_argument("unknown-l1 learner needs R > 0");
  if (!(gamma > 0.0)) throw std::invalid_argument("unknown-l1 learner needs gamma > 0");
  UnknownL1State s;
  s.w = Vec(dim, 0.0);
  s.R = R;
  s.gamma = gamma;
  s.zero_policy = zero_policy;
  s.faults = faults;
  s.phase_budget = mistake_budget(R, 0.0, gamma);
  return s;
}

DecisionRule unknown_l1_rule(const UnknownL1State& s) {
  return DecisionRule::make(s.w, s.alpha_guess * s.w[0],
                            s.zero_policy == ZeroWeightPolicy::PredictPositive);
}

namespace {

void reset_unknown_l1_phase(UnknownL1State& s) {
  std::fill(s.w.begin(), s.w.end(), 0.0);
  s.phase_mistakes = 0;
  s.phase_budget = mistake_budget(s.R, s.alpha_guess, s.gamma);
  ++s.phase_index;
}

}  // namespace

StepResult unknown_cost_l1_single_direction_step(UnknownL1State& s, const Vec& x,
                                                 Label truth) {
  require_same_dim(s.w, x, "unknown_cost_l1_single_direction_step");
  const DecisionRule rule = unknown_l1_rule(s);
  // with w.e_1 = 0 the published threshold is 0 and the band is empty
  if (s.w[0] > 0.0 && inside_margin_band(rule, x, rule.threshold())) {
    StepResult out;
    out.prediction = rule.predict(x);
    out.mistake = out.prediction != truth;
    s.alpha_guess = 0.5 * (s.alpha_lo + s.alpha_guess);
    reset_unknown_l1_phase(s);
    out.event = PhaseEvent::PhaseDown;
    return out;
  }
  StepResult out;
  out.prediction = rule.predict(x);
  out.mistake = out.prediction != truth;
  if (!out.mistake) return out;

  Vec xt;
  if (is_zero(s.w)) {
    xt = x;
  } else {
    const double raw = dot(x, s.w);
    const double raw_threshold = s.alpha_guess * s.w[0];
    xt = x;
    if (truth == Label::Negative && nearly_equal(raw, raw_threshold)) {
      xt[0] += (s.faults.flip_surrogate_sign ? 1.0 : -1.0) * s.alpha_guess;
    }
  }
  axpy(s.w, label_sign(truth), xt);
  out.update_point = std::move(xt);
  if (!s.faults.skip_correction) {
    auto [wc, mus] = correction_step(s.w);
    s.w = std::move(wc);
    out.correction_mus = std::move(mus);
  }
  if (++s.phase_mistakes > s.phase_budget) {
    s.alpha_lo = s.alpha_guess;
    s.alpha_guess = std::min(std::max(2.0 * s.alpha_guess, s.gamma / 2.0), s.R);
    reset_unknown_l1_phase(s);
    out.event = PhaseEvent::PhaseUp;
  }
  return out;
}

}  // namespace spl
