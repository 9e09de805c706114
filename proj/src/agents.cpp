#include "spl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Walk forward along `unit` from z until the landing classifies positive
// under the exact predicate; absorbs the rounding of dot products so that a
// purchased move is never wasted on a 1-ulp shortfall.
std::pair<Vec, double> land_along(const Vec& z, const Vec& unit, double t,
                                  const DecisionRule& rule) {
  Vec x = z;
  axpy(x, t, unit);
  const double du = dot(unit, rule.w);
  for (int i = 0; i < 32 && dot(x, rule.w) < rule.raw_threshold; ++i) {
    const double shortfall = rule.raw_threshold - dot(x, rule.w);
    double t2 = (du > 0.0) ? t + shortfall / du : t;
    if (t2 <= t) t2 = std::nextafter(t, kInf);
    t = t2;
    x = z;
    axpy(x, t, unit);
  }
  return {std::move(x), t};
}

std::pair<Vec, double> land_on_axis(const Vec& z, std::size_t j, double sign,
                                    double t, const DecisionRule& rule) {
  Vec x = z;
  x[j] = z[j] + sign * t;
  const double du = sign * rule.w[j];
  for (int i = 0; i < 32 && dot(x, rule.w) < rule.raw_threshold; ++i) {
    const double shortfall = rule.raw_threshold - dot(x, rule.w);
    double t2 = (du > 0.0) ? t + shortfall / du : t;
    if (t2 <= t) t2 = std::nextafter(t, kInf);
    t = t2;
    x[j] = z[j] + sign * t;
  }
  return {std::move(x), t};
}

}  // namespace

DecisionRule DecisionRule::make(Vec w, double raw_threshold, bool zero_positive) {
  DecisionRule r;
  r.w_norm = norm(w);
  r.w = std::move(w);
  r.raw_threshold = raw_threshold;
  r.zero_positive = zero_positive;
  return r;
}

double DecisionRule::threshold() const {
  return w_norm == 0.0 ? 0.0 : raw_threshold / w_norm;
}

Label DecisionRule::predict(const Vec& x) const {
  if (is_zero()) return zero_positive ? Label::Positive : Label::Negative;
  return sign_predict(dot(x, w) - raw_threshold);
}

bool inside_margin_band(const DecisionRule& rule, const Vec& x, double alpha) {
  if (rule.is_zero()) return false;
  const double m = dot(x, rule.w) / rule.w_norm;
  return m > kEpsEq && m < alpha - kEpsEq;
}

Manipulation best_response_l2(const Vec& z, const DecisionRule& rule,
                              double alpha_true) {
  if (!(alpha_true >= 0.0)) throw std::invalid_argument("alpha_true must be >= 0");
  Manipulation m;
  m.x = z;
  if (rule.is_zero()) return m;  // the prediction cannot be changed by moving
  require_same_dim(z, rule.w, "best_response_l2");
  const double gap_raw = rule.raw_threshold - dot(z, rule.w);
  if (gap_raw <= 0.0) return m;  // already classified positive
  const double beta = gap_raw / rule.w_norm;
  if (beta > alpha_true) return m;  // flipping costs more than 1
  const Vec unit = scaled(rule.w, 1.0 / rule.w_norm);
  auto [x, t] = land_along(z, unit, beta, rule);
  m.x = std::move(x);
  m.moved = true;
  m.distance = t;
  m.cost = t / alpha_true;
  m.direction = unit;
  return m;
}

Manipulation best_response_weighted_l1(const Vec& z, const DecisionRule& rule,
                                       std::span<const double> alphas_true) {
  Manipulation m;
  m.x = z;
  if (rule.is_zero()) return m;
  require_same_dim(z, rule.w, "best_response_weighted_l1");
  if (alphas_true.size() != z.size()) {
    throw std::invalid_argument("best_response_weighted_l1: budget vector dimension mismatch");
  }
  const double gap_raw = rule.raw_threshold - dot(z, rule.w);
  if (gap_raw <= 0.0) return m;
  // gain per unit cost along +/- e_j is alphas[j]*|w_j|; lowest index wins ties
  std::size_t best_j = 0;
  double best_gain = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (!(alphas_true[j] >= 0.0)) throw std::invalid_argument("budgets must be >= 0");
    const double gain = alphas_true[j] * std::abs(rule.w[j]);
    if (gain > best_gain) {
      best_gain = gain;
      best_j = j;
    }
  }
  if (best_gain == 0.0) return m;  // no affordable direction moves the margin
  const double wj = rule.w[best_j];
  const double sign = wj > 0.0 ? 1.0 : -1.0;
  const double delta = gap_raw / std::abs(wj);
  if (delta > alphas_true[best_j]) return m;
  auto [x, t] = land_on_axis(z, best_j, sign, delta, rule);
  m.x = std::move(x);
  m.moved = true;
  m.distance = t;
  m.cost = t / alphas_true[best_j];
  m.direction = Vec(z.size(), 0.0);
  m.direction[best_j] = sign;
  m.coord = static_cast<int>(best_j);
  return m;
}

double manipulation_cost(const CostModel& model, const Vec& z, const Vec& x) {
  require_same_dim(z, x, "manipulation_cost");
  if (const auto* l2 = std::get_if<L2Cost>(&model)) {
    double ssq = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double d = x[i] - z[i];
      ssq += d * d;
    }
    if (ssq == 0.0) return 0.0;
    return l2->alpha > 0.0 ? std::sqrt(ssq) / l2->alpha : kInf;
  }
  const auto& as = std::get<WeightedL1Cost>(model).alphas;
  if (as.size() != z.size()) {
    throw std::invalid_argument("manipulation_cost: budget vector dimension mismatch");
  }
  double c = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = std::abs(x[i] - z[i]);
    if (d == 0.0) continue;
    if (as[i] <= 0.0) return kInf;
    c += d / as[i];
  }
  return c;
}

double agent_utility(const DecisionRule& rule, const CostModel& model,
                     const Vec& z, const Vec& x) {
  const double gain = rule.predict(x) == Label::Positive ? 1.0 : 0.0;
  return gain - manipulation_cost(model, z, x);
}

Vec brute_force_best_response(const Vec& z, const DecisionRule& rule,
                              const CostModel& model, double grid_step,
                              double grid_radius) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be > 0");
  if (!(grid_radius >= 0.0)) throw std::invalid_argument("grid_radius must be >= 0");
  const std::size_t d = z.size();
  const long long half = static_cast<long long>(std::floor(grid_radius / grid_step));
  const double per_dim = static_cast<double>(2 * half + 1);
  if (std::pow(per_dim, static_cast<double>(d)) > 1e7) {
    throw std::invalid_argument("brute_force_best_response: grid exceeds 1e7 candidates");
  }

  Vec best = z;
  double best_u = agent_utility(rule, model, z, z);
  auto consider = [&](const Vec& c) {
    const double u = agent_utility(rule, model, z, c);
    if (u > best_u) {  // strict: ties keep the earlier (less-moved) candidate
      best_u = u;
      best = c;
    }
  };

  // Exact threshold projections; the grid alone almost never hits the
  // hyperplane, and the optimum lies exactly on it.
  if (!rule.is_zero()) {
    const double gap_raw = rule.raw_threshold - dot(z, rule.w);
    if (gap_raw > 0.0) {
      const Vec unit = scaled(rule.w, 1.0 / rule.w_norm);
      consider(land_along(z, unit, gap_raw / rule.w_norm, rule).first);
      for (std::size_t j = 0; j < d; ++j) {
        if (rule.w[j] == 0.0) continue;
        const double sign = rule.w[j] > 0.0 ? 1.0 : -1.0;
        consider(land_on_axis(z, j, sign, gap_raw / std::abs(rule.w[j]), rule).first);
      }
    }
  }

  const L2Cost* l2 = std::get_if<L2Cost>(&model);
  const WeightedL1Cost* l1 = std::get_if<WeightedL1Cost>(&model);
  if (l1 && l1->alphas.size() != d) {
    throw std::invalid_argument("brute_force_best_response: budget vector dimension mismatch");
  }

  std::vector<long long> idx(d, -half);
  Vec c(d);
  while (true) {
    double cost = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = z[i] + static_cast<double>(idx[i]) * grid_step;
      const double di = std::abs(c[i] - z[i]);
      if (l2) {
        cost += di * di;
      } else if (di > 0.0) {
        cost = l1->alphas[i] > 0.0 ? cost + di / l1->alphas[i] : kInf;
      }
    }
    if (l2) cost = l2->alpha > 0.0 ? std::sqrt(cost) / l2->alpha : (cost == 0.0 ? 0.0 : kInf);
    // a destination costing more than 1 can never beat staying put
    if (cost <= 1.0 + 1e-12) {
      const double u = (rule.predict(c) == Label::Positive ? 1.0 : 0.0) - cost;
      if (u > best_u) {
        best_u = u;
        best = c;
      }
    }
    std::size_t k = 0;
    while (k < d && ++idx[k] > half) idx[k++] = -half;
    if (k == d) break;
  }
  return best;
}

}  // namespace spl
