#include "spl/core.hpp"

#include <algorithm>

namespace spl {

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

void require_finite(const Vec& v, const char* what) {
  for (double c : v) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
    }
  }
}

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const Vec& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return s;
}

double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

bool is_zero(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
}

Vec add(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "add");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vec sub(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "sub");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec scaled(const Vec& v, double k) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = k * v[i];
  return r;
}

void axpy(Vec& y, double a, const Vec& x) {
  require_same_dim(y, x, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double normalized_margin(const Vec& w, const Vec& x) {
  const double n = norm(w);
  if (n == 0.0) throw std::domain_error("normalized_margin: zero-norm weight vector");
  return dot(x, w) / n;
}

GroundTruth make_ground_truth(Vec w_star) {
  const double n = norm(w_star);
  if (n == 0.0) throw std::invalid_argument("ground truth separator must be nonzero");
  return GroundTruth{std::move(w_star), 1.0 / n};
}

double max_alpha(const CostModel& m) {
  if (const auto* l2 = std::get_if<L2Cost>(&m)) return l2->alpha;
  const auto& as = std::get<WeightedL1Cost>(m).alphas;
  double mx = 0.0;
  for (double a : as) mx = std::max(mx, a);
  return mx;
}

void validate_cost_model(const CostModel& m, std::size_t dim) {
  if (const auto* l2 = std::get_if<L2Cost>(&m)) {
    if (!(l2->alpha >= 0.0) || !std::isfinite(l2->alpha)) {
      throw std::invalid_argument("alpha must be finite and >= 0");
    }
    return;
  }
  const auto& as = std::get<WeightedL1Cost>(m).alphas;
  if (as.size() != dim) {
    throw std::invalid_argument("per-coordinate budgets: expected " +
                                std::to_string(dim) + " entries, got " +
                                std::to_string(as.size()));
  }
  for (double a : as) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("per-coordinate budgets must be finite and >= 0");
    }
  }
}

}  // namespace spl
