#pragma once
// Shared geometric primitives and label conventions.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spl {

using Vec = std::vector<double>;

// Binary label. Serialized as +1 / -1 everywhere.
enum class Label : int { Negative = -1, Positive = 1 };

inline int label_sign(Label l) { return static_cast<int>(l); }

inline Label label_from_sign(int s) {
  if (s == 1) return Label::Positive;
  if (s == -1) return Label::Negative;
  throw std::invalid_argument("label must be +1 or -1, got " + std::to_string(s));
}

// Relative tolerance for comparisons the math states as exact equalities.
inline constexpr double kEpsEq = 1e-9;

// |a - b| <= eps * max(1, |a|, |b|)
inline bool nearly_equal(double a, double b, double eps = kEpsEq) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= eps * scale;
}

// a <= b, allowing eps slack relative to the magnitudes involved
inline bool leq_with_slack(double a, double b, double eps = kEpsEq) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return a <= b + eps * scale;
}

void require_same_dim(const Vec& a, const Vec& b, const char* what);
void require_finite(const Vec& v, const char* what);

double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& v);
double norm(const Vec& v);
bool is_zero(const Vec& v);  // exact: every coordinate == 0

Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scaled(const Vec& v, double k);
void axpy(Vec& y, double a, const Vec& x);  // y += a*x

// sgn with sgn(0) = positive.
inline Label sign_predict(double value) {
  return value >= 0.0 ? Label::Positive : Label::Negative;
}

// x.w / |w|. Undefined for |w| = 0.
double normalized_margin(const Vec& w, const Vec& x);

struct Classifier {
  Vec w;
};

// Target separator with margin gamma = 1/|w_star|.
struct GroundTruth {
  Vec w_star;
  double gamma = 0.0;
};

GroundTruth make_ground_truth(Vec w_star);

// Movement budgets. alpha is the distance purchasable at cost 1; for the
// weighted per-coordinate model, alphas[i] == 0 encodes an unmovable
// coordinate (infinite cost).
struct L2Cost {
  double alpha = 0.0;
};

struct WeightedL1Cost {
  std::vector<double> alphas;
};

using CostModel = std::variant<L2Cost, WeightedL1Cost>;

double max_alpha(const CostModel& m);
void validate_cost_model(const CostModel& m, std::size_t dim);

}  // namespace spl
