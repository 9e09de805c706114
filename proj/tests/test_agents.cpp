#include "doctest.h"

#include <cmath>
#include <limits>

#include "spl/agents.hpp"

using namespace spl;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("decision rule basics") {
  const DecisionRule r = DecisionRule::make({3.0, 4.0}, 10.0);
  CHECK(r.w_norm == 5.0);
  CHECK(r.threshold() == doctest::Approx(2.0));
  CHECK(r.predict({2.0, 1.0}) == Label::Positive);   // margin 2.0, on threshold
  CHECK(r.predict({2.0, 0.9}) == Label::Negative);
  CHECK_FALSE(r.is_zero());

  const DecisionRule all_pos = DecisionRule::make({0.0, 0.0}, 0.0, true);
  CHECK(all_pos.is_zero());
  CHECK(all_pos.predict({-100.0, 0.0}) == Label::Positive);
  const DecisionRule all_neg = DecisionRule::make({0.0, 0.0}, 0.0, false);
  CHECK(all_neg.predict({100.0, 0.0}) == Label::Negative);
}

TEST_CASE("margin band is strict on both edges") {
  const DecisionRule r = DecisionRule::make({2.0, 0.0}, 2.0);  // threshold 1
  CHECK(inside_margin_band(r, {0.5, 3.0}, 1.0));
  CHECK_FALSE(inside_margin_band(r, {0.0, 1.0}, 1.0));   // on the zero edge
  CHECK_FALSE(inside_margin_band(r, {1.0, -2.0}, 1.0));  // on the threshold
  CHECK_FALSE(inside_margin_band(r, {-0.1, 0.0}, 1.0));
  CHECK_FALSE(inside_margin_band(r, {0.5, 0.0}, 0.0));   // empty band
}

TEST_CASE("l2 best response lands on the threshold") {
  // the fixture's C point: budget 0.5, threshold 0
  const DecisionRule r = DecisionRule::make({1.0, 0.0}, 0.0);
  const Manipulation m = best_response_l2({-0.5, -1.0}, r, 0.5);
  CHECK(m.moved);
  CHECK(m.x == Vec{0.0, -1.0});
  CHECK(m.distance == doctest::Approx(0.5));
  CHECK(m.cost == doctest::Approx(1.0));  // cost exactly 1 still moves

  // already positive: stays put
  const Manipulation still = best_response_l2({2.0, 5.0}, r, 0.5);
  CHECK_FALSE(still.moved);
  CHECK(still.x == Vec{2.0, 5.0});
  CHECK(still.cost == 0.0);

  // out of budget: gap 1.5 > alpha 1
  const DecisionRule r2 = DecisionRule::make({0.0, 1.0}, 1.0);
  const Manipulation far = best_response_l2({0.0, -0.5}, r2, 1.0);
  CHECK_FALSE(far.moved);

  CHECK_THROWS_AS(best_response_l2({0.0, 0.0}, r, -1.0), std::invalid_argument);
}

TEST_CASE("l2 best response ignores a zero rule") {
  const DecisionRule zero = DecisionRule::make({0.0, 0.0}, 0.0, true);
  CHECK_FALSE(best_response_l2({-5.0, 0.0}, zero, 10.0).moved);
}

TEST_CASE("weighted best response moves along one paid axis") {
  // alphas (2,1), w (1,1): raw threshold 2 puts the normalized cut at sqrt(2)
  const DecisionRule r = DecisionRule::make({1.0, 1.0}, 2.0);
  const std::vector<double> alphas = {2.0, 1.0};

  const Manipulation m = best_response_weighted_l1({0.0, 0.0}, r, alphas);
  CHECK(m.moved);
  CHECK(m.x == Vec{2.0, 0.0});
  CHECK(m.coord == 0);
  CHECK(m.cost == doctest::Approx(1.0));

  // same geometry, too far: distance 4 > alpha_0
  const Manipulation far = best_response_weighted_l1({-1.0, -1.0}, r, alphas);
  CHECK_FALSE(far.moved);

  // unmovable best coordinate falls back to the next one
  const std::vector<double> only_second = {0.0, 1.5};
  const Manipulation second = best_response_weighted_l1({0.0, 0.5}, r, only_second);
  CHECK(second.moved);
  CHECK(second.coord == 1);
  CHECK(second.x[0] == 0.0);
  CHECK(second.x[1] == doctest::Approx(2.0));

  // negative weight coordinate: the paid move decreases that coordinate
  const DecisionRule neg = DecisionRule::make({-1.0, 0.0}, 1.0);
  const std::vector<double> twos = {2.0, 2.0};
  const Manipulation down = best_response_weighted_l1({0.5, 0.0}, neg, twos);
  CHECK(down.moved);
  CHECK(down.x[0] < 0.0);
  CHECK(down.x[0] * -1.0 == doctest::Approx(1.0));  // lands on raw threshold
}

TEST_CASE("manipulation cost per model") {
  CHECK(manipulation_cost(L2Cost{0.5}, {-0.5, -1.0}, {0.0, -1.0}) == doctest::Approx(1.0));
  CHECK(manipulation_cost(L2Cost{0.5}, {1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(manipulation_cost(WeightedL1Cost{{2.0, 1.0}}, {0.0, 0.0}, {2.0, 0.0}) ==
        doctest::Approx(1.0));
  CHECK(manipulation_cost(WeightedL1Cost{{2.0, 0.0}}, {0.0, 0.0}, {0.0, 0.1}) == kInf);
  CHECK(manipulation_cost(WeightedL1Cost{{2.0, 0.0}}, {0.0, 3.0}, {1.0, 3.0}) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(manipulation_cost(L2Cost{1.0}, {0.0}, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("utility is positive-classification value minus cost") {
  const DecisionRule r = DecisionRule::make({1.0, 0.0}, 1.0);
  CHECK(agent_utility(r, L2Cost{1.0}, {0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(agent_utility(r, L2Cost{2.0}, {0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(agent_utility(r, L2Cost{2.0}, {0.0, 0.0}, {0.5, 0.0}) == doctest::Approx(-0.25));
}

TEST_CASE("grid oracle agrees with the closed-form responders") {
  const DecisionRule r = DecisionRule::make({1.0, 0.0}, 0.0);
  const CostModel l2 = L2Cost{0.5};
  const Vec z = {-0.5, -1.0};
  const Manipulation m = best_response_l2(z, r, 0.5);
  const Vec o = brute_force_best_response(z, r, l2, 0.5 / 200.0, 0.55);
  // cost here is exactly 1, so staying and moving tie at utility 0; the
  // oracle prefers staying, the agent moves. Utilities must agree.
  CHECK(agent_utility(r, l2, z, m.x) == doctest::Approx(agent_utility(r, l2, z, o)));

  const DecisionRule rw = DecisionRule::make({1.0, 1.0}, 2.0);
  const CostModel l1 = WeightedL1Cost{{2.0, 1.0}};
  const Vec z2 = {0.5, 0.25};
  const std::vector<double> budgets = {2.0, 1.0};
  const Manipulation m2 = best_response_weighted_l1(z2, rw, budgets);
  const Vec o2 = brute_force_best_response(z2, rw, l1, 2.0 / 200.0, 2.1);
  CHECK(agent_utility(rw, l1, z2, m2.x) ==
        doctest::Approx(agent_utility(rw, l1, z2, o2)).epsilon(1e-6));

  CHECK_THROWS_AS(brute_force_best_response(z, r, l2, 1e-9, 1.0), std::invalid_argument);
}
