#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ncwait/mdp_solver.hpp"
#include "ncwait/threshold_analytics.hpp"

namespace ncwait {
namespace {

double prop1_bound(QState s, const RelayParams& p, double beta) {
  return (p.c_hold * (std::max(s.q1() - 1, 0) + std::max(s.q2() - 1, 0)) + p.c_transmit) / (1.0 - beta);
}

TEST(TruncatedSpace, StateCountByEnumeration) {
  EXPECT_EQ(TruncatedSpace(0).size(), 1u);
  for (int cap = 1; cap <= 12; ++cap) {
    std::size_t brute = 0;
    for (int i = 0; i <= cap; ++i) {
      for (int j = 0; j <= cap; ++j) brute += std::min(i, j) <= 1 ? 1 : 0;
    }
    const TruncatedSpace space(cap);
    EXPECT_EQ(space.size(), brute);
    EXPECT_EQ(space.size(), static_cast<std::size_t>(4 * cap));
    for (std::size_t k = 0; k < space.size(); ++k) EXPECT_EQ(space.index_of(space.state(k)), k);
  }
  EXPECT_THROW(TruncatedSpace(-1), ParameterError);
}

TEST(SpaceModel, ClampedRowsStayDistributions) {
  const RelayParams p{0.7, 0.4, 3.0, 1.0};
  const TruncatedSpace space(5);
  const SpaceModel model(p, space);
  for (std::size_t s = 0; s < model.size(); ++s) {
    for (const auto& c : model.choices(s)) {
      double total = 0.0;
      for (const auto& t : c.outcomes) total += t.probability;
      EXPECT_NEAR(total, 1.0, 1e-15);
    }
  }
  // Waiting at the cap drops the type-1 arrival.
  const auto& w = model.choice(space.index_of(QState(5, 0)), Action::Wait);
  double stay = 0.0;
  for (const auto& t : w.outcomes) {
    if (space.state(t.next) == QState(5, 0)) stay += t.probability;
  }
  EXPECT_NEAR(stay, 0.6, 1e-15);
}

TEST(DiscountedValueIteration, NoArrivalsMeansNoCost) {
  const RelayParams p{0.0, 0.0, 5.0, 1.0};
  const TruncatedSpace space(10);
  const auto r = discounted_value_iteration(p, 0.9, space);
  const auto origin = space.index_of(QState(0, 0));
  EXPECT_DOUBLE_EQ(r.value.values[origin], 0.0);
  EXPECT_EQ(r.policy.action(origin), Action::Wait);
}

TEST(DiscountedValueIteration, AlwaysTransmitBound) {
  const RelayParams p{0.5, 0.5, 5.0, 1.0};
  const TruncatedSpace space(20);
  for (double beta : {0.9, 0.99}) {
    const auto r = discounted_value_iteration(p, beta, space);
    EXPECT_LE(r.value.values[space.index_of(QState(0, 0))], 5.0 / (1.0 - beta));
    for (std::size_t s = 0; s < space.size(); ++s) {
      EXPECT_GE(r.value.values[s], 0.0);
      EXPECT_LE(r.value.values[s], prop1_bound(space.state(s), p, beta));
    }
    EXPECT_LE(discounted_residual(p, space, r.value), 1e-9);
  }
}

TEST(DiscountedValueIteration, NearUndiscountedPolicyIsThreshold) {
  const RelayParams p{0.5, 0.5, 5.0, 1.0};
  const TruncatedSpace space(30);
  const auto r = discounted_value_iteration(p, 0.999, space);
  const auto ex = extract_thresholds(r.policy, space, BoundaryScan::ReachableOnly);
  ASSERT_TRUE(ex);
  EXPECT_EQ(*ex.thresholds, optimize_thresholds(p).thresholds);
}

TEST(DiscountedValueIteration, MyopicWhenBetaIsZero) {
  const RelayParams p{0.5, 0.5, 2.5, 1.0};
  const TruncatedSpace space(8);
  const auto r = discounted_value_iteration(p, 0.0, space);
  for (std::size_t s = 0; s < space.size(); ++s) {
    const QState st = space.state(s);
    if (feasible_actions(st).size() != 2) continue;
    const bool tx_cheaper = stage_cost(st, Action::Transmit, p) < stage_cost(st, Action::Wait, p);
    EXPECT_EQ(r.policy.action(s), tx_cheaper ? Action::Transmit : Action::Wait) << to_string(st);
  }
}

TEST(DiscountedValueIteration, RejectsBadArguments) {
  const RelayParams p{0.5, 0.5, 5.0, 1.0};
  EXPECT_THROW(discounted_value_iteration(p, 1.0, TruncatedSpace(3)), ParameterError);
  SolverOptions opts;
  opts.max_iterations = 3;
  EXPECT_THROW(discounted_value_iteration(p, 0.99, TruncatedSpace(3), opts), ConvergenceError);
}

TEST(RelativeValueIteration, TrivialGains) {
  const TruncatedSpace space(10);
  EXPECT_NEAR(relative_value_iteration({0.0, 0.0, 5.0, 1.0}, space).gain, 0.0, 1e-12);
  EXPECT_NEAR(relative_value_iteration({1.0, 1.0, 5.0, 1.0}, space).gain, 5.0, 1e-9);
}

TEST(RelativeValueIteration, MatchesClosedFormOptimum) {
  const RelayParams p{0.5, 0.5, 5.0, 1.0};
  const TruncatedSpace space(40);
  const auto r = relative_value_iteration(p, space);
  EXPECT_NEAR(r.gain, optimize_thresholds(p).performance.cost_per_slot, 1e-3);
  EXPECT_LE(r.residual, 1e-9);
  EXPECT_DOUBLE_EQ(r.bias[space.index_of(QState(0, 0))], 0.0);
  EXPECT_LE(average_cost_residual(p, space, r), 1e-8);
}

TEST(RelativeValueIteration, NonConvergenceCarriesHistory) {
  SolverOptions opts;
  opts.max_iterations = 5;
  try {
    relative_value_iteration({0.3, 0.6, 5.0, 1.0}, TruncatedSpace(20), opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
    EXPECT_EQ(e.residual_history().size(), 5u);
  }
}

TEST(RelativeValueIteration, CapInsensitivity) {
  const RelayParams p{0.35, 0.65, 5.0, 1.0};
  const auto opt = optimize_thresholds(p).thresholds;
  const int base = std::max(opt.l1, opt.l2) + 3;
  const double g0 = relative_value_iteration(p, TruncatedSpace(base)).gain;
  for (int extra : {2, 5, 15}) {
    EXPECT_NEAR(relative_value_iteration(p, TruncatedSpace(base + extra)).gain, g0, 1e-8);
  }
}

TEST(EvaluatePolicy, ThresholdPolicyMatchesClosedForm) {
  const TruncatedSpace space(15);
  for (double p1 : {0.2, 0.6}) {
    for (double p2 : {0.3, 0.5}) {
      const RelayParams p{p1, p2, 4.0, 1.0};
      for (ThresholdPair t : {ThresholdPair{0, 0}, ThresholdPair{2, 1}, ThresholdPair{4, 3}}) {
        const auto r = evaluate_policy(p, space, threshold_policy(space, t));
        EXPECT_NEAR(r.gain, average_cost(p, t).cost_per_slot, 1e-7);
      }
    }
  }
}

PolicyTable axis_policy(const TruncatedSpace& space, auto&& rule) {
  std::vector<Action> acts;
  for (QState s : space.states()) {
    if (s.total() == 0) {
      acts.push_back(Action::Wait);
    } else if (s.q1() > 0 && s.q2() > 0) {
      acts.push_back(Action::Transmit);
    } else {
      acts.push_back(rule(s));
    }
  }
  return PolicyTable::deterministic(std::move(acts));
}

TEST(ExtractThresholds, AlwaysTransmit) {
  const TruncatedSpace space(6);
  const auto pol = axis_policy(space, [](QState) { return Action::Transmit; });
  const auto ex = extract_thresholds(pol, space);
  ASSERT_TRUE(ex);
  EXPECT_EQ(*ex.thresholds, (ThresholdPair{0, 0}));
}

TEST(ExtractThresholds, UnrolledDefinition) {
  const TruncatedSpace space(8);
  const auto pol = axis_policy(space, [](QState s) {
    if (s.q2() == 0) return s.q1() <= 3 ? Action::Wait : Action::Transmit;
    return s.q2() <= 1 ? Action::Wait : Action::Transmit;
  });
  const auto ex = extract_thresholds(pol, space);
  ASSERT_TRUE(ex);
  EXPECT_EQ(*ex.thresholds, (ThresholdPair{3, 1}));
}

TEST(ExtractThresholds, MonotonicityViolationHasWitness) {
  const TruncatedSpace space(6);
  const auto pol = axis_policy(space, [](QState s) {
    if (s == QState(2, 0)) return Action::Wait;
    return Action::Transmit;
  });
  const auto ex = extract_thresholds(pol, space);
  EXPECT_FALSE(ex);
  ASSERT_TRUE(ex.witness.has_value());
  EXPECT_EQ(ex.witness->first, QState(1, 0));
  EXPECT_EQ(ex.witness->second, QState(2, 0));

  // The Wait at (2,0) can never be reached once (1,0) transmits.
  const auto reach = extract_thresholds(pol, space, BoundaryScan::ReachableOnly);
  ASSERT_TRUE(reach);
  EXPECT_EQ(*reach.thresholds, (ThresholdPair{0, 0}));
}

TEST(ExtractThresholds, NeverTransmittingIsCapped) {
  const TruncatedSpace space(4);
  const auto pol = axis_policy(space, [](QState) { return Action::Wait; });
  const auto ex = extract_thresholds(pol, space);
  ASSERT_TRUE(ex);
  EXPECT_TRUE(ex.capped1);
  EXPECT_TRUE(ex.capped2);
  EXPECT_EQ(*ex.thresholds, (ThresholdPair{4, 4}));
}

TEST(RelativeValueIteration, OptimalPolicyIsThresholdOnGrid) {
  const TruncatedSpace space(30);
  for (double p1 : {0.2, 0.5, 0.8}) {
    for (double p2 : {0.35, 0.65}) {
      for (double ct : {2.0, 5.0}) {
        const RelayParams p{p1, p2, ct, 1.0};
        const auto r = relative_value_iteration(p, space);
        const auto ex = extract_thresholds(r.policy, space, BoundaryScan::ReachableOnly);
        ASSERT_TRUE(ex) << p1 << " " << p2 << " " << ct;
        EXPECT_NEAR(average_cost(p, *ex.thresholds).cost_per_slot, r.gain, 1e-6);
      }
    }
  }
}

}  // namespace
}  // namespace ncwait
