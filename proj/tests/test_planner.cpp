#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spolf/errors.hpp"
#include "spolf/planner.hpp"

using namespace spolf;

namespace {

struct Instance {
  int w = 0, h = 0;
  StateSet planning;
  std::vector<double> gain;
};

Instance random_instance(int w, int h, std::mt19937_64& rng, double keep = 0.8) {
  Instance in;
  in.w = w;
  in.h = h;
  const std::size_t n = static_cast<std::size_t>(w * h);
  in.planning = StateSet(n);
  std::bernoulli_distribution coin(keep);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    if (coin(rng)) in.planning.insert(static_cast<StateIndex>(s));
    in.gain.push_back(u(rng));
  }
  if (in.planning.empty()) in.planning.insert(0);
  return in;
}

}  // namespace

TEST(Planner, SelfLoopClosedForm) {
  const GridTopology topo(1, 1);
  const StateSet p = StateSet::all(1);
  const std::vector<double> gain = {1.0};
  const ValueTable v = solve_value(topo, p, gain, 0.5);
  EXPECT_NEAR(v[0], 2.0, 1e-12);
  const std::vector<double> zero = {0.0};
  EXPECT_EQ(solve_value(topo, p, zero, 0.5)[0], 0.0);
}

// 1 x 3 chain with gain only at the right end. Gain is collected on arrival,
// so the neighbour of the goal is worth as much as the goal itself.
TEST(Planner, ChainValues) {
  const GridTopology topo(3, 1);
  const std::vector<double> gain = {0.0, 0.0, 1.0};
  const double g = 0.9;
  const ValueTable v = solve_value(topo, StateSet::all(3), gain, g);
  EXPECT_NEAR(v[2], 1.0 / (1 - g), 1e-9);
  EXPECT_NEAR(v[1], 1.0 / (1 - g), 1e-9);
  EXPECT_NEAR(v[0], g / (1 - g), 1e-9);
  EXPECT_EQ(v.policy[0], 1u);
  EXPECT_EQ(v.policy[1], 2u);
  EXPECT_EQ(v.policy[2], 2u);
}

TEST(Planner, Errors) {
  const GridTopology topo(2, 2);
  const std::vector<double> gain(4, 0.0);
  EXPECT_THROW(solve_value(topo, StateSet(4), gain, 0.9), EmptyPlanningSet);
  EXPECT_THROW(solve_value(topo, StateSet::all(4), gain, 1.0), InvalidSpec);
  EXPECT_THROW(solve_value(topo, StateSet::all(4), gain, 0.0), InvalidSpec);
}

TEST(Planner, MatchesEnumeration) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance in = random_instance(2 + trial % 2, 2 + (trial / 2) % 2, rng);
    const double gamma = trial % 3 == 0 ? 0.5 : 0.9;
    const ValueTable v = solve_value(GridTopology(in.w, in.h), in.planning, in.gain, gamma);
    const auto ref =
        oracle::enumerate_optimal(in.w, in.h, oracle::to_mask(in.planning), in.gain, gamma);
    for (std::size_t s = 0; s < ref.size(); ++s) {
      if (std::isnan(ref[s])) {
        EXPECT_TRUE(std::isnan(v.value[s]));
      } else {
        EXPECT_NEAR(v.value[s], ref[s], 1e-9);
      }
    }
  }
}

TEST(Planner, PolicyAndValueIterationAgree) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(6, 5, rng);
    const GridTopology topo(in.w, in.h);
    const double gamma = 0.95;
    SolveOptions vi;
    vi.method = SolveMethod::kValueIteration;
    std::vector<double> trace;
    vi.residual_trace = &trace;
    const ValueTable a = solve_value(topo, in.planning, in.gain, gamma);
    const ValueTable b = solve_value(topo, in.planning, in.gain, gamma, vi);
    in.planning.for_each([&](StateIndex s) { EXPECT_NEAR(a[s], b[s], 1e-6); });
    EXPECT_LE(bellman_residual(topo, a, in.gain), scaled_tolerance(1e-9, gamma));
    // Sup-norm contraction: residuals never grow.
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-15);
    EXPECT_EQ(a.policy, b.policy);
  }
}

TEST(Planner, WarmStartGivesSameAnswer) {
  std::mt19937_64 rng(33);
  Instance in = random_instance(7, 7, rng);
  const GridTopology topo(7, 7);
  const ValueTable cold = solve_value(topo, in.planning, in.gain, 0.99);
  in.gain[3] += 0.5;
  SolveOptions warm;
  warm.warm_start = &cold;
  const ValueTable a = solve_value(topo, in.planning, in.gain, 0.99, warm);
  const ValueTable b = solve_value(topo, in.planning, in.gain, 0.99);
  in.planning.for_each([&](StateIndex s) { EXPECT_NEAR(a[s], b[s], 1e-8); });
}

TEST(Planner, EvaluatePolicyCycle) {
  // Two-state cycle 0 -> 1 -> 0 with gains 1 and 0.
  const StateSet p = StateSet::all(2);
  const std::vector<StateIndex> pol = {1, 0};
  const std::vector<double> gain = {1.0, 0.0};
  const auto v = evaluate_policy(p, pol, gain, 0.5);
  // J0 = 0 + 0.5 J1, J1 = 1 + 0.5 J0.
  EXPECT_NEAR(v[1], 1.0 / 0.75, 1e-12);
  EXPECT_NEAR(v[0], 0.5 / 0.75, 1e-12);
}

TEST(Planner, TieBreakLowestIndex) {
  const GridTopology topo(3, 3);
  const std::vector<double> gain(9, 1.0);
  const ValueTable v = solve_value(topo, StateSet::all(9), gain, 0.9);
  // Every successor ties; the lowest index wins.
  EXPECT_EQ(greedy_next(topo, 4, v, StateSet::all(9), gain), 1u);
  EXPECT_EQ(eta(topo, 0, v, gain), 0u);
  EXPECT_EQ(value_argmax(v, StateSet::all(9)), 0u);
}

TEST(Planner, GreedyRespectsAllowedSet) {
  const GridTopology topo(3, 1);
  const std::vector<double> gain = {0.0, 0.0, 1.0};
  const ValueTable v = solve_value(topo, StateSet::all(3), gain, 0.9);
  EXPECT_EQ(eta(topo, 1, v, gain), 2u);
  const StateSet allowed = StateSet::of(3, std::vector<StateIndex>{0, 1});
  EXPECT_EQ(greedy_next(topo, 1, v, allowed, gain), 1u);
  // Nothing allowed: stay.
  EXPECT_EQ(greedy_next(topo, 1, v, StateSet(3), gain), 1u);
  EXPECT_EQ(value_argmax(v, StateSet(3)), 3u);
}

// Scaling the gain scales J, so the argmax and the greedy choice are unchanged.
TEST(Planner, ArgmaxInvariantUnderGainScaling) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    Instance in = random_instance(5, 5, rng);
    const GridTopology topo(5, 5);
    const ValueTable a = solve_value(topo, in.planning, in.gain, 0.9);
    std::vector<double> scaled = in.gain;
    for (double& g : scaled) g *= 7.5;
    const ValueTable b = solve_value(topo, in.planning, scaled, 0.9);
    EXPECT_EQ(value_argmax(a, in.planning), value_argmax(b, in.planning));
    const StateIndex s = in.planning.first();
    EXPECT_EQ(eta(topo, s, a, in.gain), eta(topo, s, b, scaled));
  }
}

TEST(Planner, ValueIterationCapFormula) {
  EXPECT_EQ(value_iteration_cap(1e-9, 0.9),
            static_cast<long long>(std::ceil(10.0 / (1.0 - 0.9) * std::log(1e9))));
  EXPECT_NEAR(scaled_tolerance(1e-9, 0.99), 1e-7, 1e-20);
}

TEST(Planner, OfuRewardBranches) {
  GlmEstimator g(LinkKind::kSigmoid, 2, 0.0, 0.05);
  EXPECT_THROW(ofu_reward(g, StateSet(3), StateSet::all(3), Eigen::MatrixXd::Zero(2, 3)),
               NotFitted);
  g.set_theta(Eigen::Vector2d::Zero());
  Eigen::MatrixXd f(2, 3);
  f << 0.3, 0.1, 0.0, 0.2, 0.4, 0.0;
  const StateSet psi = StateSet::of(3, std::vector<StateIndex>{0});
  const StateSet plan = StateSet::of(3, std::vector<StateIndex>{0, 1});
  const auto r = ofu_reward(g, psi, plan, f);
  // theta = 0 and beta = 0 (sigma = 0): both branches equal mu(0).
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
  EXPECT_EQ(r[2], 0.0);

  GlmEstimator id(LinkKind::kIdentity, 2, 0.1, 0.05);
  for (int i = 0; i < 4; ++i) {
    id.update(Eigen::Vector2d(1, 0), 0.5);
    id.update(Eigen::Vector2d(0, 1), 0.2);
  }
  id.fit();
  const auto r2 = ofu_reward(id, psi, plan, f);
  EXPECT_NEAR(r2[0], id.interval_inside(f.col(0)).hi, 1e-12);
  EXPECT_NEAR(r2[1], id.interval_outside().hi, 1e-12);
}

TEST(Planner, EtseGainOnlyOnObservedRegion) {
  GlmEstimator g(LinkKind::kIdentity, 2, 0.1, 0.05);
  for (int i = 0; i < 4; ++i) {
    g.update(Eigen::Vector2d(1, 0), 0.0);
    g.update(Eigen::Vector2d(0, 1), 0.0);
  }
  Eigen::MatrixXd f(2, 3);
  f << 1, 0, 0.6, 0, 1, 0.8;
  const StateSet psi = StateSet::of(3, std::vector<StateIndex>{0, 2});
  const StateSet region = StateSet::of(3, std::vector<StateIndex>{0, 1});
  const auto gain = etse_gain(g, psi, region, f);
  EXPECT_NEAR(gain[0], 0.5, 1e-6);
  EXPECT_EQ(gain[1], 0.0);
  EXPECT_EQ(gain[2], 0.0);
}
