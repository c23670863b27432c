#include <gtest/gtest.h>

#include <vector>

#include "bwk/baselines.hpp"
#include "bwk/fixtures.hpp"
#include "bwk/oracles.hpp"
#include "bwk/simulate.hpp"

using namespace bwk;

namespace {

EnvironmentSpec stationary(int T) {
  EnvironmentSpec spec;
  spec.mean_reward = {0.8, 0.5, 0.3, 0.0};
  spec.mean_cost = Matrix{{0.9, 0.1}, {0.2, 0.6}, {0.1, 0.1}, {0.0, 0.0}};
  spec.null_index = 3;
  spec.normalized_budget = 3.0;
  spec.horizon = T;
  spec.demand = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  return spec;
}

}  // namespace

TEST(Pdb, RoundRobinThenWeightsStayNormalised) {
  const auto spec = stationary(300);
  PdbPolicy p;
  StaticOffsetOracle o(1.0, 0.0, 300);
  const auto log = simulate_run(spec, p, o, 2);
  EXPECT_EQ(log.rounds[0].action, 0u);
  EXPECT_EQ(log.rounds[1].action, 1u);
  EXPECT_EQ(log.rounds[2].action, 2u);
  for (const auto& r : log.rounds) {
    if (r.dual_weights.empty()) continue;
    ASSERT_EQ(r.dual_weights.size(), 2u);
    EXPECT_NEAR(r.dual_weights[0] + r.dual_weights[1], 1.0, 1e-12);
  }
}

TEST(Pdb, SingleResourceWeightIsOne) {
  const auto spec = fixture_lower_bound(2, 100);
  PdbPolicy p;
  StaticOffsetOracle o(100.0, 0.0, 100);
  const auto log = simulate_run(spec, p, o, 0);
  for (const auto& r : log.rounds) {
    if (!r.dual_weights.empty()) {
      EXPECT_DOUBLE_EQ(r.dual_weights[0], 1.0);
    }
  }
}

TEST(Pdb, StepIsClamped) {
  PdbConfig cfg;
  cfg.step = 5.0;
  PdbPolicy big(cfg);
  big.reset({3, 1, 2, 10.0, 100});
  EXPECT_DOUBLE_EQ(big.step(), 0.99);
  PdbPolicy deflt;
  deflt.reset({3, 4, 2, 400.0, 100});
  EXPECT_NEAR(deflt.step(), std::sqrt(std::log(4.0) / 400.0), 1e-15);
}

TEST(SlidingWindow, DefaultWindowAndName) {
  EXPECT_EQ(default_sw_window(2000), 4u * 45u);
  EXPECT_EQ(default_sw_window(4096), 256u);
  EXPECT_EQ(make_sw_ucb(2000).name(), "sw-ucb");
}

TEST(GreedyUcb, FreshChoiceAndEarlyExhaustion) {
  GreedyUcbPolicy g;
  g.reset({3, 1, 2, 10.0, 100});
  EXPECT_EQ(g.select({1, 0.0, {}, {}}), 0u);

  const auto spec = fixture_lower_bound(2, 1000);
  GreedyUcbPolicy greedy;
  StaticOffsetOracle o(1000.0, 0.0, 1000);
  const auto log = simulate_run(spec, greedy, o, 0);
  EXPECT_EQ(log.stopping_time, 501);
  EXPECT_DOUBLE_EQ(log.total_reward, 500.0);
}

TEST(FixedAndReplay, Behaviour) {
  FixedActionPolicy f(1);
  EXPECT_EQ(f.name(), "fixed-1");
  EXPECT_THROW(f.reset({1, 1, 0, 1.0, 10}), ArgumentError);
  ReplayPolicy r({2, 0});
  r.reset({3, 1, 2, 1.0, 10});
  EXPECT_EQ(r.select({}), 2u);
  EXPECT_EQ(r.select({}), 0u);
  EXPECT_EQ(r.select({}), 0u);
  EXPECT_THROW(ReplayPolicy({}), ArgumentError);
}
