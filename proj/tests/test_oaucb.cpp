#include <gtest/gtest.h>

#include <vector>

#include "bwk/baselines.hpp"
#include "bwk/oaucb.hpp"
#include "bwk/oracles.hpp"
#include "bwk/rng.hpp"
#include "bwk/simulate.hpp"

using namespace bwk;

namespace {

EnvironmentSpec three_arms(double b, int T, double scale = 1.0) {
  EnvironmentSpec spec;
  spec.mean_reward = {0.0, 0.9, 0.6, 0.35};
  spec.mean_cost = Matrix{{0.0, 0.0}, {0.9, 0.3}, {0.4, 0.4}, {0.1, 0.2}};
  spec.null_index = 0;
  spec.normalized_budget = b;
  spec.horizon = T;
  std::vector<double> q(T);
  for (int t = 0; t < T; ++t) q[t] = scale * (4.0 + (t * 37 % 11));
  spec.demand = ExplicitDemand{std::move(q)};
  return spec;
}

}  // namespace

TEST(OaUcb, FreshStatePicksFirstNonNullAction) {
  OaUcbPolicy p;
  p.reset({4, 2, 0, 100.0, 1000});
  EXPECT_EQ(p.select({1, 500.0, {}, {}}), 1u);
  ASSERT_EQ(p.dual_weights().size(), 3u);
  for (double w : p.dual_weights()) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(OaUcb, CompositeScoreExample) {
  const std::vector<double> ucb{0.0, 0.9, 0.5};
  const Matrix lcb{{0.0}, {0.5}, {0.5}};
  const std::vector<double> mu{1.0, 0.0};
  const auto s = composite_scores(ucb, lcb, mu, 1.0);
  EXPECT_NEAR(s[0], 0.0, 1e-15);
  EXPECT_NEAR(s[1], 0.4, 1e-15);
  EXPECT_NEAR(s[2], 0.0, 1e-15);
  EXPECT_EQ(oaucb_select(ucb, lcb, mu, 1.0), 1u);
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.2, 0.5, 0.5}), 1u);
}

TEST(OaUcb, GradientExample) {
  const std::vector<double> lcb{0.3};
  const auto g = oaucb_gradient(1.0, 100.0, 50.0, lcb);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g[0], 0.4, 1e-15);
  EXPECT_EQ(g[1], 0.0);
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(oaucb_gradient(3.0, 100.0, 50.0, zero),
            (std::vector<double>{3.0, 3.0, 0.0}));
  EXPECT_EQ(oaucb_gradient(0.0, 100.0, 50.0, lcb),
            (std::vector<double>{0.0, 0.0}));
}

TEST(OaUcb, SelectionMaximisesOverMixtures) {
  SplitMix64 rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t K = 5, d = 3;
    std::vector<double> ucb(K);
    Matrix lcb(K, d);
    std::vector<double> mu(d + 1);
    for (auto& v : ucb) v = uniform01(rng);
    for (std::size_t a = 0; a < K; ++a)
      for (std::size_t i = 0; i < d; ++i) lcb(a, i) = uniform01(rng);
    double sum = 0.0;
    for (auto& m : mu) sum += (m = uniform01(rng));
    for (auto& m : mu) m /= sum;
    const double ratio = 3.0 * uniform01(rng);
    const auto scores = composite_scores(ucb, lcb, mu, ratio);
    const double chosen = scores[oaucb_select(ucb, lcb, mu, ratio)];
    for (int k = 0; k < 20; ++k) {
      std::vector<double> u(K);
      double tot = 0.0;
      for (auto& x : u) tot += (x = uniform01(rng));
      double mix = 0.0;
      for (std::size_t a = 0; a < K; ++a) mix += u[a] / tot * scores[a];
      EXPECT_GE(chosen, mix - 1e-12);
    }
  }
}

TEST(OaUcb, InvariantToCommonDemandScaling) {
  // Multiplying demand, budget and prediction by a power of two is exact in
  // floating point, so the action sequences must coincide.
  const int T = 600;
  const auto base = three_arms(3.0, T);
  const auto scaled = three_arms(3.0 * 4.0, T, 4.0);
  const double q1 = spec_demand(base, 3).total();
  OaUcbPolicy p1, p2;
  StaticOffsetOracle o1(q1, 0.0, T), o2(4.0 * q1, 0.0, T);
  const auto a = simulate_run(base, p1, o1, 3);
  const auto b = simulate_run(scaled, p2, o2, 3);
  EXPECT_EQ(a.actions(), b.actions());
  EXPECT_EQ(a.stopping_time, b.stopping_time);
  EXPECT_NEAR(4.0 * a.total_reward, b.total_reward, 1e-9 * b.total_reward);
}

TEST(OaUcb, WideWindowEqualsFullHistory) {
  const int T = 500;
  const auto spec = three_arms(2.0, T);
  OaUcbPolicy full;
  OaUcbConfig cfg;
  cfg.window = T;
  OaUcbPolicy windowed(cfg);
  StaticOffsetOracle o1(4000.0, 0.0, T), o2(4000.0, 0.0, T);
  EXPECT_EQ(simulate_run(spec, full, o1, 11).actions(),
            simulate_run(spec, windowed, o2, 11).actions());
}

TEST(OaUcb, UnitWindowKeepsOneSample) {
  const int T = 200;
  const auto spec = three_arms(2.0, T);
  OaUcbConfig cfg;
  cfg.window = 1;
  OaUcbPolicy p(cfg);
  p.reset(ProblemInfo::from(spec));
  const SpecOutcomeSource src(spec, 4);
  const auto q = spec_demand(spec, 4).values;
  for (int t = 1; t <= 50; ++t) {
    const std::size_t a = p.select({t, 2000.0, {}, {}});
    Outcome out;
    src.sample(t, a, q[t - 1], out);
    RoundFeedback fb{t, q[t - 1], 2000.0, out.reward, out.cost, {}};
    p.observe(fb, a);
    std::size_t total = 0;
    for (std::size_t k = 0; k < 4; ++k) total += p.statistics().count(k);
    EXPECT_LE(total, 1u);
  }
}

TEST(OaUcb, PredictionFloor) {
  OaUcbPolicy p;
  p.reset({2, 1, 1, 10.0, 100});
  EXPECT_DOUBLE_EQ(p.effective_prediction(-5.0), 1e-9);
  RoundFeedback fb{1, 7.0, 0.0, 0.5, {0.5}, {}};
  p.select({1, 0.0, {}, {}});
  p.observe(fb, 0);
  EXPECT_DOUBLE_EQ(p.effective_prediction(3.0), 7.0);
  EXPECT_DOUBLE_EQ(p.effective_prediction(30.0), 30.0);
}

TEST(OaUcb, BeatsFixedArmsOnStationaryInstance) {
  const int T = 2000;
  EnvironmentSpec spec;
  spec.mean_reward = {0.8, 0.5, 0.0};
  spec.mean_cost = Matrix{{0.9}, {0.2}, {0.0}};
  spec.null_index = 2;
  spec.normalized_budget = 3.0;
  spec.horizon = T;
  spec.demand = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  double oa = 0.0, f0 = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const double Q = spec_demand(spec, s).total();
    OaUcbPolicy p;
    FixedActionPolicy fixed(0);
    StaticOffsetOracle o1(Q, 0.0, T), o2(Q, 0.0, T);
    oa += simulate_run(spec, p, o1, s).total_reward;
    f0 += simulate_run(spec, fixed, o2, s).total_reward;
  }
  EXPECT_GT(oa, f0);
}
