#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "bwk/fixtures.hpp"
#include "bwk/lp.hpp"
#include "bwk/lp_vertices.hpp"
#include "bwk/rng.hpp"

using namespace bwk;

TEST(OptLp, HalfDemandFixture) {
  // Total demand 320 + 320/16 = 340, B = 320.
  const auto spec = fixture_lower_bound(1, 640);
  const auto sol = solve_opt_lp(spec.mean_reward, spec.mean_cost, 340.0, 320.0);
  EXPECT_NEAR(sol.value, 330.0, 1e-9);
  EXPECT_NEAR(sol.u[0], 15.0 / 17.0, 1e-9);
  EXPECT_NEAR(sol.u[1], 2.0 / 17.0, 1e-9);
  EXPECT_NEAR(sol.u[2], 0.0, 1e-9);
  EXPECT_EQ(sol.binding, (std::vector<std::size_t>{0}));
  EXPECT_EQ(sol.status, LpStatus::optimal);
}

TEST(OptLp, FullDemandFixture) {
  const auto spec = fixture_lower_bound(2, 1000);
  const auto sol =
      solve_opt_lp(spec.mean_reward, spec.mean_cost, 1000.0, 500.0);
  EXPECT_NEAR(sol.value, 750.0, 1e-9);
  EXPECT_NEAR(sol.u[1], 1.0, 1e-9);
}

TEST(OptLp, SlackBudgetTakesBestReward) {
  const std::vector<double> r{0.3, 0.8, 0.5, 0.0};
  const Matrix c{{0.1, 0.2}, {0.4, 0.1}, {0.9, 0.9}, {0.0, 0.0}};
  const auto sol = solve_opt_lp(r, c, 100.0, 1e6);
  EXPECT_NEAR(sol.value, 80.0, 1e-9);
  EXPECT_TRUE(sol.binding.empty());
}

TEST(OptLp, SingleActionClosedForm) {
  for (double B : {1.0, 10.0, 40.0, 100.0}) {
    const std::vector<double> r{0.6, 0.0};
    const Matrix c{{0.5}, {0.0}};
    const double Q = 50.0;
    const auto sol = solve_opt_lp(r, c, Q, B);
    EXPECT_NEAR(sol.value, std::min(Q * 0.6, B * 0.6 / 0.5), 1e-9) << B;
    EXPECT_NEAR(std::accumulate(sol.u.begin(), sol.u.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(OptLp, AgreesWithVertexEnumeration) {
  SplitMix64 rng(20240611);
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t K = 2 + static_cast<std::size_t>(uniform01(rng) * 5);
    const std::size_t d = 1 + static_cast<std::size_t>(uniform01(rng) * 3);
    std::vector<double> r(K, 0.0);
    Matrix c(K, d, 0.0);
    for (std::size_t a = 0; a + 1 < K; ++a) {
      r[a] = uniform01(rng);
      for (std::size_t i = 0; i < d; ++i) {
        // Some zero costs exercise unbounded-ratio columns.
        c(a, i) = uniform01(rng) < 0.1 ? 0.0 : uniform01(rng);
      }
    }
    const double Q = 1.0 + 1000.0 * uniform01(rng);
    const double B = Q * (0.01 + uniform01(rng));
    const auto sol = solve_opt_lp(r, c, Q, B);
    const double oracle = enumerate_vertices_oracle(r, c, Q, B);
    ASSERT_NEAR(sol.value, oracle, 1e-7 * std::max(1.0, oracle))
        << "instance " << inst;
    double mass = 0.0;
    for (std::size_t a = 0; a < K; ++a) {
      ASSERT_GE(sol.u[a], -1e-12);
      mass += sol.u[a];
    }
    ASSERT_NEAR(mass, 1.0, 1e-9);
    for (std::size_t i = 0; i < d; ++i) {
      double use = 0.0;
      for (std::size_t a = 0; a < K; ++a) use += Q * c(a, i) * sol.u[a];
      ASSERT_LE(use, B * (1.0 + 1e-9));
    }
  }
}

TEST(OptLp, MonotoneInBudgetAndReward) {
  const std::vector<double> r{0.9, 0.4, 0.7, 0.0};
  const Matrix c{{0.8, 0.1}, {0.1, 0.2}, {0.3, 0.6}, {0.0, 0.0}};
  double prev = 0.0;
  for (double B = 5.0; B <= 200.0; B += 5.0) {
    const double v = solve_opt_lp(r, c, 150.0, B).value;
    EXPECT_GE(v, prev - 1e-9);
    prev = v;
  }
  const double base = solve_opt_lp(r, c, 150.0, 40.0).value;
  auto bumped = r;
  bumped[1] += 0.2;
  EXPECT_GE(solve_opt_lp(bumped, c, 150.0, 40.0).value, base - 1e-9);
}

TEST(OptLp, RejectsBadInput) {
  const std::vector<double> r{0.5, 0.0};
  EXPECT_THROW(solve_opt_lp(r, Matrix{{0.5}}, 1.0, 1.0), ArgumentError);
  EXPECT_THROW(solve_opt_lp(r, Matrix{{0.5}, {0.0}}, 0.0, 1.0), ArgumentError);
  EXPECT_THROW(solve_opt_lp(r, Matrix{{0.5}, {0.0}}, 1.0, -1.0),
               ArgumentError);
  // Without a null action the leftover mass has nowhere to go.
  const std::vector<double> only{1.0};
  EXPECT_THROW(solve_opt_lp(only, Matrix{{1.0}}, 10.0, 5.0), ArgumentError);
}

TEST(VertexOracle, RefusesLargeInstances) {
  const std::vector<double> r(10, 0.5);
  EXPECT_THROW(enumerate_vertices_oracle(r, Matrix(10, 3, 0.5), 1.0, 1.0),
               ArgumentError);
}

TEST(Fixtures, StraddlePairSharesPrefixAndBracketsPrediction) {
  const std::vector<double> prefix{3.0, 5.0, 4.0};
  const auto [lo, hi] = fixture_straddle_pair(prefix, 100.0, 10.0, 20, 3);
  const auto& qlo = std::get<ExplicitDemand>(lo.demand).values;
  const auto& qhi = std::get<ExplicitDemand>(hi.demand).values;
  EXPECT_NEAR(std::accumulate(qlo.begin(), qlo.end(), 0.0), 90.0, 1e-9);
  EXPECT_NEAR(std::accumulate(qhi.begin(), qhi.end(), 0.0), 110.0, 1e-9);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(qlo[t], prefix[t]);
    EXPECT_EQ(qhi[t], prefix[t]);
  }
  EXPECT_DOUBLE_EQ(lo.budget(), 90.0);
  EXPECT_DOUBLE_EQ(lo.mean_cost(1, 0), 90.0 / 110.0);
  EXPECT_NO_THROW(lo.validate());
  EXPECT_THROW(fixture_straddle_pair(prefix, 100.0, 60.0, 20, 3), ArgumentError);
  EXPECT_THROW(fixture_straddle_pair(prefix, 100.0, 10.0, 20, 2), ArgumentError);
  EXPECT_THROW(fixture_lower_bound(3, 10), ArgumentError);
  EXPECT_THROW(fixture_lower_bound(1, 9), ArgumentError);
}
