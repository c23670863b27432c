#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bwk/demand.hpp"

using namespace bwk;

TEST(LinearDemand, NoiselessIsExact) {
  const auto d = gen_linear({2.0, 3.0, 0.0}, 50, 9);
  for (int t = 1; t <= 50; ++t) EXPECT_DOUBLE_EQ(d.values[t - 1], 2.0 + 3.0 * t);
}

TEST(LinearDemand, NoiselessTotal) {
  EXPECT_DOUBLE_EQ(gen_linear({2.0, 3.0, 0.0}, 10, 1).total(), 185.0);
}

TEST(LinearDemand, StaysInsideNoiseBand) {
  const LinearDemandParams p{5.0, 0.5, 2.0};
  const auto d = gen_linear(p, 4000, 4);
  for (int t = 1; t <= 4000; ++t) {
    EXPECT_GE(d.values[t - 1], p.alpha + p.beta * t - p.noise_halfwidth);
    EXPECT_LE(d.values[t - 1], p.alpha + p.beta * t + p.noise_halfwidth);
  }
}

TEST(LinearDemand, MonteCarloMean) {
  const LinearDemandParams p{5.0, 0.5, 2.0};
  const int n = 10000, T = 5;
  std::vector<double> sum(T, 0.0);
  for (int r = 0; r < n; ++r) {
    const auto d = gen_linear(p, T, derive_seed(77, "mc", r));
    for (int t = 0; t < T; ++t) sum[t] += d.values[t];
  }
  const double sd = p.noise_halfwidth / std::sqrt(3.0);
  for (int t = 1; t <= T; ++t) {
    EXPECT_NEAR(sum[t - 1] / n, p.alpha + p.beta * t, 4 * sd / std::sqrt(n));
  }
}

TEST(LinearDemand, RejectsParamsAllowingNonPositiveDemand) {
  EXPECT_THROW(gen_linear({1.0, 0.5, 1.0}, 5, 1), ConfigError);
  EXPECT_THROW(gen_linear({3.0, 0.0, 1.0}, 5, 1), ConfigError);
  EXPECT_THROW(gen_linear({3.0, 1.0, -1.0}, 5, 1), ConfigError);
}

TEST(Ar1Demand, FixedPointIsConstant) {
  const Ar1DemandParams p{12.0, 0.5, 0.0, 24.0};
  for (double q : gen_ar1(p, 100, 3).values) EXPECT_DOUBLE_EQ(q, 24.0);
}

TEST(Ar1Demand, NoiselessRecursionFromTwelve) {
  const Ar1DemandParams p{12.0, 0.5, 0.0, 12.0};
  const auto d = gen_ar1(p, 60, 3);
  EXPECT_DOUBLE_EQ(d.values[0], 12.0);
  EXPECT_DOUBLE_EQ(d.values[1], 18.0);
  EXPECT_DOUBLE_EQ(d.values[2], 21.0);
  EXPECT_DOUBLE_EQ(d.values[3], 22.5);
  EXPECT_NEAR(d.values.back(), 24.0, 1e-12);
}

TEST(Ar1Demand, StationaryMeanMonteCarlo) {
  const Ar1DemandParams p{12.0, 0.5, 2.0, 12.0};
  const auto d = gen_ar1(p, 200000, 5);
  double sum = 0.0;
  for (std::size_t t = 100; t < d.values.size(); ++t) sum += d.values[t];
  const double mean = sum / (d.values.size() - 100);
  // Long-run variance of the mean of an AR(1): sigma^2 / (1-beta)^2 / n.
  const double se = 2.0 / 0.5 / std::sqrt(200000.0);
  EXPECT_NEAR(mean, 24.0, 5 * se);
  EXPECT_EQ(d.floored, 0u);
}

TEST(Ar1Demand, NegativeDrawsAreFlooredAndCounted) {
  const Ar1DemandParams p{0.1, 0.0, 5.0, 1.0};
  const auto d = gen_ar1(p, 2000, 8);
  EXPECT_GT(d.floored, 0u);
  for (double q : d.values) EXPECT_GE(q, 0.0);
}

TEST(Ar1Demand, ValidationAndPositivityWarning) {
  EXPECT_THROW(gen_ar1({12.0, 1.0, 2.0, 12.0}, 5, 1), ConfigError);
  EXPECT_THROW(gen_ar1({12.0, 0.5, 2.0, 0.0}, 5, 1), ConfigError);
  EXPECT_THROW(gen_ar1({0.0, 0.5, 2.0, 1.0}, 5, 1), ConfigError);
  const Ar1DemandParams paper{12.0, 0.5, 2.0, 12.0};
  EXPECT_FALSE(paper.positivity_warning(1.0 / 2000).has_value());
  const Ar1DemandParams noisy{1.0, 0.5, 3.0, 1.0};
  EXPECT_TRUE(noisy.positivity_warning(0.01).has_value());
}

TEST(Ar1Demand, HighProbabilityBoundsContainMostSeries) {
  const Ar1DemandParams p{12.0, 0.5, 2.0, 12.0};
  const int T = 1000;
  const double delta = 1.0 / T;
  const auto [lo, hi] = p.high_probability_bounds(delta);
  int inside = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto d = gen_ar1(p, T, derive_seed(3, "hp", r));
    bool ok = true;
    for (double q : d.values) ok = ok && q >= lo && q <= hi;
    inside += ok;
  }
  EXPECT_GE(inside, static_cast<int>((1.0 - 3.0 * T * delta) * reps));
}

TEST(Demand, DeterministicPerSeed) {
  const DemandModel m = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  EXPECT_EQ(generate_demand(m, 300, 42).values, generate_demand(m, 300, 42).values);
  EXPECT_NE(generate_demand(m, 300, 42).values, generate_demand(m, 300, 43).values);
}

TEST(Demand, ExplicitLengthMustMatch) {
  const DemandModel m = ExplicitDemand{{1.0, 2.0}};
  EXPECT_THROW(generate_demand(m, 3, 0), ConfigError);
  EXPECT_EQ(generate_demand(m, 2, 0).values.size(), 2u);
  EXPECT_THROW(generate_demand(ExplicitDemand{{1.0, -1.0}}, 2, 0), ConfigError);
  EXPECT_EQ(demand_model_name(m), "explicit");
}
