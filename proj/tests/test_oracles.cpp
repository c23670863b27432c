#include <gtest/gtest.h>

#include <memory>
#include <span>
#include <vector>

#include "bwk/oracles.hpp"

using namespace bwk;

namespace {

class CountingOracle final : public PredictionOracle {
 public:
  std::string name() const override { return "counting"; }
  void reset() override { calls = 0; }
  double predict(std::span<const double>, int t, int) override {
    ++calls;
    return 100.0 * t;
  }
  int calls = 0;
};

}  // namespace

TEST(LeastSquares, NoiselessLineIsExact) {
  LeastSquaresLinearOracle o;
  const std::vector<double> q{5.0, 8.0, 11.0};
  EXPECT_NEAR(o.predict(q, 4, 10), 185.0, 1e-9);
  const auto f = o.fit(3);
  EXPECT_NEAR(f.alpha, 2.0, 1e-12);
  EXPECT_NEAR(f.beta, 3.0, 1e-12);
}

TEST(LeastSquares, ConstantPrefix) {
  LeastSquaresLinearOracle o;
  std::vector<double> q(50, 4.0);
  EXPECT_NEAR(o.predict(q, 51, 200), 800.0, 1e-9);
}

TEST(LeastSquares, EarlyRoundsFallBack) {
  LeastSquaresLinearOracle o(7.0);
  EXPECT_DOUBLE_EQ(o.predict({}, 1, 100), 700.0);
  const std::vector<double> q{3.0, 5.0};
  EXPECT_DOUBLE_EQ(o.predict(q, 3, 100), 400.0);
}

TEST(LeastSquares, IncrementalMatchesFresh) {
  std::vector<double> q;
  LeastSquaresLinearOracle inc;
  for (int t = 1; t <= 60; ++t) {
    const double a = inc.predict(q, t, 60);
    LeastSquaresLinearOracle fresh;
    EXPECT_NEAR(a, fresh.predict(q, t, 60), 1e-9 * std::max(1.0, std::abs(a)));
    q.push_back(3.0 + 0.5 * t + ((t * 7) % 5) - 2.0);
  }
  // A different history of the same length forces a rebuild.
  std::vector<double> other(q.size(), 1.0);
  LeastSquaresLinearOracle fresh;
  EXPECT_NEAR(inc.predict(other, 61, 100), fresh.predict(other, 61, 100),
              1e-9);
}

TEST(Ar1Ridge, NormalEquationsExample) {
  Ar1RidgeOracle o(1.0);
  const std::vector<double> q{2.0, 3.0};
  o.predict(q, 3, 10);
  const auto ne = o.normal_equations();
  EXPECT_DOUBLE_EQ(ne.v00, 3.0);
  EXPECT_DOUBLE_EQ(ne.v01, 2.0);
  EXPECT_DOUBLE_EQ(ne.v11, 5.0);
  EXPECT_DOUBLE_EQ(ne.z0, 5.0);
  EXPECT_DOUBLE_EQ(ne.z1, 6.0);
  const auto [alpha, beta] = o.estimate();
  EXPECT_NEAR(alpha, 13.0 / 11.0, 1e-12);
  EXPECT_NEAR(beta, 8.0 / 11.0, 1e-12);
}

TEST(Ar1Ridge, TracksNoiselessSeries) {
  const int T = 2000;
  std::vector<double> q{12.0};
  while (static_cast<int>(q.size()) < T) q.push_back(12.0 + 0.5 * q.back());
  double total = 0.0;
  for (double v : q) total += v;
  Ar1RidgeOracle o(1.0, 12.0);
  for (int t : {64, 256, 1024}) {
    const std::span<const double> prefix(q.data(), t - 1);
    EXPECT_NEAR(o.predict(prefix, t, T), total, 0.01 * total) << t;
  }
}

TEST(Ar1Ridge, RejectsNonPositiveRidge) {
  EXPECT_THROW(Ar1RidgeOracle(0.0), ConfigError);
}

TEST(PowerOfTwo, RefreshRounds) {
  for (int t : {1, 2, 4, 8, 16, 1024}) EXPECT_TRUE(PowerOfTwoOracle::refresh_round(t));
  for (int t : {0, 3, 5, 6, 7, 12, 1023}) EXPECT_FALSE(PowerOfTwoOracle::refresh_round(t));
}

TEST(PowerOfTwo, RepeatsBetweenRefreshes) {
  auto inner = std::make_unique<CountingOracle>();
  CountingOracle* raw = inner.get();
  PowerOfTwoOracle o(std::move(inner));
  o.reset();
  std::vector<double> out;
  for (int t = 1; t <= 9; ++t) out.push_back(o.predict({}, t, 9));
  EXPECT_EQ(out, (std::vector<double>{100, 200, 200, 400, 400, 400, 400, 800,
                                      800}));
  EXPECT_EQ(raw->calls, 4);
  EXPECT_EQ(o.name(), "pow2(counting)");
}

TEST(StaticOffset, ValuesAndLabels) {
  StaticOffsetOracle plus(40000.0, 5.0, 50000);
  EXPECT_DOUBLE_EQ(plus.predict({}, 1, 50000), 290000.0);
  EXPECT_DOUBLE_EQ(make_clairvoyant(40000.0, 50000)->predict({}, 7, 50000),
                   40000.0);
  EXPECT_EQ(StaticOffsetOracle::label(5.0), "+5T");
  EXPECT_EQ(StaticOffsetOracle::label(-0.5), "-0.5T");
  EXPECT_EQ(StaticOffsetOracle::label(0.0), "clairvoyant");
}
