#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>

#include "bwk/errors.hpp"
#include "bwk/model.hpp"

namespace bwk {

namespace detail {

// sum_{s=lo}^{hi} s, for lo <= hi + 1.
inline double index_sum(double lo, double hi) {
  if (hi < lo) return 0.0;
  return 0.5 * (lo + hi) * (hi - lo + 1.0);
}

// Tracks how much of a growing prefix has been absorbed so that oracles
// called once per round stay O(1) amortised. A prefix shorter than the cached
// one, or one whose last absorbed value changed, triggers a rebuild.
class PrefixCursor {
 public:
  // Returns the index from which new values must be absorbed; 0 means the
  // caller must rebuild its state.
  std::size_t sync(std::span<const double> prefix) {
    if (prefix.size() < absorbed_ ||
        (absorbed_ > 0 && prefix[absorbed_ - 1] != last_)) {
      absorbed_ = 0;
    }
    const std::size_t from = absorbed_;
    absorbed_ = prefix.size();
    if (absorbed_ > 0) last_ = prefix[absorbed_ - 1];
    return from;
  }
  void reset() { absorbed_ = 0; }

 private:
  std::size_t absorbed_ = 0;
  double last_ = 0.0;
};

}  // namespace detail

/// Least-squares fit of q_s = alpha + beta s on the prefix, extrapolated:
///   Q-hat_t = sum_{s<t} q_s + sum_{s=t}^{T} (alpha-hat + beta-hat s).
/// Rounds t <= 3 fall back to mean(prefix) * T, or prior_mean * T on an
/// empty prefix.
class LeastSquaresLinearOracle final : public PredictionOracle {
 public:
  explicit LeastSquaresLinearOracle(double prior_mean = 1.0)
      : prior_mean_(prior_mean) {}

  std::string name() const override { return "ls-linear"; }
  void reset() override {
    cursor_.reset();
    sum_q_ = sum_sq_ = 0.0;
  }

  struct Fit {
    double alpha;
    double beta;
  };

  // Closed-form estimates from n = t-1 >= 2 points.
  Fit fit(std::size_t n) const {
    const double nn = static_cast<double>(n);
    const double sum_s = detail::index_sum(1.0, nn);
    const double sum_s2 = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 6.0;
    const double beta =
        (nn * sum_sq_ - sum_s * sum_q_) / (nn * sum_s2 - sum_s * sum_s);
    const double alpha = (sum_q_ - beta * sum_s) / nn;
    return {alpha, beta};
  }

  double predict(std::span<const double> prefix, int t, int horizon) override {
    absorb(prefix);
    const std::size_t n = prefix.size();
    const double T = horizon;
    if (n == 0) return prior_mean_ * T;
    if (t <= 3) return sum_q_ / static_cast<double>(n) * T;
    const Fit f = fit(n);
    return sum_q_ + (T - t + 1.0) * f.alpha +
           f.beta * detail::index_sum(static_cast<double>(t), T);
  }

 private:
  void absorb(std::span<const double> prefix) {
    std::size_t from = cursor_.sync(prefix);
    if (from == 0) sum_q_ = sum_sq_ = 0.0;
    for (; from < prefix.size(); ++from) {
      sum_q_ += prefix[from];
      sum_sq_ += static_cast<double>(from + 1) * prefix[from];
    }
  }

  double prior_mean_;
  detail::PrefixCursor cursor_;
  double sum_q_ = 0.0;   // sum q_s
  double sum_sq_ = 0.0;  // sum s q_s
};

/// Ridge-regularised AR(1) fit q_s ~ alpha + beta q_{s-1} (q_0 = 0) with the
/// closed-form multi-step extrapolation of the fitted recursion. beta-hat is
/// clamped to [-0.999, 0.999] before forming phi-hat = alpha-hat/(1-beta-hat).
/// Rounds t <= 2 fall back to mean(prefix) * T, or prior_mean * T.
class Ar1RidgeOracle final : public PredictionOracle {
 public:
  static constexpr double kBetaClamp = 0.999;

  explicit Ar1RidgeOracle(double ridge = 1.0, double prior_mean = 1.0)
      : ridge_(ridge), prior_mean_(prior_mean) {
    if (!(ridge > 0.0)) throw ConfigError("ar1-ridge: lambda must be > 0");
  }

  std::string name() const override { return "ar1-ridge"; }
  void reset() override {
    cursor_.reset();
    clear();
  }

  // Normal equations V gamma = zeta; V is symmetric so three entries suffice.
  struct Normal {
    double v00, v01, v11;
    double z0, z1;
  };
  Normal normal_equations() const {
    return {ridge_ + n_, sum_prev_, ridge_ + sum_prev_sq_, sum_q_,
            sum_prev_q_};
  }

  // gamma-hat = V^{-1} zeta, before clamping.
  std::pair<double, double> estimate() const {
    const Normal ne = normal_equations();
    const double det = ne.v00 * ne.v11 - ne.v01 * ne.v01;
    return {(ne.v11 * ne.z0 - ne.v01 * ne.z1) / det,
            (ne.v00 * ne.z1 - ne.v01 * ne.z0) / det};
  }

  double predict(std::span<const double> prefix, int t, int horizon) override {
    absorb(prefix);
    const std::size_t n = prefix.size();
    const double T = horizon;
    if (n == 0) return prior_mean_ * T;
    if (t <= 2) return sum_q_ / static_cast<double>(n) * T;

    auto [alpha, beta] = estimate();
    beta = std::clamp(beta, -kBetaClamp, kBetaClamp);
    const double phi = alpha / (1.0 - beta);
    const double remaining = T - t + 1.0;
    const double last = prefix.back();
    return sum_q_ + (beta - std::pow(beta, remaining)) / (1.0 - beta) * last +
           phi * (remaining - beta + std::pow(beta, remaining + 1.0));
  }

 private:
  void clear() {
    n_ = sum_prev_ = sum_prev_sq_ = sum_q_ = sum_prev_q_ = 0.0;
  }
  void absorb(std::span<const double> prefix) {
    std::size_t from = cursor_.sync(prefix);
    if (from == 0) clear();
    for (; from < prefix.size(); ++from) {
      const double prev = from == 0 ? 0.0 : prefix[from - 1];
      const double q = prefix[from];
      n_ += 1.0;
      sum_prev_ += prev;
      sum_prev_sq_ += prev * prev;
      sum_q_ += q;
      sum_prev_q_ += prev * q;
    }
  }

  double ridge_;
  double prior_mean_;
  detail::PrefixCursor cursor_;
  double n_ = 0.0;
  double sum_prev_ = 0.0;
  double sum_prev_sq_ = 0.0;
  double sum_q_ = 0.0;
  double sum_prev_q_ = 0.0;
};

// Recomputes through the wrapped oracle only at t = 1 and t = 2^k (k >= 1);
// every other round repeats the previous prediction.
class PowerOfTwoOracle final : public PredictionOracle {
 public:
  explicit PowerOfTwoOracle(std::unique_ptr<PredictionOracle> inner)
      : inner_(std::move(inner)) {
    if (!inner_) throw ArgumentError("power-of-two: null inner oracle");
  }

  static bool refresh_round(int t) {
    return t == 1 || (t > 1 && (t & (t - 1)) == 0);
  }

  std::string name() const override { return "pow2(" + inner_->name() + ")"; }
  void reset() override {
    inner_->reset();
    last_ = 0.0;
  }
  double predict(std::span<const double> prefix, int t, int horizon) override {
    if (refresh_round(t)) last_ = inner_->predict(prefix, t, horizon);
    return last_;
  }

 private:
  std::unique_ptr<PredictionOracle> inner_;
  double last_ = 0.0;
};

// Q-hat_t = Q + x T for every t. x = 0 is the clairvoyant oracle.
class StaticOffsetOracle final : public PredictionOracle {
 public:
  StaticOffsetOracle(double true_total, double offset, int horizon)
      : value_(true_total + offset * horizon), offset_(offset) {}

  static std::string label(double offset) {
    if (offset == 0.0) return "clairvoyant";
    std::ostringstream os;
    os << (offset > 0 ? "+" : "") << offset << "T";
    return os.str();
  }

  std::string name() const override { return label(offset_); }
  void reset() override {}
  double predict(std::span<const double>, int, int) override { return value_; }

 private:
  double value_;
  double offset_;
};

inline std::unique_ptr<PredictionOracle> make_clairvoyant(double true_total,
                                                          int horizon) {
  return std::make_unique<StaticOffsetOracle>(true_total, 0.0, horizon);
}

}  // namespace bwk
