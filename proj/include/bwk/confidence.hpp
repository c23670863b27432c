#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bwk/errors.hpp"

namespace bwk {

/// Confidence radius for the mean of [0,1]-supported samples:
///
///   rad(v, N, delta) = sqrt(2 v log(1/delta) / N) + 4 log(1/delta) / N
///
/// `v` is the empirical mean the radius is centred on and `n` the (positive)
/// sample count. Throws ArgumentError outside v >= 0, n >= 1, 0 < delta < 1.
inline double rad(double v, double n, double delta) {
  if (!(v >= 0.0) || !(n >= 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw ArgumentError("rad: require v >= 0, N >= 1, 0 < delta < 1 (got v=" +
                        std::to_string(v) + ", N=" + std::to_string(n) +
                        ", delta=" + std::to_string(delta) + ")");
  }
  const double log_inv = -std::log(delta);
  return std::sqrt(2.0 * v * log_inv / n) + 4.0 * log_inv / n;
}

struct ConfidenceParams {
  double delta = 0.0;

  static ConfidenceParams for_horizon(int horizon) {
    return {1.0 / static_cast<double>(std::max(horizon, 2))};
  }
  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ArgumentError("confidence: delta must lie in (0,1)");
    }
  }
};

// Per-action pull counts and running sums of per-unit outcomes.
//
// remove() exists for sliding-window statistics; it is the exact inverse of
// record() up to floating-point cancellation, which is why the means are
// clamped into [0,1].
class ArmStatistics {
 public:
  ArmStatistics() = default;
  ArmStatistics(std::size_t num_actions, std::size_t num_resources)
      : num_resources_(num_resources),
        counts_(num_actions, 0),
        reward_sum_(num_actions, 0.0),
        cost_sum_(num_actions * num_resources, 0.0) {}

  std::size_t num_actions() const noexcept { return counts_.size(); }
  std::size_t num_resources() const noexcept { return num_resources_; }

  void record(std::size_t a, double reward, std::span<const double> cost) {
    ++counts_[a];
    reward_sum_[a] += reward;
    for (std::size_t i = 0; i < num_resources_; ++i) {
      cost_sum_[a * num_resources_ + i] += cost[i];
    }
  }

  void remove(std::size_t a, double reward, std::span<const double> cost) {
    --counts_[a];
    reward_sum_[a] -= reward;
    for (std::size_t i = 0; i < num_resources_; ++i) {
      cost_sum_[a * num_resources_ + i] -= cost[i];
    }
    if (counts_[a] == 0) {
      reward_sum_[a] = 0.0;
      for (std::size_t i = 0; i < num_resources_; ++i) {
        cost_sum_[a * num_resources_ + i] = 0.0;
      }
    }
  }

  long count(std::size_t a) const noexcept { return counts_[a]; }
  // N+ = max(N, 1); every division uses it.
  double count_plus(std::size_t a) const noexcept {
    return static_cast<double>(std::max(counts_[a], 1L));
  }
  double mean_reward(std::size_t a) const noexcept {
    return std::clamp(reward_sum_[a] / count_plus(a), 0.0, 1.0);
  }
  double mean_cost(std::size_t a, std::size_t i) const noexcept {
    return std::clamp(cost_sum_[a * num_resources_ + i] / count_plus(a), 0.0,
                      1.0);
  }

 private:
  std::size_t num_resources_ = 0;
  std::vector<long> counts_;
  std::vector<double> reward_sum_;
  std::vector<double> cost_sum_;
};

/// min{ R(a) + rad(R(a), N+(a), delta), 1 }; exactly 0 for the null action.
inline double ucb_reward(const ArmStatistics& stats, std::size_t a,
                         double delta, std::size_t null_index) {
  if (a == null_index) return 0.0;
  const double mean = stats.mean_reward(a);
  return std::min(mean + rad(mean, stats.count_plus(a), delta), 1.0);
}

/// max{ C(a,i) - rad(C(a,i), N+(a), delta), 0 } for i < d. Index i == d is
/// the null resource and the null action consumes nothing; both give 0.
inline double lcb_cost(const ArmStatistics& stats, std::size_t a,
                       std::size_t i, double delta, std::size_t null_index) {
  if (i == stats.num_resources() || a == null_index) return 0.0;
  const double mean = stats.mean_cost(a, i);
  return std::max(mean - rad(mean, stats.count_plus(a), delta), 0.0);
}

}  // namespace bwk
