#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bwk/demand.hpp"
#include "bwk/errors.hpp"
#include "bwk/matrix.hpp"

namespace bwk {

enum class NoiseKind { truncated_normal, deterministic };

struct OutcomeNoise {
  NoiseKind kind = NoiseKind::truncated_normal;
  double sigma = 1.0;  // pre-truncation scale
};

// Ground truth of a generic bandits-with-knapsacks run.
struct EnvironmentSpec {
  std::vector<double> mean_reward;  // r(a), length K
  Matrix mean_cost;                 // c(a, i), K x d
  std::size_t null_index = 0;
  double normalized_budget = 0.0;   // b
  int horizon = 0;                  // T
  DemandModel demand = ExplicitDemand{};
  OutcomeNoise noise;

  std::size_t num_actions() const noexcept { return mean_reward.size(); }
  std::size_t num_resources() const noexcept { return mean_cost.cols(); }
  double budget() const noexcept { return normalized_budget * horizon; }

  void validate() const {
    const std::size_t k = num_actions();
    if (k == 0 || mean_cost.rows() != k) {
      throw ConfigError("environment: reward/cost dimensions disagree");
    }
    if (num_resources() == 0) {
      throw ConfigError("environment: need at least one resource");
    }
    if (null_index >= k) {
      throw ConfigError("environment: no null action (null_index " +
                        std::to_string(null_index) + " out of range)");
    }
    if (mean_reward[null_index] != 0.0) {
      throw ConfigError("environment: null action must have zero reward");
    }
    for (std::size_t a = 0; a < k; ++a) {
      if (!(mean_reward[a] >= 0.0 && mean_reward[a] <= 1.0)) {
        throw ConfigError("environment: rewards must lie in [0,1]");
      }
      for (std::size_t i = 0; i < num_resources(); ++i) {
        const double c = mean_cost(a, i);
        if (!(c >= 0.0 && c <= 1.0)) {
          throw ConfigError("environment: costs must lie in [0,1]");
        }
        if (a == null_index && c != 0.0) {
          throw ConfigError("environment: null action must consume nothing");
        }
      }
    }
    if (!(normalized_budget > 0.0)) {
      throw ConfigError("environment: budget must be positive");
    }
    if (horizon < 1) throw ConfigError("environment: horizon must be >= 1");
    if (noise.kind == NoiseKind::truncated_normal && !(noise.sigma > 0.0)) {
      throw ConfigError("environment: outcome sigma must be positive");
    }
  }
};

// What every policy is told up front. The null action's semantics (zero
// reward, zero consumption) are part of it.
struct ProblemInfo {
  std::size_t num_actions = 0;
  std::size_t num_resources = 0;
  std::size_t null_index = 0;
  double budget = 0.0;  // B, identical for every resource
  int horizon = 0;

  static ProblemInfo from(const EnvironmentSpec& spec) {
    return {spec.num_actions(), spec.num_resources(), spec.null_index,
            spec.budget(), spec.horizon};
  }
};

struct RoundContext {
  int t = 0;                               // 1-based round index
  double prediction = 0.0;                 // Q-hat_t
  std::span<const double> demand_prefix;   // q_1 .. q_{t-1}
  std::span<const double> consumed;        // cumulative use per resource
};

// Per-unit outcome drawn for one (round, action) pair.
struct Outcome {
  double reward = 0.0;
  std::vector<double> cost;
  std::vector<double> product_demand;  // NRM only: D_{t,j}
};

struct RoundFeedback {
  int t = 0;
  double demand = 0.0;      // q_t
  double prediction = 0.0;  // Q-hat_t
  double per_unit_reward = 0.0;
  std::vector<double> per_unit_cost;
  std::vector<double> product_demand;

  double reward() const noexcept { return demand * per_unit_reward; }
  double consumption(std::size_t i) const noexcept {
    return demand * per_unit_cost[i];
  }
};

struct RoundRecord {
  RoundFeedback feedback;
  std::size_t action = 0;
  std::vector<double> dual_weights;  // mu_t used for this round's choice
};

struct TrajectoryLog {
  std::vector<RoundRecord> rounds;
  int stopping_time = 0;      // tau in [1, T+1]
  double total_reward = 0.0;  // sum_{t < tau} q_t R_t
  double realized_demand = 0.0;
  std::vector<double> consumed;  // sum_{t < tau} q_t C_t, per resource

  std::vector<std::size_t> actions() const {
    std::vector<std::size_t> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.action);
    return out;
  }
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void reset(const ProblemInfo& info) = 0;
  virtual std::size_t select(const RoundContext& ctx) = 0;
  virtual void observe(const RoundFeedback& feedback, std::size_t action) = 0;
  // Current dual weights, empty for policies without them.
  virtual std::span<const double> dual_weights() const { return {}; }
};

class PredictionOracle {
 public:
  virtual ~PredictionOracle() = default;
  virtual std::string name() const = 0;
  virtual void reset() = 0;
  // Prediction of Q = sum_t q_t from q_1 .. q_{t-1}; prefix.size() == t-1.
  virtual double predict(std::span<const double> prefix, int t,
                         int horizon) = 0;
};

// Source of per-unit outcomes. Implementations index randomness by
// (round, action) so that different policies see paired draws.
class OutcomeSource {
 public:
  virtual ~OutcomeSource() = default;
  virtual void sample(int t, std::size_t action, double demand,
                      Outcome& out) const = 0;
};

struct RunMetrics {
  double regret = 0.0;
  double competitive_ratio = 0.0;
};

inline RunMetrics compute_metrics(const TrajectoryLog& log,
                                  double opt_lp_value) {
  if (!(opt_lp_value > 0.0)) {
    throw ConfigError("metrics: OPT_LP must be positive");
  }
  return {opt_lp_value - log.total_reward, log.total_reward / opt_lp_value};
}

}  // namespace bwk
