#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bwk/demand.hpp"
#include "bwk/model.hpp"
#include "bwk/outcomes.hpp"
#include "bwk/rng.hpp"

namespace bwk {

/// Plays one run of T rounds. Each round: the oracle predicts Q from the
/// demand prefix, the policy picks an action, the outcome is observed. The
/// first round whose consumption pushes any resource above B is the stopping
/// time tau: it is observed by the policy but its reward is not counted, and
/// every later round plays the null action. tau = T + 1 when no resource is
/// exhausted.
///
/// The policy and the oracle are reset before the first round.
inline TrajectoryLog simulate_run(const ProblemInfo& info,
                                  std::span<const double> demand,
                                  const OutcomeSource& outcomes,
                                  Policy& policy, PredictionOracle& oracle) {
  if (info.null_index >= info.num_actions) {
    throw ConfigError("simulate_run: problem has no null action");
  }
  if (demand.size() != static_cast<std::size_t>(info.horizon)) {
    throw ConfigError("simulate_run: demand length does not match horizon");
  }
  policy.reset(info);
  oracle.reset();

  const std::size_t d = info.num_resources;
  TrajectoryLog log;
  log.rounds.reserve(demand.size());
  log.consumed.assign(d, 0.0);
  log.stopping_time = info.horizon + 1;
  std::vector<double> running(d, 0.0);
  bool stopped = false;
  Outcome outcome;

  for (int t = 1; t <= info.horizon; ++t) {
    const auto prefix = demand.first(static_cast<std::size_t>(t - 1));
    const double q = demand[static_cast<std::size_t>(t - 1)];
    log.realized_demand += q;

    RoundRecord rec;
    rec.feedback.t = t;
    rec.feedback.demand = q;
    rec.feedback.prediction = oracle.predict(prefix, t, info.horizon);

    if (stopped) {
      rec.action = info.null_index;
      rec.feedback.per_unit_cost.assign(d, 0.0);
      log.rounds.push_back(std::move(rec));
      continue;
    }

    const RoundContext ctx{t, rec.feedback.prediction, prefix, running};
    const std::size_t action = policy.select(ctx);
    if (action >= info.num_actions) {
      throw ArgumentError("simulate_run: policy returned invalid action");
    }
    const auto mu = policy.dual_weights();
    rec.dual_weights.assign(mu.begin(), mu.end());
    rec.action = action;

    outcomes.sample(t, action, q, outcome);
    rec.feedback.per_unit_reward = outcome.reward;
    rec.feedback.per_unit_cost = outcome.cost;
    rec.feedback.product_demand = outcome.product_demand;
    policy.observe(rec.feedback, action);

    bool violated = false;
    for (std::size_t i = 0; i < d; ++i) {
      running[i] += rec.feedback.consumption(i);
      if (running[i] > info.budget) violated = true;
    }
    if (violated) {
      stopped = true;
      log.stopping_time = t;
    } else {
      log.total_reward += rec.feedback.reward();
      log.consumed = running;
    }
    log.rounds.push_back(std::move(rec));
  }
  return log;
}

struct SeedStreams {
  std::uint64_t demand;
  std::uint64_t outcome;

  static SeedStreams from(std::uint64_t master, std::uint64_t replication = 0) {
    return {derive_seed(master, "demand", replication),
            derive_seed(master, "outcome", replication)};
  }
};

/// Demand sequence a spec run with `seed` uses; lets callers build
/// clairvoyant oracles before simulating.
inline DemandSeries spec_demand(const EnvironmentSpec& spec,
                                std::uint64_t seed) {
  return generate_demand(spec.demand, spec.horizon,
                         SeedStreams::from(seed).demand);
}

inline TrajectoryLog simulate_run(const EnvironmentSpec& spec, Policy& policy,
                                  PredictionOracle& oracle,
                                  std::uint64_t seed) {
  spec.validate();
  const DemandSeries demand = spec_demand(spec, seed);
  const SpecOutcomeSource outcomes(spec, SeedStreams::from(seed).outcome);
  return simulate_run(ProblemInfo::from(spec), demand.values, outcomes, policy,
                      oracle);
}

}  // namespace bwk
