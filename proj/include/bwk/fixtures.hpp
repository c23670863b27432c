#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "bwk/errors.hpp"
#include "bwk/model.hpp"

namespace bwk {

/// Two-action lower-bound instances with deterministic outcomes:
/// r = (1, 3/4, 0), c = (1, 1/2, 0) with the null action last, B = T/2.
/// which = 1: demand 1 for t <= T/2 and 1/16 afterwards; which = 2: all ones.
inline EnvironmentSpec fixture_lower_bound(int which, int horizon) {
  if (which != 1 && which != 2) {
    throw ArgumentError("fixture_lower_bound: which must be 1 or 2");
  }
  if (horizon < 2 || horizon % 2 != 0) {
    throw ArgumentError("fixture_lower_bound: T must be a positive even integer");
  }
  EnvironmentSpec spec;
  spec.mean_reward = {1.0, 0.75, 0.0};
  spec.mean_cost = Matrix{{1.0}, {0.5}, {0.0}};
  spec.null_index = 2;
  spec.horizon = horizon;
  spec.normalized_budget = 0.5;
  spec.noise = {NoiseKind::deterministic, 1.0};

  std::vector<double> q(static_cast<std::size_t>(horizon), 1.0);
  if (which == 1) {
    for (std::size_t t = static_cast<std::size_t>(horizon / 2); t < q.size();
         ++t) {
      q[t] = 1.0 / 16.0;
    }
  }
  spec.demand = ExplicitDemand{std::move(q)};
  return spec;
}

/// Instance pair sharing a demand prefix of length T0 whose totals straddle
/// the prediction: Q(1) = Q-hat - eps, Q(2) = Q-hat + eps. Both use
/// c = (Q-hat - eps)/(Q-hat + eps), r = (1, (1+c)/2, 0), cost = (1, c, 0),
/// B = Q-hat - eps and a constant tail demand.
inline std::pair<EnvironmentSpec, EnvironmentSpec> fixture_straddle_pair(
    std::span<const double> prefix, double prediction, double eps,
    int horizon, int t0) {
  if (!(eps > 0.0) || !(eps <= prediction / 2.0)) {
    throw ArgumentError("fixture_straddle_pair: need 0 < eps <= Q-hat / 2");
  }
  if (t0 < 0 || t0 >= horizon) {
    throw ArgumentError("fixture_straddle_pair: need 0 <= T0 < T");
  }
  if (prefix.size() != static_cast<std::size_t>(t0)) {
    throw ArgumentError("fixture_straddle_pair: prefix length must equal T0");
  }
  const double head = std::accumulate(prefix.begin(), prefix.end(), 0.0);
  const double c = (prediction - eps) / (prediction + eps);
  const double budget = prediction - eps;
  const int tail_rounds = horizon - t0;

  auto build = [&](double total) {
    const double tail = (total - head) / tail_rounds;
    if (!(tail > 0.0)) {
      throw ArgumentError(
          "fixture_straddle_pair: prefix demand leaves no positive tail");
    }
    EnvironmentSpec spec;
    spec.mean_reward = {1.0, (1.0 + c) / 2.0, 0.0};
    spec.mean_cost = Matrix{{1.0}, {c}, {0.0}};
    spec.null_index = 2;
    spec.horizon = horizon;
    spec.normalized_budget = budget / horizon;
    spec.noise = {NoiseKind::deterministic, 1.0};
    std::vector<double> q(prefix.begin(), prefix.end());
    q.resize(static_cast<std::size_t>(horizon), tail);
    spec.demand = ExplicitDemand{std::move(q)};
    return spec;
  };
  return {build(prediction - eps), build(prediction + eps)};
}

}  // namespace bwk
