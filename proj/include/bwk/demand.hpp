#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bwk/errors.hpp"
#include "bwk/rng.hpp"

namespace bwk {

// q_t = alpha + beta t + xi_t, xi_t ~ Uniform[-M, M].
struct LinearDemandParams {
  double alpha = 0.0;
  double beta = 0.0;
  double noise_halfwidth = 0.0;  // M

  void validate() const {
    if (!(noise_halfwidth >= 0.0) || !(alpha > noise_halfwidth) ||
        !(beta > 0.0)) {
      throw ConfigError(
          "linear demand: need alpha > M >= 0 and beta > 0 so that every "
          "q_t is positive");
    }
  }
};

// q_t = alpha + beta q_{t-1} + xi_t, xi_t ~ Normal(0, sigma^2), started at q1.
struct Ar1DemandParams {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
  double q1 = 0.0;

  void validate() const {
    if (!(alpha > 0.0) || !(std::abs(beta) < 1.0) || !(sigma >= 0.0) ||
        !(q1 > 0.0)) {
      throw ConfigError(
          "AR(1) demand: need alpha > 0, |beta| < 1, sigma >= 0, q1 > 0");
    }
  }

  double stationary_mean() const { return alpha / (1.0 - beta); }

  // sigma * sqrt(2 / (1 - beta^2) * log(2 / delta)).
  double deviation_bound(double delta) const {
    return sigma * std::sqrt(2.0 / (1.0 - beta * beta) * std::log(2.0 / delta));
  }

  // [q_low, q_high] that the series stays within with high probability.
  std::pair<double, double> high_probability_bounds(double delta) const {
    const double dev = deviation_bound(delta);
    const double lo = std::min(q1, stationary_mean());
    const double hi = std::max(q1, stationary_mean());
    return {lo - dev, hi + dev};
  }

  // Positivity condition min{q1, alpha/(1-beta)} > deviation_bound(delta).
  // Violations are reported, never rejected.
  std::optional<std::string> positivity_warning(double delta) const {
    const double lo = std::min(q1, stationary_mean());
    if (lo > deviation_bound(delta)) return std::nullopt;
    return "AR(1) demand: positivity condition fails at delta=" +
           std::to_string(delta) + "; negative draws will be floored at 0";
  }
};

// A fixed, fully specified sequence (used by the lower-bound fixtures).
struct ExplicitDemand {
  std::vector<double> values;
};

using DemandModel =
    std::variant<LinearDemandParams, Ar1DemandParams, ExplicitDemand>;

struct DemandSeries {
  std::vector<double> values;
  std::size_t floored = 0;  // AR(1) draws clamped up to 0

  double total() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
  }
};

inline DemandSeries gen_linear(const LinearDemandParams& params, int horizon,
                               std::uint64_t seed) {
  params.validate();
  SplitMix64 rng(seed);
  DemandSeries out;
  out.values.reserve(static_cast<std::size_t>(horizon));
  for (int t = 1; t <= horizon; ++t) {
    const double noise =
        params.noise_halfwidth * (2.0 * uniform01(rng) - 1.0);
    out.values.push_back(params.alpha + params.beta * t + noise);
  }
  return out;
}

inline DemandSeries gen_ar1(const Ar1DemandParams& params, int horizon,
                            std::uint64_t seed) {
  params.validate();
  SplitMix64 rng(seed);
  DemandSeries out;
  out.values.reserve(static_cast<std::size_t>(horizon));
  double prev = params.q1;
  for (int t = 1; t <= horizon; ++t) {
    double q = params.q1;
    if (t > 1) {
      q = params.alpha + params.beta * prev + params.sigma * standard_normal(rng);
      if (q < 0.0) {
        q = 0.0;
        ++out.floored;
      }
    }
    out.values.push_back(q);
    prev = q;
  }
  return out;
}

inline DemandSeries generate_demand(const DemandModel& model, int horizon,
                                    std::uint64_t seed) {
  if (horizon < 1) throw ConfigError("demand: horizon must be >= 1");
  struct Visitor {
    int horizon;
    std::uint64_t seed;
    DemandSeries operator()(const LinearDemandParams& p) const {
      return gen_linear(p, horizon, seed);
    }
    DemandSeries operator()(const Ar1DemandParams& p) const {
      return gen_ar1(p, horizon, seed);
    }
    DemandSeries operator()(const ExplicitDemand& p) const {
      if (p.values.size() != static_cast<std::size_t>(horizon)) {
        throw ConfigError("explicit demand: length " +
                          std::to_string(p.values.size()) +
                          " does not match horizon " + std::to_string(horizon));
      }
      for (double q : p.values) {
        if (!(q >= 0.0)) throw ConfigError("explicit demand: negative value");
      }
      return {p.values, 0};
    }
  };
  return std::visit(Visitor{horizon, seed}, model);
}

inline std::string demand_model_name(const DemandModel& model) {
  if (std::holds_alternative<LinearDemandParams>(model)) return "linear";
  if (std::holds_alternative<Ar1DemandParams>(model)) return "ar1";
  return "explicit";
}

}  // namespace bwk
