#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "bwk/model.hpp"
#include "bwk/rng.hpp"
#include "bwk/truncated_normal.hpp"

namespace bwk {

// Per-coordinate truncated-normal outcomes on [0,1]. Each coordinate's
// location is calibrated so the mean *after* truncation equals the target
// mean; targets of exactly 0 or 1 (and the null action) are returned as is.
class OutcomeSampler {
 public:
  OutcomeSampler(const std::vector<double>& mean_reward,
                 const Matrix& mean_cost, std::size_t null_index,
                 OutcomeNoise noise)
      : null_index_(null_index),
        num_resources_(mean_cost.cols()),
        noise_(noise) {
    const std::size_t k = mean_reward.size();
    const std::size_t width = num_resources_ + 1;
    targets_.resize(k * width);
    locations_.resize(k * width);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t c = 0; c < width; ++c) {
        const double m = c == 0 ? mean_reward[a] : mean_cost(a, c - 1);
        if (!(m >= 0.0 && m <= 1.0)) {
          throw ConfigError("outcome sampler: target mean outside [0,1]");
        }
        targets_[a * width + c] = m;
        locations_[a * width + c] = m;
        if (a != null_index && noise.kind == NoiseKind::truncated_normal &&
            m > 0.0 && m < 1.0) {
          locations_[a * width + c] =
              calibrate_truncated_location(m, noise.sigma);
        }
      }
    }
  }

  std::size_t num_resources() const noexcept { return num_resources_; }

  double location(std::size_t a, std::size_t coord) const {
    return locations_[a * (num_resources_ + 1) + coord];
  }

  // Draws (R, C_1..C_d) for action `a`.
  template <typename Engine>
  void sample(std::size_t a, Engine& rng, Outcome& out) const {
    out.cost.assign(num_resources_, 0.0);
    out.product_demand.clear();
    if (a == null_index_) {
      out.reward = 0.0;
      return;
    }
    const std::size_t width = num_resources_ + 1;
    for (std::size_t c = 0; c < width; ++c) {
      const double m = targets_[a * width + c];
      double v = m;
      if (noise_.kind == NoiseKind::truncated_normal && m > 0.0 && m < 1.0) {
        const double loc = locations_[a * width + c];
        const double s = noise_.sigma;
        const double z = truncated_standard_normal_quantile(
            (0.0 - loc) / s, (1.0 - loc) / s, uniform_open01(rng));
        v = std::clamp(loc + s * z, 0.0, 1.0);
      }
      if (c == 0) {
        out.reward = v;
      } else {
        out.cost[c - 1] = v;
      }
    }
  }

 private:
  std::size_t null_index_;
  std::size_t num_resources_;
  OutcomeNoise noise_;
  std::vector<double> targets_;
  std::vector<double> locations_;
};

// Outcome source for EnvironmentSpec runs: draws for round t and action a come
// from a stream seeded by (seed, t, a), independent of pull order.
class SpecOutcomeSource final : public OutcomeSource {
 public:
  SpecOutcomeSource(const EnvironmentSpec& spec, std::uint64_t seed)
      : sampler_(spec.mean_reward, spec.mean_cost, spec.null_index,
                 spec.noise),
        seed_(seed) {}

  void sample(int t, std::size_t action, double /*demand*/,
              Outcome& out) const override {
    SplitMix64 rng(derive_seed(seed_, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(action)));
    sampler_.sample(action, rng, out);
  }

  const OutcomeSampler& sampler() const noexcept { return sampler_; }

 private:
  OutcomeSampler sampler_;
  std::uint64_t seed_;
};

}  // namespace bwk
