#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bwk/confidence.hpp"
#include "bwk/errors.hpp"
#include "bwk/model.hpp"
#include "bwk/oaucb.hpp"

namespace bwk {

struct PdbConfig {
  double delta = 0.0;       // <= 0 selects 1/T
  double step = 0.0;        // epsilon_mw; <= 0 selects sqrt(ln d / B)
  double min_step = 1e-6;
  double max_step = 0.99;
  double denominator_floor = 1e-9;
};

// Primal-dual BwK reconstruction. Pulls every non-null arm once, then keeps
// multiplicative weights over the resources, w_i <- w_i (1+eps)^{LCB_c(A_t,i)},
// and picks argmax UCB_r(a) / max(w_hat' LCB_c(a), floor).
class PdbPolicy final : public Policy {
 public:
  explicit PdbPolicy(PdbConfig config = {}) : config_(config) {}

  std::string name() const override { return "pdb"; }

  static double default_step(std::size_t num_resources, double budget) {
    return std::sqrt(std::log(static_cast<double>(num_resources)) / budget);
  }

  void reset(const ProblemInfo& info) override {
    info_ = info;
    delta_ = config_.delta > 0.0
                 ? config_.delta
                 : ConfidenceParams::for_horizon(info.horizon).delta;
    ConfidenceParams{delta_}.validate();
    const double raw = config_.step > 0.0
                           ? config_.step
                           : default_step(info.num_resources, info.budget);
    step_ = std::clamp(raw, config_.min_step, config_.max_step);
    stats_ = ArmStatistics(info.num_actions, info.num_resources);
    log_weights_.assign(info.num_resources, 0.0);
    weights_.assign(info.num_resources, 1.0 / info.num_resources);
    lcb_.assign(info.num_resources, 0.0);
    next_unpulled_ = 0;
  }

  std::size_t select(const RoundContext&) override {
    while (next_unpulled_ < info_.num_actions &&
           (next_unpulled_ == info_.null_index ||
            stats_.count(next_unpulled_) > 0)) {
      ++next_unpulled_;
    }
    if (next_unpulled_ < info_.num_actions) return next_unpulled_;

    std::size_t best = info_.null_index;
    double best_score = 0.0;
    bool first = true;
    for (std::size_t a = 0; a < info_.num_actions; ++a) {
      double score = 0.0;
      if (a != info_.null_index) {
        double denom = 0.0;
        for (std::size_t i = 0; i < info_.num_resources; ++i) {
          denom += weights_[i] * lcb_cost(stats_, a, i, delta_, info_.null_index);
        }
        score = ucb_reward(stats_, a, delta_, info_.null_index) /
                std::max(denom, config_.denominator_floor);
      }
      if (first || score > best_score) {
        best = a;
        best_score = score;
        first = false;
      }
    }
    return best;
  }

  void observe(const RoundFeedback& fb, std::size_t action) override {
    for (std::size_t i = 0; i < info_.num_resources; ++i) {
      lcb_[i] = lcb_cost(stats_, action, i, delta_, info_.null_index);
    }
    if (action != info_.null_index) {
      stats_.record(action, fb.per_unit_reward, fb.per_unit_cost);
    }
    // Log domain keeps (1+eps)^x representable for long runs.
    const double log_base = std::log1p(step_);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < info_.num_resources; ++i) {
      log_weights_[i] += log_base * lcb_[i];
      top = std::max(top, log_weights_[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < info_.num_resources; ++i) {
      weights_[i] = std::exp(log_weights_[i] - top);
      total += weights_[i];
    }
    for (double& w : weights_) w /= total;
  }

  std::span<const double> dual_weights() const override { return weights_; }

  double step() const noexcept { return step_; }
  const ArmStatistics& statistics() const noexcept { return stats_; }

 private:
  PdbConfig config_;
  ProblemInfo info_;
  double delta_ = 0.0;
  double step_ = 0.0;
  ArmStatistics stats_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  std::vector<double> lcb_;
  std::size_t next_unpulled_ = 0;
};

inline std::size_t default_sw_window(int horizon) {
  return 4 * static_cast<std::size_t>(
                 std::ceil(std::sqrt(static_cast<double>(horizon))));
}

// Sliding-window UCB: OA-UCB restricted to the last W rounds, with Q-hat
// replaced by the running mean demand times T. window = 0 picks 4 ceil(sqrt T).
inline OaUcbPolicy make_sw_ucb(int horizon, std::size_t window = 0,
                               double delta = 0.0) {
  if (window == 0) window = default_sw_window(horizon);
  OaUcbConfig cfg;
  cfg.delta = delta;
  cfg.window = window;
  cfg.mean_demand_prediction = true;
  return OaUcbPolicy(cfg, "sw-ucb");
}

// Budget-blind control: argmax UCB_r.
class GreedyUcbPolicy final : public Policy {
 public:
  explicit GreedyUcbPolicy(double delta = 0.0) : config_delta_(delta) {}

  std::string name() const override { return "greedy-ucb"; }

  void reset(const ProblemInfo& info) override {
    info_ = info;
    delta_ = config_delta_ > 0.0
                 ? config_delta_
                 : ConfidenceParams::for_horizon(info.horizon).delta;
    ConfidenceParams{delta_}.validate();
    stats_ = ArmStatistics(info.num_actions, info.num_resources);
    scores_.assign(info.num_actions, 0.0);
  }

  std::size_t select(const RoundContext&) override {
    for (std::size_t a = 0; a < info_.num_actions; ++a) {
      scores_[a] = ucb_reward(stats_, a, delta_, info_.null_index);
    }
    return argmax_lowest(scores_);
  }

  void observe(const RoundFeedback& fb, std::size_t action) override {
    if (action != info_.null_index) {
      stats_.record(action, fb.per_unit_reward, fb.per_unit_cost);
    }
  }

 private:
  double config_delta_;
  ProblemInfo info_;
  double delta_ = 0.0;
  ArmStatistics stats_;
  std::vector<double> scores_;
};

// Always plays one action.
class FixedActionPolicy final : public Policy {
 public:
  explicit FixedActionPolicy(std::size_t action) : action_(action) {}
  std::string name() const override {
    return "fixed-" + std::to_string(action_);
  }
  void reset(const ProblemInfo& info) override {
    if (action_ >= info.num_actions) {
      throw ArgumentError("fixed policy: action out of range");
    }
  }
  std::size_t select(const RoundContext&) override { return action_; }
  void observe(const RoundFeedback&, std::size_t) override {}

 private:
  std::size_t action_;
};

// Plays a scripted sequence, then the last entry forever.
class ReplayPolicy final : public Policy {
 public:
  explicit ReplayPolicy(std::vector<std::size_t> script)
      : script_(std::move(script)) {
    if (script_.empty()) throw ArgumentError("replay policy: empty script");
  }
  std::string name() const override { return "replay"; }
  void reset(const ProblemInfo&) override { pos_ = 0; }
  std::size_t select(const RoundContext&) override {
    const std::size_t a = script_[std::min(pos_, script_.size() - 1)];
    ++pos_;
    return a;
  }
  void observe(const RoundFeedback&, std::size_t) override {}

 private:
  std::vector<std::size_t> script_;
  std::size_t pos_ = 0;
};

}  // namespace bwk
