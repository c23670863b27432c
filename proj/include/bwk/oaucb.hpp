#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bwk/confidence.hpp"
#include "bwk/hedge.hpp"
#include "bwk/matrix.hpp"
#include "bwk/model.hpp"

namespace bwk {

/// Composite reward UCB_r(a) - (Q-hat/B) * mu' LCB_c(a) for every action,
/// where `lcb` is K x d and `mu` has d or d+1 entries (the null resource
/// coordinate contributes nothing).
inline std::vector<double> composite_scores(std::span<const double> ucb,
                                            const Matrix& lcb,
                                            std::span<const double> mu,
                                            double prediction_over_budget) {
  std::vector<double> scores(ucb.size());
  for (std::size_t a = 0; a < ucb.size(); ++a) {
    double penalty = 0.0;
    for (std::size_t i = 0; i < lcb.cols(); ++i) penalty += mu[i] * lcb(a, i);
    scores[a] = ucb[a] - prediction_over_budget * penalty;
  }
  return scores;
}

// First index attaining the maximum.
inline std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < scores.size(); ++a) {
    if (scores[a] > scores[best]) best = a;
  }
  return best;
}

/// OA-UCB action choice: argmax of the composite reward, ties to the lowest
/// index.
inline std::size_t oaucb_select(std::span<const double> ucb, const Matrix& lcb,
                                std::span<const double> mu,
                                double prediction_over_budget) {
  return argmax_lowest(
      composite_scores(ucb, lcb, mu, prediction_over_budget));
}

/// Dual loss gradient over the d+1 resources:
///   g = (q Q-hat / B) * ((B / Q-hat) beta - LCB_c(A_t)),  beta = (1,..,1,0).
/// `lcb_row` holds the d real-resource LCBs of the chosen action.
inline std::vector<double> oaucb_gradient(double demand, double prediction,
                                          double budget,
                                          std::span<const double> lcb_row) {
  const std::size_t d = lcb_row.size();
  std::vector<double> g(d + 1, 0.0);
  const double scale = demand * prediction / budget;
  for (std::size_t i = 0; i < d; ++i) {
    g[i] = demand - scale * lcb_row[i];
  }
  return g;
}

struct OaUcbConfig {
  double delta = 0.0;             // <= 0 selects 1/T
  double min_prediction = 1e-9;   // absolute floor on Q-hat
  std::size_t window = 0;         // 0 = all history; else sliding window
  bool mean_demand_prediction = false;  // replace Q-hat by mean(q) * T
};

// Online-advice UCB. Selection maximises the optimistic composite reward;
// AdaHedge updates the dual weights over the d real resources and one null
// resource from the prediction-scaled gradient. With `window` > 0 and
// `mean_demand_prediction` it becomes the sliding-window baseline.
class OaUcbPolicy : public Policy {
 public:
  explicit OaUcbPolicy(OaUcbConfig config = {}, std::string label = "oa-ucb")
      : config_(config), label_(std::move(label)), hedge_(2) {}

  std::string name() const override { return label_; }

  void reset(const ProblemInfo& info) override {
    info_ = info;
    delta_ = config_.delta > 0.0 ? config_.delta
                                 : ConfidenceParams::for_horizon(info.horizon)
                                       .delta;
    ConfidenceParams{delta_}.validate();
    stats_ = ArmStatistics(info.num_actions, info.num_resources);
    hedge_ = AdaHedge(info.num_resources + 1);
    ucb_.assign(info.num_actions, 0.0);
    lcb_ = Matrix(info.num_actions, info.num_resources);
    history_.clear();
    max_demand_ = 0.0;
    demand_sum_ = 0.0;
    rounds_seen_ = 0;
    effective_prediction_ = config_.min_prediction;
  }

  // Q-hat after the positivity floor max(max observed q, min_prediction).
  double effective_prediction(double raw) const {
    double p = raw;
    if (config_.mean_demand_prediction) {
      p = rounds_seen_ == 0
              ? 0.0
              : demand_sum_ / static_cast<double>(rounds_seen_) * info_.horizon;
    }
    return std::max({p, max_demand_, config_.min_prediction});
  }

  std::size_t select(const RoundContext& ctx) override {
    refresh_bounds();
    effective_prediction_ = effective_prediction(ctx.prediction);
    return oaucb_select(ucb_, lcb_, hedge_.weights(),
                        effective_prediction_ / info_.budget);
  }

  void observe(const RoundFeedback& fb, std::size_t action) override {
    // Gradient uses the bounds this round's selection was made with.
    const auto g = oaucb_gradient(fb.demand, effective_prediction_,
                                  info_.budget, lcb_.row(action));
    if (action != info_.null_index) {
      stats_.record(action, fb.per_unit_reward, fb.per_unit_cost);
    }
    if (config_.window > 0) {
      history_.push_back({action, fb.per_unit_reward, fb.per_unit_cost});
      if (history_.size() > config_.window) {
        const Sample& old = history_.front();
        if (old.action != info_.null_index) {
          stats_.remove(old.action, old.reward, old.cost);
        }
        history_.pop_front();
      }
    }
    hedge_.step(g);
    max_demand_ = std::max(max_demand_, fb.demand);
    demand_sum_ += fb.demand;
    ++rounds_seen_;
  }

  std::span<const double> dual_weights() const override {
    return hedge_.weights();
  }

  const ArmStatistics& statistics() const noexcept { return stats_; }
  const AdaHedge& hedge() const noexcept { return hedge_; }
  double delta() const noexcept { return delta_; }
  std::span<const double> ucb() const noexcept { return ucb_; }
  const Matrix& lcb() const noexcept { return lcb_; }

 private:
  struct Sample {
    std::size_t action;
    double reward;
    std::vector<double> cost;
  };

  void refresh_bounds() {
    for (std::size_t a = 0; a < info_.num_actions; ++a) {
      ucb_[a] = ucb_reward(stats_, a, delta_, info_.null_index);
      for (std::size_t i = 0; i < info_.num_resources; ++i) {
        lcb_(a, i) = lcb_cost(stats_, a, i, delta_, info_.null_index);
      }
    }
  }

  OaUcbConfig config_;
  std::string label_;
  ProblemInfo info_;
  double delta_ = 0.0;
  ArmStatistics stats_;
  AdaHedge hedge_;
  std::vector<double> ucb_;
  Matrix lcb_;
  std::deque<Sample> history_;
  double max_demand_ = 0.0;
  double demand_sum_ = 0.0;
  long rounds_seen_ = 0;
  double effective_prediction_ = 0.0;
};

}  // namespace bwk
