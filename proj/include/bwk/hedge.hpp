#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "bwk/errors.hpp"

namespace bwk {

// Scale-free AdaHedge over the probability simplex of dimension m.
//
// Weights are a softmax of the negated cumulative gradients theta with
// temperature eta. eta starts at 0 and grows by rho_t / kappa^2 where rho_t is
// the mixability gap of round t and kappa = sqrt(ln m). At eta == 0 the
// softmax is replaced by its limit: uniform over argmax theta.
class AdaHedge {
 public:
  explicit AdaHedge(std::size_t dims)
      : theta_(dims, 0.0), weights_(dims, 1.0 / static_cast<double>(dims)) {
    if (dims < 2) {
      throw ArgumentError("AdaHedge: need at least 2 coordinates");
    }
    kappa_sq_ = std::log(static_cast<double>(dims));
  }

  std::size_t dims() const noexcept { return theta_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> theta() const noexcept { return theta_; }
  double eta() const noexcept { return eta_; }
  double kappa() const noexcept { return std::sqrt(kappa_sq_); }
  long steps() const noexcept { return steps_; }

  /// Mixability gap of `g` under the current weights, without updating.
  double mixability_gap(std::span<const double> g) const {
    const std::size_t m = dims();
    double linear = 0.0;
    double min_g = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      linear += g[j] * weights_[j];
      if (weights_[j] > 0.0) min_g = std::min(min_g, g[j]);
    }
    double gap;
    if (eta_ == 0.0) {
      // Limit of eta * ln(sum_j w_j exp(-g_j / eta)) as eta -> 0+, which on
      // the first round is the documented g'w - min_j g_j.
      gap = linear - min_g;
    } else {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (weights_[j] > 0.0) {
          acc += weights_[j] * std::exp(-(g[j] - min_g) / eta_);
        }
      }
      gap = eta_ * std::log(acc) - min_g + linear;
    }
    return std::max(gap, 0.0);
  }

  /// Applies one AdaHedge update with loss vector `g`; returns rho_t.
  double step(std::span<const double> g) {
    if (g.size() != dims()) {
      throw ArgumentError("AdaHedge::step: gradient has wrong dimension");
    }
    for (double v : g) {
      if (!std::isfinite(v)) {
        throw ArgumentError("AdaHedge::step: non-finite gradient");
      }
    }
    const double rho = mixability_gap(g);
    for (std::size_t j = 0; j < dims(); ++j) theta_[j] -= g[j];
    eta_ += rho / kappa_sq_;
    ++steps_;
    refresh_weights();
    return rho;
  }

 private:
  void refresh_weights() {
    const double top = *std::max_element(theta_.begin(), theta_.end());
    if (eta_ == 0.0) {
      const auto ties = static_cast<double>(
          std::count(theta_.begin(), theta_.end(), top));
      for (std::size_t j = 0; j < dims(); ++j) {
        weights_[j] = theta_[j] == top ? 1.0 / ties : 0.0;
      }
      return;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < dims(); ++j) {
      weights_[j] = std::exp((theta_[j] - top) / eta_);
      total += weights_[j];
    }
    for (double& w : weights_) w /= total;
  }

  std::vector<double> theta_;
  std::vector<double> weights_;
  double eta_ = 0.0;
  double kappa_sq_ = 0.0;
  long steps_ = 0;
};

/// Regret budget 2 sqrt((4 + ln m) * sum_t ||g_t||_inf^2) that AdaHedge with
/// kappa = sqrt(ln m) certifies against every fixed simplex comparator.
template <typename Range>
double hedge_regret_bound(const Range& gradients, std::size_t dims) {
  double sum_sq = 0.0;
  for (const auto& g : gradients) {
    double norm = 0.0;
    for (double v : g) norm = std::max(norm, std::abs(v));
    sum_sq += norm * norm;
  }
  return 2.0 * std::sqrt((4.0 + std::log(static_cast<double>(dims))) * sum_sq);
}

}  // namespace bwk
