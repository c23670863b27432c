#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bwk/confidence.hpp"
#include "bwk/demand.hpp"
#include "bwk/errors.hpp"
#include "bwk/hedge.hpp"
#include "bwk/lp.hpp"
#include "bwk/matrix.hpp"
#include "bwk/model.hpp"
#include "bwk/oaucb.hpp"
#include "bwk/rng.hpp"

namespace bwk {

enum class ChoiceKind { linear, exponential, logit, table };

// Per-customer purchase probabilities lambda(p), one per product.
//   linear:      lambda_j = a_j - b_j p_j
//   exponential: lambda_j = a_j exp(-b_j p_j)
//   logit:       lambda_j = a_j exp(-b_j p_j) / (1 + sum_k exp(-b_k p_k))
//   table:       lambda_j = table(price index, j)
struct ChoiceModel {
  ChoiceKind kind = ChoiceKind::table;
  std::vector<double> a;
  std::vector<double> b;
  Matrix table;
};

inline std::string choice_kind_name(ChoiceKind kind) {
  switch (kind) {
    case ChoiceKind::linear: return "linear";
    case ChoiceKind::exponential: return "exponential";
    case ChoiceKind::logit: return "logit";
    case ChoiceKind::table: return "table";
  }
  return "table";
}

/// Evaluates the closed form at price vector `p` (row `price_index` of the
/// price set, used only by the table model). Throws ConfigError when a
/// component leaves [0,1].
inline std::vector<double> choice_lambda(const ChoiceModel& model,
                                         std::span<const double> p,
                                         std::size_t price_index = 0) {
  const std::size_t J = p.size();
  std::vector<double> out(J, 0.0);
  if (model.kind == ChoiceKind::table) {
    if (price_index >= model.table.rows() || model.table.cols() != J) {
      throw ConfigError("choice model: table shape does not match prices");
    }
    for (std::size_t j = 0; j < J; ++j) out[j] = model.table(price_index, j);
  } else {
    if (model.a.size() != J || model.b.size() != J) {
      throw ConfigError("choice model: need one (a, b) pair per product");
    }
    double denom = 1.0;
    for (std::size_t j = 0; j < J; ++j) {
      switch (model.kind) {
        case ChoiceKind::linear:
          out[j] = model.a[j] - model.b[j] * p[j];
          break;
        case ChoiceKind::exponential:
        case ChoiceKind::logit:
          out[j] = model.a[j] * std::exp(-model.b[j] * p[j]);
          denom += std::exp(-model.b[j] * p[j]);
          break;
        case ChoiceKind::table:
          break;
      }
    }
    if (model.kind == ChoiceKind::logit) {
      for (double& x : out) x /= denom;
    }
  }
  for (double x : out) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ConfigError("choice model: purchase probability outside [0,1]");
    }
  }
  return out;
}

// Dynamic-pricing instance. Actions are the K rows of `prices` followed by
// the null price, whose demand is 0 with certainty. `consumption` is d x J
// (resource x product).
struct NrmSpec {
  Matrix prices;       // K x J
  Matrix consumption;  // d x J
  ChoiceModel choice;
  double normalized_budget = 0.0;
  int horizon = 0;
  DemandModel demand = ExplicitDemand{};

  std::size_t num_products() const noexcept { return prices.cols(); }
  std::size_t num_resources() const noexcept { return consumption.rows(); }
  std::size_t num_prices() const noexcept { return prices.rows(); }
  std::size_t num_actions() const noexcept { return num_prices() + 1; }
  std::size_t null_index() const noexcept { return num_prices(); }
  double budget() const noexcept { return normalized_budget * horizon; }

  // lambda at action a; zeros for the null price.
  std::vector<double> lambda(std::size_t a) const {
    if (a == null_index()) return std::vector<double>(num_products(), 0.0);
    return choice_lambda(choice, prices.row(a), a);
  }

  void validate() const {
    if (num_prices() == 0 || num_products() == 0) {
      throw ConfigError("nrm: empty price set");
    }
    if (consumption.cols() != num_products() || num_resources() == 0) {
      throw ConfigError("nrm: consumption matrix must be d x J");
    }
    for (double x : consumption.data()) {
      if (!(x >= 0.0)) throw ConfigError("nrm: consumption must be >= 0");
    }
    for (double x : prices.data()) {
      if (!(x >= 0.0)) throw ConfigError("nrm: prices must be >= 0");
    }
    for (std::size_t a = 0; a < num_prices(); ++a) (void)lambda(a);
    if (!(normalized_budget > 0.0)) throw ConfigError("nrm: b must be > 0");
    if (horizon < 1) throw ConfigError("nrm: T must be >= 1");
  }

  ProblemInfo problem_info() const {
    return {num_actions(), num_resources(), null_index(), budget(), horizon};
  }
};

/// D_j = sum over n = round(q) customers of Bernoulli(lambda_j), independent
/// across customers and products.
template <typename Engine>
std::vector<double> sample_nrm_demand(std::span<const double> lambda, double q,
                                      Engine& rng) {
  const long n = q > 0.0 ? std::lround(q) : 0;
  std::vector<double> D(lambda.size(), 0.0);
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    long hits = 0;
    if (lambda[j] >= 1.0) {
      hits = n;
    } else if (lambda[j] > 0.0) {
      for (long l = 0; l < n; ++l) hits += uniform01(rng) < lambda[j];
    }
    D[j] = static_cast<double>(hits);
  }
  return D;
}

inline long customer_count(double q) { return q > 0.0 ? std::lround(q) : 0; }

// Realizes product demand for (t, a) and reports it in per-unit form:
// R = p'D / q and C_i = (A D)_i / q, so q R is the round revenue.
class NrmOutcomeSource final : public OutcomeSource {
 public:
  NrmOutcomeSource(const NrmSpec& spec, std::uint64_t seed)
      : spec_(spec), seed_(seed) {
    lambdas_.reserve(spec.num_actions());
    for (std::size_t a = 0; a < spec.num_actions(); ++a) {
      lambdas_.push_back(spec.lambda(a));
    }
  }

  void sample(int t, std::size_t a, double q, Outcome& out) const override {
    SplitMix64 rng(derive_seed(seed_, static_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(a)));
    out.product_demand = sample_nrm_demand(lambdas_[a], q, rng);
    const std::size_t d = spec_.num_resources();
    out.cost.assign(d, 0.0);
    out.reward = 0.0;
    if (!(q > 0.0) || a == spec_.null_index()) return;
    for (std::size_t j = 0; j < spec_.num_products(); ++j) {
      const double D = out.product_demand[j];
      out.reward += spec_.prices(a, j) * D;
      for (std::size_t i = 0; i < d; ++i) {
        out.cost[i] += spec_.consumption(i, j) * D;
      }
    }
    out.reward /= q;
    for (double& c : out.cost) c /= q;
  }

 private:
  NrmSpec spec_;
  std::uint64_t seed_;
  std::vector<std::vector<double>> lambdas_;
};

/// Mean reward r(p) = p'lambda(p) and consumption c(p, i) = (A lambda(p))_i
/// for every action, null price last.
struct NrmMeans {
  std::vector<double> reward;
  Matrix cost;  // K+1 x d
};

inline NrmMeans nrm_means(const NrmSpec& spec) {
  NrmMeans m;
  const std::size_t K = spec.num_actions();
  m.reward.assign(K, 0.0);
  m.cost = Matrix(K, spec.num_resources());
  for (std::size_t a = 0; a < spec.num_prices(); ++a) {
    const auto lam = spec.lambda(a);
    for (std::size_t j = 0; j < spec.num_products(); ++j) {
      m.reward[a] += spec.prices(a, j) * lam[j];
      for (std::size_t i = 0; i < spec.num_resources(); ++i) {
        m.cost(a, i) += spec.consumption(i, j) * lam[j];
      }
    }
  }
  return m;
}

inline LpSolution nrm_opt_lp(const NrmSpec& spec, double total_demand) {
  const NrmMeans m = nrm_means(spec);
  return solve_opt_lp(m.reward, m.cost, total_demand, spec.budget());
}

struct OaUcbDpConfig {
  double delta = 0.0;            // <= 0 selects 1/T
  double min_prediction = 1e-9;
  bool ignore_costs = false;     // greedy-UCB-DP
};

// OA-UCB for dynamic pricing. Keeps per-price estimates of the purchase
// probabilities, D-hat_j(p) = mean of D_j / n over rounds with n >= 1
// customers, and scores
//   UCB(p)'p - (Q-hat/B) mu' A LCB(p).
class OaUcbDpPolicy final : public Policy {
 public:
  OaUcbDpPolicy(const NrmSpec& spec, OaUcbDpConfig config = {})
      : prices_(spec.prices),
        consumption_(spec.consumption),
        config_(config),
        hedge_(2) {}

  std::string name() const override {
    return config_.ignore_costs ? "greedy-ucb-dp" : "oa-ucb-dp";
  }

  void reset(const ProblemInfo& info) override {
    if (info.num_actions != prices_.rows() + 1 ||
        info.null_index != prices_.rows() ||
        info.num_resources != consumption_.rows()) {
      throw ArgumentError("oa-ucb-dp: problem shape does not match prices");
    }
    info_ = info;
    delta_ = config_.delta > 0.0
                 ? config_.delta
                 : ConfidenceParams::for_horizon(info.horizon).delta;
    ConfidenceParams{delta_}.validate();
    const std::size_t J = prices_.cols();
    stats_ = ArmStatistics(info.num_actions, J);
    hedge_ = AdaHedge(info.num_resources + 1);
    ucb_ = Matrix(info.num_actions, J);
    lcb_ = Matrix(info.num_actions, J);
    use_lcb_ = Matrix(info.num_actions, info.num_resources);
    revenue_ucb_.assign(info.num_actions, 0.0);
    max_demand_ = 0.0;
    effective_prediction_ = config_.min_prediction;
  }

  std::size_t select(const RoundContext& ctx) override {
    refresh_bounds();
    effective_prediction_ = std::max(
        {ctx.prediction, max_demand_, config_.min_prediction});
    const double ratio =
        config_.ignore_costs ? 0.0 : effective_prediction_ / info_.budget;
    return oaucb_select(revenue_ucb_, use_lcb_, hedge_.weights(), ratio);
  }

  void observe(const RoundFeedback& fb, std::size_t action) override {
    const auto g = oaucb_gradient(fb.demand, effective_prediction_,
                                  info_.budget, use_lcb_.row(action));
    const long n = customer_count(fb.demand);
    if (action != info_.null_index && n > 0) {
      std::vector<double> share(fb.product_demand.size());
      for (std::size_t j = 0; j < share.size(); ++j) {
        share[j] = fb.product_demand[j] / static_cast<double>(n);
      }
      stats_.record(action, 0.0, share);
    }
    hedge_.step(g);
    max_demand_ = std::max(max_demand_, fb.demand);
  }

  std::span<const double> dual_weights() const override {
    return hedge_.weights();
  }

  std::span<const double> revenue_ucb() const noexcept { return revenue_ucb_; }
  const Matrix& consumption_lcb() const noexcept { return use_lcb_; }
  const Matrix& demand_ucb() const noexcept { return ucb_; }
  const Matrix& demand_lcb() const noexcept { return lcb_; }
  const ArmStatistics& statistics() const noexcept { return stats_; }
  const AdaHedge& hedge() const noexcept { return hedge_; }

 private:
  void refresh_bounds() {
    const std::size_t J = prices_.cols();
    const std::size_t d = consumption_.rows();
    for (std::size_t a = 0; a < info_.num_actions; ++a) {
      revenue_ucb_[a] = 0.0;
      for (std::size_t i = 0; i < d; ++i) use_lcb_(a, i) = 0.0;
      if (a == info_.null_index) continue;
      const double n = stats_.count_plus(a);
      for (std::size_t j = 0; j < J; ++j) {
        const double m = stats_.mean_cost(a, j);
        const double r = rad(m, n, delta_);
        ucb_(a, j) = std::clamp(m + r, 0.0, 1.0);
        lcb_(a, j) = std::clamp(m - r, 0.0, 1.0);
        revenue_ucb_[a] += prices_(a, j) * ucb_(a, j);
        for (std::size_t i = 0; i < d; ++i) {
          use_lcb_(a, i) += consumption_(i, j) * lcb_(a, j);
        }
      }
    }
  }

  Matrix prices_;
  Matrix consumption_;
  OaUcbDpConfig config_;
  ProblemInfo info_;
  double delta_ = 0.0;
  ArmStatistics stats_;
  AdaHedge hedge_;
  Matrix ucb_;
  Matrix lcb_;
  Matrix use_lcb_;
  std::vector<double> revenue_ucb_;
  double max_demand_ = 0.0;
  double effective_prediction_ = 0.0;
};

// Single product and resource, prices $10..$19 with a tabulated demand curve.
inline NrmSpec nrm_single_product(double b = 10.0, int horizon = 2000) {
  NrmSpec s;
  s.prices = Matrix{{10.0}, {11.0}, {13.0}, {15.0}, {17.0}, {19.0}};
  s.consumption = Matrix{{1.0}};
  s.choice.kind = ChoiceKind::table;
  s.choice.table = Matrix{{1.0}, {0.9}, {0.7}, {0.5}, {0.3}, {0.1}};
  s.normalized_budget = b;
  s.horizon = horizon;
  s.demand = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  return s;
}

// Two products, three resources.
inline NrmSpec nrm_multi_product(ChoiceKind kind, double b = 20.0,
                                 int horizon = 2000) {
  NrmSpec s;
  s.prices = Matrix{{5.0, 10.0}, {6.0, 11.0}, {6.0, 13.0},
                    {7.0, 15.0}, {8.0, 17.0}, {9.0, 19.0}};
  s.consumption = Matrix{{1.0, 1.0}, {3.0, 1.0}, {1.0, 4.0}};
  s.choice.kind = kind;
  switch (kind) {
    case ChoiceKind::linear:
      s.choice.a = {1.0, 1.0};
      s.choice.b = {0.1, 0.05};
      break;
    case ChoiceKind::exponential:
      s.choice.a = {1.0, 1.0};
      s.choice.b = {0.2, 0.1};
      break;
    case ChoiceKind::logit:
      s.choice.a = {4.0, 4.0};
      s.choice.b = {0.4, 0.2};
      break;
    case ChoiceKind::table:
      throw ConfigError("nrm multi-product preset needs a closed-form model");
  }
  s.normalized_budget = b;
  s.horizon = horizon;
  s.demand = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  return s;
}

}  // namespace bwk
