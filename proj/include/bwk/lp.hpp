#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bwk/errors.hpp"
#include "bwk/matrix.hpp"

namespace bwk {

enum class LpStatus { optimal, infeasible_guard };

struct LpSolution {
  double value = 0.0;
  std::vector<double> u;              // mixing distribution over actions
  std::vector<std::size_t> binding;   // resources with Q c'u = B (1e-9)
  LpStatus status = LpStatus::optimal;
};

inline constexpr double kLpTolerance = 1e-9;

// First action with zero reward and zero consumption, if any.
inline std::optional<std::size_t> find_null_action(std::span<const double> r,
                                                   const Matrix& c) {
  for (std::size_t a = 0; a < r.size(); ++a) {
    bool zero = r[a] == 0.0;
    for (std::size_t i = 0; zero && i < c.cols(); ++i) zero = c(a, i) == 0.0;
    if (zero) return a;
  }
  return std::nullopt;
}

/// OPT_LP = max Q r'u  s.t.  Q c'u <= B (every resource), u in the simplex.
///
/// Dense tableau simplex with Bland's rule on the relaxation sum(u) <= 1. Any
/// leftover mass is then placed on the null action, which changes neither
/// objective nor consumption, so the relaxation optimum is the simplex
/// optimum. All right-hand sides are non-negative, so the slack basis is a
/// feasible start and no phase one is needed.
inline LpSolution solve_opt_lp(std::span<const double> r, const Matrix& c,
                               double Q, double B) {
  const std::size_t K = r.size();
  const std::size_t d = c.cols();
  if (K == 0 || c.rows() != K) {
    throw ArgumentError("solve_opt_lp: reward/cost dimensions disagree");
  }
  if (!(Q > 0.0) || !(B > 0.0)) {
    throw ArgumentError("solve_opt_lp: need Q > 0 and B > 0");
  }
  const auto null_action = find_null_action(r, c);

  // Rows 0..d-1: resources, row d: sum(u) <= 1. Columns: K structural, m
  // slacks, then the right-hand side.
  const std::size_t m = d + 1;
  const std::size_t n = K + m;
  std::vector<double> tab(m * (n + 1), 0.0);
  auto at = [&](std::size_t row, std::size_t col) -> double& {
    return tab[row * (n + 1) + col];
  };
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t a = 0; a < K; ++a) at(i, a) = Q * c(a, i);
    at(i, n) = B;
  }
  for (std::size_t a = 0; a < K; ++a) at(d, a) = 1.0;
  at(d, n) = 1.0;
  for (std::size_t row = 0; row < m; ++row) at(row, K + row) = 1.0;

  // Reduced costs of the maximisation objective.
  std::vector<double> obj(n, 0.0);
  for (std::size_t a = 0; a < K; ++a) obj[a] = Q * r[a];
  double value = 0.0;

  std::vector<std::size_t> basis(m);
  for (std::size_t row = 0; row < m; ++row) basis[row] = K + row;

  LpSolution sol;
  const std::size_t max_pivots = 50 * (n + m) + 1000;
  std::size_t pivots = 0;
  for (;;) {
    std::size_t enter = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (obj[j] > kLpTolerance) {
        enter = j;
        break;
      }
    }
    if (enter == n) break;

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t row = 0; row < m; ++row) {
      const double coef = at(row, enter);
      if (coef <= kLpTolerance) continue;
      const double ratio = at(row, n) / coef;
      if (ratio < best_ratio - kLpTolerance ||
          (ratio <= best_ratio + kLpTolerance && leave < m &&
           basis[row] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = row;
      }
    }
    // Bounded by sum(u) <= 1, so an entering column always has a limit.
    if (leave == m || ++pivots > max_pivots) {
      sol.status = LpStatus::infeasible_guard;
      break;
    }

    const double piv = at(leave, enter);
    for (std::size_t j = 0; j <= n; ++j) at(leave, j) /= piv;
    for (std::size_t row = 0; row < m; ++row) {
      if (row == leave) continue;
      const double f = at(row, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) at(row, j) -= f * at(leave, j);
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j < n; ++j) obj[j] -= f * at(leave, j);
    value += f * at(leave, n);
    basis[leave] = enter;
  }

  sol.u.assign(K, 0.0);
  for (std::size_t row = 0; row < m; ++row) {
    if (basis[row] < K) sol.u[basis[row]] = std::max(at(row, n), 0.0);
  }
  double mass = 0.0;
  for (double x : sol.u) mass += x;
  if (mass < 1.0 - kLpTolerance) {
    if (!null_action) {
      throw ArgumentError(
          "solve_opt_lp: optimum leaves probability mass unassigned and no "
          "null action exists");
    }
    sol.u[*null_action] += 1.0 - mass;
  }

  sol.value = 0.0;
  for (std::size_t a = 0; a < K; ++a) sol.value += Q * r[a] * sol.u[a];
  for (std::size_t i = 0; i < d; ++i) {
    double use = 0.0;
    for (std::size_t a = 0; a < K; ++a) use += Q * c(a, i) * sol.u[a];
    if (use >= B - kLpTolerance * std::max(1.0, B)) sol.binding.push_back(i);
  }
  return sol;
}

inline LpSolution solve_opt_lp(const std::vector<double>& r, const Matrix& c,
                               double Q, double B) {
  return solve_opt_lp(std::span<const double>(r), c, Q, B);
}

}  // namespace bwk
