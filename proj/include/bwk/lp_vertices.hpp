#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bwk/errors.hpp"
#include "bwk/matrix.hpp"

namespace bwk {

inline constexpr std::size_t kVertexOracleMaxConstraints = 12;

/// Brute-force OPT_LP: every vertex of {u >= 0, sum u = 1, Q c'u <= B} makes
/// K-1 of the K+d inequalities tight. Each choice of tight set is solved as a
/// K x K system; feasible solutions are scored and the best returned.
/// Refuses instances with K + d > 12.
inline double enumerate_vertices_oracle(std::span<const double> r,
                                        const Matrix& c, double Q, double B) {
  const std::size_t K = r.size();
  const std::size_t d = c.cols();
  if (K == 0 || c.rows() != K) {
    throw ArgumentError("vertex oracle: reward/cost dimensions disagree");
  }
  const std::size_t total = K + d;
  if (total > kVertexOracleMaxConstraints) {
    throw ArgumentError("vertex oracle: instance too large (K + d > 12)");
  }
  constexpr double tol = 1e-9;

  // Inequality j < K is u_j >= 0; j >= K is resource j-K.
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t pick = K - 1;
  std::vector<std::size_t> idx(pick);
  for (std::size_t i = 0; i < pick; ++i) idx[i] = i;

  Eigen::MatrixXd A(K, K);
  Eigen::VectorXd rhs(K);
  for (;;) {
    A.setZero();
    rhs.setZero();
    for (std::size_t row = 0; row < pick; ++row) {
      const std::size_t j = idx[row];
      if (j < K) {
        A(row, j) = 1.0;
      } else {
        for (std::size_t a = 0; a < K; ++a) A(row, a) = Q * c(a, j - K);
        rhs(row) = B;
      }
    }
    A.row(K - 1).setOnes();
    rhs(K - 1) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      const Eigen::VectorXd u = lu.solve(rhs);
      bool feasible = true;
      for (std::size_t a = 0; a < K && feasible; ++a) feasible = u(a) >= -tol;
      for (std::size_t i = 0; i < d && feasible; ++i) {
        double use = 0.0;
        for (std::size_t a = 0; a < K; ++a) use += Q * c(a, i) * u(a);
        feasible = use <= B + tol * std::max(1.0, B);
      }
      if (feasible) {
        double v = 0.0;
        for (std::size_t a = 0; a < K; ++a) v += Q * r[a] * u(a);
        best = std::max(best, v);
      }
    }

    // Next combination in lexicographic order.
    std::size_t pos = pick;
    while (pos > 0 && idx[pos - 1] == total - pick + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < pick; ++i) idx[i] = idx[i - 1] + 1;
  }
  if (best == -std::numeric_limits<double>::infinity()) {
    throw ArgumentError("vertex oracle: no feasible vertex");
  }
  return best;
}

}  // namespace bwk
