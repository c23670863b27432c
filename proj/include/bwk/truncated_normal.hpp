#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "bwk/errors.hpp"

namespace bwk {
namespace detail {

inline double log_normal_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

// log of the standard normal survival function, accurate far into the upper
// tail (erfc underflows past x ~ 37, the asymptotic series takes over there).
inline double log_normal_sf(double x) {
  if (x <= 37.0) {
    return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      1.0 - inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - inv2 * 105.0)));
  return log_normal_pdf(x) - std::log(x) + std::log(series);
}

// Hazard phi(x) / (1 - Phi(x)).
inline double normal_hazard(double x) {
  return std::exp(log_normal_pdf(x) - log_normal_sf(x));
}

// Reflects [a, b] so its centre is non-negative; the survival-function
// arithmetic below is then well conditioned. Returns the sign to undo it.
inline double orient(double& a, double& b) {
  if (a + b < 0.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
    return -1.0;
  }
  return 1.0;
}

}  // namespace detail

/// Mean of a standard normal truncated to [a, b], a < b.
inline double truncated_standard_normal_mean(double a, double b) {
  if (!(a < b)) throw ArgumentError("truncated normal: need a < b");
  const double sign = detail::orient(a, b);
  const double la = detail::log_normal_sf(a);
  const double lb = detail::log_normal_sf(b);
  const double mass_frac = -std::expm1(lb - la);  // (sf(a) - sf(b)) / sf(a)
  const double num = std::exp(detail::log_normal_pdf(a) - la) -
                     std::exp(detail::log_normal_pdf(b) - la);
  return sign * num / mass_frac;
}

/// Inverse CDF of a standard normal truncated to [a, b] evaluated at u in
/// (0, 1). Safeguarded Newton on log survival function.
inline double truncated_standard_normal_quantile(double a, double b,
                                                 double u) {
  if (!(a < b)) throw ArgumentError("truncated normal: need a < b");
  const double sign = detail::orient(a, b);
  // After reflection the roles of u and 1-u swap.
  if (sign < 0.0) u = 1.0 - u;
  const double la = detail::log_normal_sf(a);
  const double lb = detail::log_normal_sf(b);
  const double mass_frac = -std::expm1(lb - la);
  const double target = la + std::log1p(-u * mass_frac);

  double lo = a;
  double hi = b;
  double x = 0.5 * (a + b);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = detail::log_normal_sf(x) - target;
    if (f > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x + f / detail::normal_hazard(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-13 * (1.0 + std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return sign * std::clamp(x, lo, hi);
}

/// Mean of N(location, scale^2) truncated to [lower, upper].
inline double truncated_normal_mean(double location, double scale,
                                    double lower, double upper) {
  return location +
         scale * truncated_standard_normal_mean((lower - location) / scale,
                                                (upper - location) / scale);
}

/// Finds the location whose N(location, scale^2) truncated to [0,1] has mean
/// `target`, by bisection (the truncated mean is increasing in location).
inline double calibrate_truncated_location(double target, double scale,
                                           double tolerance = 1e-12) {
  if (!(target > 0.0 && target < 1.0)) {
    throw ConfigError("truncated normal: target mean must lie in (0,1)");
  }
  if (!(scale > 0.0)) {
    throw ConfigError("truncated normal: scale must be positive");
  }
  auto mean_at = [&](double loc) {
    return truncated_normal_mean(loc, scale, 0.0, 1.0);
  };
  double lo = -1.0;
  double hi = 2.0;
  while (mean_at(lo) > target) lo = 0.5 - 2.0 * (0.5 - lo);
  while (mean_at(hi) < target) hi = 0.5 + 2.0 * (hi - 0.5);
  for (int iter = 0; iter < 400 && hi - lo > 1e-15 * (1.0 + std::abs(lo));
       ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double m = mean_at(mid);
    if (std::abs(m - target) <= tolerance) return mid;
    (m < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bwk
