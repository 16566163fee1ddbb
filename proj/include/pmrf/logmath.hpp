#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace pmrf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = std::numbers::ln2;

/// ln(exp(a) + exp(b)) without overflow; either side may be -inf.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline double log_sum_exp(std::span<const double> values) {
  double hi = kNegInf;
  for (double v : values) hi = std::max(hi, v);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

/// ln(2^k - 1) for k >= 1.
inline double log_two_pow_minus_one(int k) {
  if (k > 60) return k * kLn2 + std::log1p(-std::ldexp(1.0, -k));
  return std::log(std::ldexp(1.0, k) - 1.0);
}

}  // namespace pmrf
