#pragma once

#include <span>
#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

/// Dense log-space table. Entry index bit j holds the value of scope[j];
/// scope is sorted ascending. Entries are finite or -inf.
struct Factor {
  std::vector<int> scope;
  std::vector<double> log_values;

  double at(std::size_t index) const { return log_values[index]; }
};

inline constexpr int kDefaultMaxFactorWidth = 20;

/// One factor per hard clause (0 / -inf) and per soft clause (w / 0).
/// Throws FactorTooLarge for a clause wider than `max_width`.
std::vector<Factor> clauses_to_factors(const PropMRF& m, int max_width = kDefaultMaxFactorWidth);

/// Bucket elimination along `order`, returning ln of the summed product.
/// Variables in `order` that appear in no factor contribute ln 2 each.
/// Throws std::invalid_argument if a scope variable is missing from `order`,
/// FactorTooLarge if an intermediate scope exceeds `max_width`.
double bucket_elimination(std::span<const Factor> factors, std::span<const int> order,
                          int max_width = kDefaultMaxFactorWidth);

/// ln Z by bucket elimination along the min-fill order.
double ve_log_z(const PropMRF& m, int max_width = kDefaultMaxFactorWidth);

}  // namespace pmrf
