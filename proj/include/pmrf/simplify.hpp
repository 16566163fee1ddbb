#pragma once

#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

enum class SimplifyStatus { Zero, Scalar, Open };

/// Result of parsimonious simplification. The reduced model is renumbered so
/// that it mentions exactly its own variables; `variables[i]` is the original
/// index of reduced variable i+1. Relation to the input:
///   Open:   Z(input) = exp(log_weight) * Z(model)
///   Scalar: Z(input) = exp(log_weight), model has no clauses
///   Zero:   Z(input) = 0
struct SimplifyOutcome {
  PropMRF model;
  double log_weight = 0.0;
  SimplifyStatus status = SimplifyStatus::Open;
  std::vector<int> variables;
  Assignment forced;  // literals fixed by propagation, over the input's variables
};

/// Unit propagation, hard-clause subsumption, removal of soft clauses decided
/// by the forced literals or implied by a hard clause, and a ln 2 credit for
/// every unassigned variable that no longer occurs anywhere.
SimplifyOutcome simplify(const PropMRF& m);

/// Renames the variables occurring in `hard`/`soft` to 1..k in increasing
/// original order. Returns the compact model and the original indices.
std::pair<PropMRF, std::vector<int>> compact(int num_vars, std::vector<Clause> hard,
                                             std::vector<SoftClause> soft);

}  // namespace pmrf
