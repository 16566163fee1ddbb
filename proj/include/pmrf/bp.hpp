#pragma once

// Loopy sum-product on the clause factor graph: one variable node per
// variable, one factor node per hard or soft clause.

#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

struct BpOptions {
  int max_iters = 1000;
  double damping = 0.5;  // weight kept from the previous message
  double tol = 1e-8;     // stop once no message moves more than this
};

/// Distribution over the assignments of a clause's variables. Entry index
/// bit j is the value of scope[j]; scope follows the clause's (sorted) order.
struct FactorMarginal {
  std::vector<int> scope;
  std::vector<double> probabilities;
};

struct BpMarginals {
  std::vector<double> variable_marginals;  // [v-1] = P(X_v = true)
  std::vector<FactorMarginal> hard_factors;
  std::vector<FactorMarginal> soft_factors;
  int iterations = 0;
  bool converged = false;

  double p_true(int var) const { return variable_marginals[static_cast<std::size_t>(var) - 1]; }
};

/// Synchronous damped updates from uniform messages, renormalized each step.
/// Returns the last iterate if `tol` is not reached within `max_iters`.
/// Throws DegenerateBelief if a variable's incoming messages are all zero,
/// FactorTooLarge for clauses over 20 literals, std::invalid_argument for
/// bad options.
BpMarginals run_bp(const PropMRF& m, const BpOptions& options = {});

/// P(clause = true) under `marginal`, counting only scope assignments that
/// agree with the literals fixed in `forced`: satisfying mass over satisfying
/// plus falsifying mass. 0.5 if both masses are zero. The marginal's scope
/// must be the clause's variables in order.
double formula_proposal(const FactorMarginal& marginal, const Clause& clause, const Assignment& forced);

/// Product of the variable marginals over the clause's scope, for clauses that
/// have no factor of their own.
FactorMarginal independent_marginal(const BpMarginals& marginals, const Clause& clause);

/// Bernoulli parameters of the fully factorized proposal Q(X).
std::vector<double> variable_proposal(const BpMarginals& marginals);

}  // namespace pmrf
