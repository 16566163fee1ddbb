#pragma once

// Unit propagation and a complete DPLL satisfiability check.

#include <optional>
#include <span>

#include "pmrf/model.hpp"

namespace pmrf {

struct PropagationResult {
  Assignment assignment;          // fixpoint extension of the input
  std::optional<Clause> conflict; // first clause found falsified, if any

  bool consistent() const { return !conflict.has_value(); }
};

/// Least fixpoint of forced literals extending `a`. Clauses are visited in
/// declaration order, so the result (including which conflict is reported)
/// is deterministic. `a` must cover every variable mentioned in `hard`.
PropagationResult unit_propagate(std::span<const Clause> hard, Assignment a);

/// A total assignment satisfying every clause, or nullopt. Variables not
/// forced by the search are set false. Chronological backtracking, branching
/// on the lowest-index open variable, true first.
std::optional<Assignment> find_model(std::span<const Clause> hard, int num_vars);
std::optional<Assignment> find_model(std::span<const Clause> hard, Assignment start);

bool is_satisfiable(std::span<const Clause> hard);

int max_variable(std::span<const Clause> clauses);

}  // namespace pmrf
