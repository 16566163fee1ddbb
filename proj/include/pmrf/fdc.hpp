#pragma once

// Exact partition functions by decomposition and conditioning on clauses
// (formula mode) or on single variables (variable mode).

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

enum class BranchMode { Formula, Variable };

struct SearchStats {
  std::uint64_t nodes = 0;   // conditioning nodes expanded
  std::uint64_t leaves = 0;  // zero/scalar terminals, closed-form components, VE fallbacks
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_entries = 0;

  SearchStats& operator+=(const SearchStats& o) {
    nodes += o.nodes;
    leaves += o.leaves;
    cache_hits += o.cache_hits;
    cache_entries += o.cache_entries;
    return *this;
  }
};

struct ExactResult {
  double log_z = 0.0;  // -inf when the hard clauses are inconsistent
  SearchStats stats;
};

struct FdcOptions {
  BranchMode mode = BranchMode::Formula;
  bool cache = true;
  /// Residual components whose min-fill width is below this go to bucket
  /// elimination; 0 disables the fallback.
  int ve_width_threshold = 16;
};

struct BranchCandidate {
  Clause clause;
  int occurrence_count = 0;  // clauses containing `clause` as a sub-clause
};

/// (M_R, M_notR): r appended to the hard clauses, and the unit clauses
/// {not l : l in r} appended. Z(M) = Z(M_R) + Z(M_notR).
std::pair<PropMRF, PropMRF> condition_on_clause(const PropMRF& m, const Clause& r);

/// Formula mode: the pairwise literal intersection contained in the most
/// clauses, then the largest, then the lexicographically smallest; the most
/// frequent literal when all intersections are empty. Variable mode: the
/// (positive) unit clause of the variable in the most clauses, lowest index
/// on ties. Throws std::invalid_argument if m has no clauses.
BranchCandidate choose_branch_clause(const PropMRF& m, BranchMode mode);

ExactResult fdc_count(const PropMRF& m, const FdcOptions& options = {});

/// ln #(clauses) over variables 1..num_vars.
double log_model_count(int num_vars, std::span<const Clause> clauses, const FdcOptions& options = {});

/// P(X_j = true) for every variable, from ratios of exact partition functions.
std::vector<double> exact_marginals(const PropMRF& m, const FdcOptions& options = {});

/// Stats of the smallest search space over every branching choice at every
/// node (cache and elimination off), minimizing leaves, then nodes. Formula
/// mode branches on any sub-clause of a current clause. Throws
/// InstanceTooLarge beyond 12 variables, 8 clauses, or clauses over 10 literals.
SearchStats minimal_search_space(const PropMRF& m, BranchMode mode);

/// Structural key: variables renamed by first occurrence, clause lists sorted.
/// Equal keys imply equal partition functions.
std::string canonical_key(const PropMRF& m);

}  // namespace pmrf
