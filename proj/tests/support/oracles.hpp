#pragma once

// Reference implementations the engine is checked against. None of these
// share code with the engine beyond the model types and clause_status.

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "pmrf/model.hpp"

namespace oracle {

/// Four overlapping soft clauses; A..J are variables 1..9 (no I).
/// S1 = A B C D E, S2 = A B C F G, S3 = D E H, S4 = F G J.
pmrf::PropMRF four_clause(double w1 = 1, double w2 = 1, double w3 = 1, double w4 = 1);

/// Random mix of hard and soft clauses over n variables. Clause sizes are
/// drawn from `sizes`; hard clauses are kept satisfiable only if `sat_hard`.
struct MixSpec {
  int n = 8;
  int hard = 2;
  int soft = 6;
  std::vector<int> sizes{2, 3};
  double weight_low = -1.0;
  double weight_high = 1.0;
  bool sat_hard = false;
};
pmrf::PropMRF random_mix(const MixSpec& spec, std::uint64_t seed);

/// A random clause over distinct variables of 1..n.
pmrf::Clause random_clause(int n, int size, std::mt19937_64& rng);

double log_z(const pmrf::PropMRF& m);
/// Exact model count of the hard clauses, as an integer.
std::uint64_t model_count(const pmrf::PropMRF& m);
/// P(X_v = true) for v = 1..n; empty if Z = 0.
std::vector<double> marginals(const pmrf::PropMRF& m);
/// Exact distribution over the assignments of `scope`, bit j = scope[j].
std::vector<double> scope_marginal(const pmrf::PropMRF& m, const std::vector<int>& scope);

/// Greedy min-fill on adjacency sets, lowest index on ties.
struct MinFill {
  int width = 0;
  std::vector<int> order;
};
MinFill min_fill(const std::vector<std::vector<int>>& adjacency);
/// Exact treewidth by trying every elimination order (n <= 8).
int treewidth(const std::vector<std::vector<int>>& adjacency);

/// U(clause = true) per the factor-marginal rule: satisfying mass over
/// satisfying plus falsifying mass, restricted to rows agreeing with `forced`.
double factor_proposal(const std::vector<int>& scope, const std::vector<double>& table, const pmrf::Clause& clause,
            const std::map<int, bool>& forced);

}  // namespace oracle
