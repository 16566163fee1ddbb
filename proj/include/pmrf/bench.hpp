#pragma once

// Benchmark generators, evidence injection, the enumeration oracle and the
// sum-KLD metric.

#include <cstdint>
#include <span>
#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

/// Weights are drawn uniformly from [low, high].
struct WeightLaw {
  double low = -1.0;
  double high = 1.0;
};

/// (n, m, s): m soft clauses over s distinct variables out of n, each literal
/// negated with probability 1/2.
struct RandomSpec {
  int n = 0;
  int m = 0;
  int s = 0;
  std::uint64_t seed = 0;
  WeightLaw weights;
};

/// (d, f, s): d diseases with weighted positive unit clauses, f symptoms each
/// a weighted positive disjunction of s distinct diseases.
struct QmrSpec {
  int d = 0;
  int f = 0;
  int s = 0;
  std::uint64_t seed = 0;
  WeightLaw weights;
};

/// Friends & smokers grounded over `people` individuals. Variables:
/// smokes(a) = a, cancer(a) = k + a, friends(a, b) = 2k + (a-1)k + b.
struct FsSpec {
  int people = 0;
  std::uint64_t seed = 0;
  WeightLaw weights;
};

PropMRF gen_random(const RandomSpec& spec);
PropMRF gen_qmr(const QmrSpec& spec);
PropMRF gen_fs(const FsSpec& spec);

/// Fixes ceil(fraction * n) distinct variables to uniformly drawn values by
/// appending hard unit clauses.
PropMRF pick_evidence(const PropMRF& m, double fraction, std::uint64_t seed);

inline constexpr int kBruteForceMaxVars = 24;

/// ln Z by enumerating all 2^n assignments. Throws InstanceTooLarge for
/// n > kBruteForceMaxVars.
double brute_force_z(const PropMRF& m);

/// Sum over variables of KL(exact_j || approx_j) for Bernoulli marginals,
/// approx clamped to [1e-9, 1 - 1e-9]. Throws std::invalid_argument on a
/// length mismatch.
double sum_kld(std::span<const double> exact, std::span<const double> approx);

}  // namespace pmrf
