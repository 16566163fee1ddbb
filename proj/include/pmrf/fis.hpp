#pragma once

// Importance sampling of the partition function, over truth assignments to a
// sequence of clauses H (formula sampling) or over variables (variable
// sampling), plus the exact machinery used to check both estimators.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "pmrf/bp.hpp"
#include "pmrf/fdc.hpp"
#include "pmrf/model.hpp"

namespace pmrf {

using Rng = std::mt19937_64;

/// Truth values of H_1..H_r, in order.
struct FormulaAssignment {
  std::vector<bool> values;
};

struct Sample {
  FormulaAssignment h;
  double log_qb = 0.0;           // ln of the probability that the guarded process emits h
  double log_count = 0.0;        // ln #(F_h and F_M)
  double log_soft_weight = 0.0;  // sum of weights of soft clauses satisfied under h
  /// ln #(F_h and F_M and X_j) per variable; empty unless marginals were requested.
  std::vector<double> log_true_counts;

  double qb() const { return std::exp(log_qb); }
  /// ln of count * exp(w) / qb, the single-sample estimate of Z.
  double log_estimate() const { return log_count + log_soft_weight - log_qb; }
};

/// What a proposal sees when both truth values of H_step are consistent.
struct ProposalContext {
  std::size_t step;
  const Clause& clause;
  const std::vector<bool>& prefix;  // h_1..h_{step}
  const Assignment& forced;         // unit-propagated hard clauses plus prefix
};

/// Returns U(H_step = true | prefix).
using Proposal = std::function<double(const ProposalContext&)>;

Proposal uniform_proposal();

/// Belief-propagation proposal: clauses of H that are soft (or hard) clauses
/// of m use their factor marginal, others the product of variable marginals.
Proposal bp_formula_proposal(const PropMRF& m, const BpMarginals& marginals, std::span<const Clause> formulas);

/// The soft clauses of m in declaration order.
std::vector<Clause> soft_clause_formulas(const PropMRF& m);

struct SamplerOptions {
  FdcOptions counting;
  /// At free steps the proposal is clamped into [floor, 1 - floor] so both
  /// consistent branches keep positive probability.
  double proposal_floor = 1e-3;
  bool track_marginals = false;
};

/// Backtrack-free sampler over truth assignments to H. Both truth values of
/// each H_i are checked for consistency with the hard clauses and the
/// choices so far; only when both are consistent is the proposal consulted.
/// Every consistent completion must decide every soft clause. Counts are
/// exact and memoized per h; draw() and enumerate() are safe to call
/// concurrently.
class FormulaSampler {
 public:
  /// Throws NoConsistentSample if the hard clauses of m are unsatisfiable.
  FormulaSampler(const PropMRF& m, std::vector<Clause> formulas, Proposal proposal, SamplerOptions options = {});

  Sample draw(Rng& rng) const;

  /// Every h the sampler can emit, each with log_qb set to its exact
  /// emission probability. Exponential in |H|; meant for small instances.
  std::vector<Sample> enumerate() const;

  const std::vector<Clause>& formulas() const { return formulas_; }
  std::size_t distinct_assignments() const;

 private:
  struct Counts {
    double log_count;
    std::vector<double> log_true_counts;
  };
  struct State;

  double branch_probability(const State& state) const;
  void finish(const State& state, Sample& out) const;
  const Counts& counts_for(const std::vector<bool>& h, const std::vector<Clause>& constraints) const;
  void enumerate_from(State state, double log_prob, std::vector<Sample>& out) const;

  PropMRF model_;
  std::vector<Clause> formulas_;
  Proposal proposal_;
  SamplerOptions options_;
  Assignment initial_witness_;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::vector<bool>, std::shared_ptr<const Counts>> cache_;
};

/// One draw with a fresh sampler; see FormulaSampler.
Sample sample_formula_assignment(const PropMRF& m, std::span<const Clause> formulas, const Proposal& proposal,
                                 Rng& rng, const SamplerOptions& options = {});

/// Running mean and second moment of exp(log x) kept relative to the largest
/// exponent seen, so values far outside double range still combine.
class LogMeanAccumulator {
 public:
  void add(double log_x);
  void merge(const LogMeanAccumulator& other);

  std::uint64_t count() const { return n_; }
  double log_mean() const;
  /// ln of the unbiased sample variance of x; -inf with fewer than two samples.
  double log_variance() const;

 private:
  void rescale(double new_shift);

  double shift_ = -std::numeric_limits<double>::infinity();
  double mean_ = 0.0;
  double m2_ = 0.0;
  std::uint64_t n_ = 0;
};

struct Estimate {
  double log_z_hat = 0.0;
  std::uint64_t n_samples = 0;
  double log_sample_variance = 0.0;  // of the single-sample estimator
  double log_std_error = 0.0;        // of the mean

  double z_hat() const { return std::exp(log_z_hat); }
  double sample_variance() const { return std::exp(log_sample_variance); }
  double std_error() const { return std::exp(log_std_error); }
};

Estimate make_estimate(const LogMeanAccumulator& acc);

enum class SamplingMethod { Fis, Vis };

struct SamplingOptions {
  SamplingMethod method = SamplingMethod::Fis;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  BpOptions bp;
  SamplerOptions sampler;
  /// Order of soft clauses (0-based) forming H; empty means declaration order.
  std::vector<std::size_t> order;
  bool marginals = false;
};

struct SamplingRun {
  Estimate estimate;
  std::vector<double> marginals;  // per variable; empty unless requested
  int bp_iterations = 0;
  bool bp_converged = false;
  std::size_t distinct_assignments = 0;  // fis only
};

/// Formula sampling with the belief-propagation formula proposal, or variable
/// sampling from the product of belief-propagation marginals. Workers get
/// independent streams seeded from (seed, worker) and merge in worker order.
SamplingRun run_sampling(const PropMRF& m, const SamplingOptions& options);
Estimate estimate_z(const PropMRF& m, const SamplingOptions& options);

struct WeightedAssignment {
  Assignment x;
  double log_weight = 0.0;  // ln I(x) prod phi(x) / Q(x)
};

/// ln of I(x) * prod_i phi_i(x) / Q(x) for a product proposal q (q[v-1] = P(X_v)).
double vis_log_estimator(const PropMRF& m, std::span<const double> q, const Assignment& x);
WeightedAssignment draw_vis(const PropMRF& m, std::span<const double> q, Rng& rng);

/// Self-normalized estimates of P(X_j = true). Formula samples split their
/// weight by the exact conditional counts and need log_true_counts. Throws
/// std::domain_error when every weight is zero.
std::vector<double> marginals_from_samples(std::span<const Sample> samples, int num_vars);
std::vector<double> marginals_from_samples(std::span<const WeightedAssignment> samples, int num_vars);

/// U(h) = Q-mass of the solutions of F_h and F_M, for every consistent h.
struct FormulaDistribution {
  std::map<std::vector<bool>, double> mass;
  double total = 0.0;  // Q-mass of Sol(F_M)

  /// Sequential conditionals U(H_i = true | prefix) of the normalized U.
  Proposal conditional() const;
};

inline constexpr int kEnumerationMaxVars = 20;

/// Exhaustive; throws InstanceTooLarge above kEnumerationMaxVars variables.
FormulaDistribution u_from_q(const PropMRF& m, std::span<const double> q, std::span<const Clause> formulas);

}  // namespace pmrf
