#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "pmrf/bench.hpp"
#include "pmrf/errors.hpp"
#include "pmrf/fdc.hpp"
#include "pmrf/fis.hpp"
#include "pmrf/logmath.hpp"

using namespace pmrf;

namespace {

// E[estimator] over the exact emission distribution.
double expected_log_estimate(const std::vector<Sample>& all) {
  double acc = kNegInf;
  for (const Sample& s : all) acc = log_add(acc, s.log_qb + s.log_estimate());
  return acc;
}

double vis_expectation(const PropMRF& m, const std::vector<double>& q, int power) {
  double acc = kNegInf;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << m.num_vars()); ++bits) {
    auto x = Assignment::from_bits(m.num_vars(), bits);
    double lq = 0;
    for (int v = 1; v <= m.num_vars(); ++v) lq += std::log(x.is_true(v) ? q[v - 1] : 1 - q[v - 1]);
    acc = log_add(acc, lq + power * vis_log_estimator(m, q, x));
  }
  return acc;
}

std::vector<double> random_q(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> q(static_cast<std::size_t>(n));
  for (double& p : q) p = u(rng);
  return q;
}

}  // namespace

TEST(Sampler, SingleClauseNoHard) {
  PropMRF m(2, {}, {{Clause{1, 2}, 0.4}});
  FormulaSampler sampler(m, soft_clause_formulas(m), uniform_proposal());
  Rng rng(1);
  int seen_true = 0;
  for (int i = 0; i < 50; ++i) {
    Sample s = sampler.draw(rng);
    ASSERT_EQ(s.h.values.size(), 1u);
    EXPECT_NEAR(s.log_qb, std::log(0.5), 1e-15);
    if (s.h.values[0]) {
      ++seen_true;
      EXPECT_NEAR(s.log_count, std::log(3.0), 1e-12);
      EXPECT_NEAR(s.log_soft_weight, 0.4, 1e-15);
    } else {
      EXPECT_NEAR(s.log_count, 0.0, 1e-12);
      EXPECT_EQ(s.log_soft_weight, 0.0);
    }
  }
  EXPECT_GT(seen_true, 0);
  EXPECT_LT(seen_true, 50);
}

TEST(Sampler, ForcedBranchKeepsQb) {
  PropMRF m(2, {Clause{-1}, Clause{-2}}, {{Clause{1, 2}, 0.4}});
  Rng rng(2);
  Sample s = sample_formula_assignment(m, soft_clause_formulas(m), uniform_proposal(), rng);
  EXPECT_EQ(s.h.values, (std::vector<bool>{false}));
  EXPECT_EQ(s.log_qb, 0.0);
  EXPECT_NEAR(s.log_count, 0.0, 1e-12);
}

TEST(Sampler, FourClauseNeverInconsistent) {
  PropMRF m = oracle::four_clause();
  FormulaSampler sampler(m, soft_clause_formulas(m), uniform_proposal());
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    Sample s = sampler.draw(rng);
    ASSERT_GT(s.log_count, kNegInf);
    std::vector<Clause> g;
    for (std::size_t j = 0; j < 4; ++j) {
      const Clause& c = m.soft()[j].clause;
      if (s.h.values[j]) g.push_back(c);
      else for (const auto& lit : c) g.push_back(Clause(std::vector<Literal>{lit.negated()}));
    }
    EXPECT_GT(oracle::model_count(conjoin_query(m, g)), 0u);
  }
}

TEST(Sampler, UnsatisfiableHard) {
  PropMRF m(1, {Clause{1}, Clause{-1}}, {{Clause{1}, 1.0}});
  EXPECT_THROW(FormulaSampler(m, soft_clause_formulas(m), uniform_proposal()), NoConsistentSample);
  SamplingOptions o;
  o.samples = 10;
  EXPECT_THROW(run_sampling(m, o), NoConsistentSample);
}

TEST(Sampler, HardOnlyEmptyH) {
  PropMRF m(4, {Clause{1, 2}, Clause{-3, 4}}, {});
  FormulaSampler sampler(m, {}, uniform_proposal());
  Rng rng(4);
  Sample s = sampler.draw(rng);
  EXPECT_NEAR(std::exp(s.log_estimate()), 9.0, 1e-9);
}

TEST(Sampler, PosteriorProposalHasZeroVariance) {
  const double w = 0.8;
  PropMRF m(1, {}, {{Clause{1}, w}});
  const double p = std::exp(w) / (std::exp(w) + 1);
  Proposal posterior = [p](const ProposalContext&) { return p; };
  FormulaSampler sampler(m, soft_clause_formulas(m), posterior, {.proposal_floor = 0});
  Rng rng(5);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(std::exp(sampler.draw(rng).log_estimate()), std::exp(w) + 1, 1e-12);
  EXPECT_NEAR(expected_log_estimate(FormulaSampler(m, soft_clause_formulas(m), uniform_proposal()).enumerate()),
              std::log(std::exp(w) + 1), 1e-12);
}

TEST(Sampler, EnumerationIsUnbiased) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    PropMRF m = gen_random({.n = 10, .m = 10, .s = 3, .seed = seed});
    m = PropMRF(10, {oracle::random_clause(10, 2, rng)}, m.soft());
    auto bp = run_bp(m);
    auto h = soft_clause_formulas(m);
    FormulaSampler sampler(m, h, bp_formula_proposal(m, bp, h));
    auto all = sampler.enumerate();
    double total_qb = kNegInf;
    for (const auto& s : all) total_qb = log_add(total_qb, s.log_qb);
    EXPECT_NEAR(total_qb, 0.0, 1e-12);
    EXPECT_NEAR(expected_log_estimate(all), oracle::log_z(m), 1e-9) << seed;
  }
}

TEST(Sampler, EmpiricalFrequenciesMatchQb) {
  PropMRF m(4, {Clause{1, 2}}, {{Clause{1, 3}, 0.5}, {Clause{-1, 4}, -0.3}, {Clause{2, -3}, 1.0}});
  auto bp = run_bp(m);
  auto h = soft_clause_formulas(m);
  FormulaSampler sampler(m, h, bp_formula_proposal(m, bp, h));
  std::map<std::vector<bool>, double> expected;
  for (const auto& s : sampler.enumerate()) expected[s.h.values] = s.qb();
  std::map<std::vector<bool>, double> seen;
  Rng rng(6);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Sample s = sampler.draw(rng);
    seen[s.h.values] += 1.0 / n;
    EXPECT_NEAR(s.qb(), expected.at(s.h.values), 1e-12);
  }
  for (const auto& [key, p] : expected) EXPECT_NEAR(seen[key], p, 0.015);
}

TEST(Sampler, ForcedStepsSkipProposal) {
  PropMRF m(2, {Clause{1}}, {{Clause{1, 2}, 0.3}, {Clause{2}, 0.1}});
  int calls = 0;
  Proposal counting = [&calls](const ProposalContext& ctx) {
    ++calls;
    EXPECT_EQ(ctx.step, 1u);
    return 0.5;
  };
  FormulaSampler sampler(m, soft_clause_formulas(m), counting);
  Rng rng(7);
  sampler.draw(rng);
  EXPECT_EQ(calls, 1);
}

TEST(Vis, ExactExpectationIsZ) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PropMRF m = oracle::random_mix({.n = 9, .hard = 2, .soft = 8, .sizes = {2, 3}, .sat_hard = true}, seed);
    auto q = random_q(9, rng);
    EXPECT_NEAR(vis_expectation(m, q, 1), oracle::log_z(m), 1e-9);
  }
}

TEST(Vis, InconsistentDrawsWeighZero) {
  PropMRF m(2, {Clause{1}}, {});
  Assignment x = Assignment::from_bits(2, 0);
  std::vector<double> q{0.5, 0.5};
  EXPECT_EQ(vis_log_estimator(m, q, x), kNegInf);
  PropMRF unsat(1, {Clause{1}, Clause{-1}}, {});
  SamplingOptions o;
  o.method = SamplingMethod::Vis;
  o.samples = 50;
  EXPECT_EQ(run_sampling(unsat, o).estimate.log_z_hat, kNegInf);
}

TEST(UFromQ, UniformSingleClause) {
  PropMRF m(4, {}, {{Clause{1, -2, 3}, 0.0}});
  std::vector<double> q(4, 0.5);
  auto h = soft_clause_formulas(m);
  auto u = u_from_q(m, q, h);
  EXPECT_NEAR(u.total, 1.0, 1e-15);
  EXPECT_NEAR(u.mass.at({true}), 7.0 / 8.0, 1e-15);
  std::vector<bool> empty;
  Assignment none(4);
  EXPECT_NEAR(u.conditional()(ProposalContext{0, h[0], empty, none}), 7.0 / 8.0, 1e-15);
}

TEST(UFromQ, InconsistentHHasNoMass) {
  PropMRF m(2, {Clause{-1}, Clause{-2}}, {{Clause{1, 2}, 0.0}});
  std::vector<double> q{0.3, 0.6};
  auto u = u_from_q(m, q, soft_clause_formulas(m));
  EXPECT_EQ(u.mass.count({true}), 0u);
}

TEST(UFromQ, TotalIsSolutionMass) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PropMRF m = oracle::random_mix({.n = 8, .hard = 3, .soft = 8, .sizes = {2, 3}}, seed);
    auto q = random_q(8, rng);
    auto u = u_from_q(m, q, soft_clause_formulas(m));
    double direct = 0;
    for (std::uint64_t bits = 0; bits < 256; ++bits) {
      auto x = Assignment::from_bits(8, bits);
      bool ok = true;
      for (const auto& c : m.hard()) ok = ok && clause_status(c, x) == ClauseStatus::Satisfied;
      if (!ok) continue;
      double p = 1;
      for (int v = 1; v <= 8; ++v) p *= x.is_true(v) ? q[v - 1] : 1 - q[v - 1];
      direct += p;
    }
    double sum = 0;
    for (const auto& [h, mass] : u.mass) sum += mass;
    EXPECT_NEAR(sum, direct, 1e-12);
    EXPECT_NEAR(u.total, direct, 1e-12);
  }
  EXPECT_THROW(u_from_q(PropMRF(21, {}, {}), std::vector<double>(21, 0.5), {}), InstanceTooLarge);
}

TEST(VarianceOrdering, FormulaVarianceNeverLarger) {
  std::mt19937_64 rng(10);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    PropMRF m = oracle::random_mix({.n = 8, .hard = 2, .soft = 7, .sizes = {2, 3}, .sat_hard = true}, seed);
    auto q = random_q(8, rng);
    auto h = soft_clause_formulas(m);
    auto u = u_from_q(m, q, h);
    FormulaSampler sampler(m, h, u.conditional(), {.proposal_floor = 0});
    auto all = sampler.enumerate();
    double z = oracle::log_z(m);
    double fis_second = kNegInf;
    for (const auto& s : all) fis_second = log_add(fis_second, s.log_qb + 2 * s.log_estimate());
    double vis_second = vis_expectation(m, q, 2);
    double var_fis = std::exp(fis_second) - std::exp(2 * z);
    double var_vis = std::exp(vis_second) - std::exp(2 * z);
    EXPECT_LE(var_fis, var_vis * (1 + 1e-9) + 1e-9) << seed;
  }
}

TEST(Accumulator, MatchesDirectMoments) {
  std::vector<double> xs{1.5, 2.0, 0.25, 8.0, 3.0};
  LogMeanAccumulator acc;
  for (double x : xs) acc.add(std::log(x));
  double mean = 0;
  for (double x : xs) mean += x / 5;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean) / 4;
  EXPECT_NEAR(std::exp(acc.log_mean()), mean, 1e-12);
  EXPECT_NEAR(std::exp(acc.log_variance()), var, 1e-12);
}

TEST(Accumulator, MergeEqualsSequential) {
  LogMeanAccumulator all, a, b;
  for (int i = 0; i < 40; ++i) {
    double lx = 700.0 + 0.1 * i - (i % 3);
    all.add(lx);
    (i % 2 ? a : b).add(lx);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), 40u);
  EXPECT_NEAR(a.log_mean(), all.log_mean(), 1e-12);
  EXPECT_NEAR(a.log_variance(), all.log_variance(), 1e-10);
}

TEST(Accumulator, HugeExponentsAndZeros) {
  LogMeanAccumulator acc;
  acc.add(kNegInf);
  acc.add(5000.0);
  EXPECT_NEAR(acc.log_mean(), 5000.0 - std::log(2.0), 1e-12);
  LogMeanAccumulator zeros;
  zeros.add(kNegInf);
  EXPECT_EQ(zeros.log_mean(), kNegInf);
  EXPECT_THROW(zeros.add(std::nan("")), std::domain_error);
}

TEST(Marginals, SingleVisSample) {
  Assignment x(2);
  x.set(1, true);
  x.set(2, false);
  std::vector<WeightedAssignment> s{{x, 0.3}};
  EXPECT_EQ(marginals_from_samples(s, 2), (std::vector<double>{1.0, 0.0}));
  std::vector<WeightedAssignment> zero{{x, kNegInf}};
  EXPECT_THROW(marginals_from_samples(zero, 2), std::domain_error);
}

TEST(Marginals, SymmetricModelExactExpectation) {
  PropMRF m(2, {}, {{Clause{1, 2}, 0.9}});
  FormulaSampler sampler(m, soft_clause_formulas(m), uniform_proposal(), {.track_marginals = true});
  auto all = sampler.enumerate();
  // Weighting each h by qb turns the self-normalized form into exact moments.
  for (auto& s : all) s.log_qb = 0;
  auto p = marginals_from_samples(all, 2);
  EXPECT_EQ(p[0], p[1]);
  auto exact = oracle::marginals(m);
  EXPECT_NEAR(p[0], exact[0], 1e-12);
}

TEST(Marginals, SampledCloseToExact) {
  PropMRF m = oracle::random_mix({.n = 8, .hard = 1, .soft = 8, .sizes = {2, 3}, .sat_hard = true}, 4);
  auto exact = oracle::marginals(m);
  for (auto method : {SamplingMethod::Fis, SamplingMethod::Vis}) {
    SamplingOptions o;
    o.method = method;
    o.samples = 5000;
    o.seed = 3;
    o.marginals = true;
    auto run = run_sampling(m, o);
    ASSERT_EQ(run.marginals.size(), 8u);
    EXPECT_LT(sum_kld(exact, run.marginals), 0.02);
  }
}

TEST(Sampling, DeterministicPerSeed) {
  PropMRF m = oracle::random_mix({.n = 10, .hard = 2, .soft = 10, .sizes = {3}, .sat_hard = true}, 2);
  for (unsigned jobs : {1U, 3U}) {
    SamplingOptions o;
    o.samples = 300;
    o.seed = 42;
    o.jobs = jobs;
    auto a = run_sampling(m, o).estimate;
    auto b = run_sampling(m, o).estimate;
    EXPECT_EQ(a.log_z_hat, b.log_z_hat);
    EXPECT_EQ(a.log_sample_variance, b.log_sample_variance);
    EXPECT_EQ(a.n_samples, 300u);
  }
  SamplingOptions o;
  o.samples = 300;
  o.seed = 43;
  SamplingOptions p = o;
  p.seed = 44;
  EXPECT_NE(run_sampling(m, o).estimate.log_z_hat, run_sampling(m, p).estimate.log_z_hat);
}

TEST(Sampling, OrderValidation) {
  PropMRF m(3, {}, {{Clause{1, 2}, 0.1}, {Clause{2, 3}, 0.2}});
  SamplingOptions o;
  o.samples = 10;
  o.order = {1, 0};
  EXPECT_NO_THROW(run_sampling(m, o));
  o.order = {0, 0};
  EXPECT_THROW(run_sampling(m, o), std::invalid_argument);
  o.order = {0};
  EXPECT_THROW(run_sampling(m, o), std::invalid_argument);
}

TEST(Sampling, EstimateNearExact) {
  PropMRF m = oracle::random_mix({.n = 10, .hard = 2, .soft = 10, .sizes = {3}, .sat_hard = true}, 11);
  SamplingOptions o;
  o.samples = 4000;
  o.seed = 1;
  auto e = estimate_z(m, o);
  double z = oracle::log_z(m);
  EXPECT_LE(std::abs(e.z_hat() - std::exp(z)), 4 * e.std_error() + 1e-12);
}
