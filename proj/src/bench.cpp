#include "pmrf/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pmrf/errors.hpp"
#include "pmrf/logmath.hpp"

namespace pmrf {

namespace {

using Rng = std::mt19937_64;

double draw_weight(Rng& rng, const WeightLaw& law) {
  return std::uniform_real_distribution<double>(law.low, law.high)(rng);
}

// `count` distinct values from 1..n, in draw order (partial Fisher-Yates).
std::vector<int> distinct_vars(Rng& rng, int n, int count) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 1);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

void check_law(const WeightLaw& law) {
  if (!(law.low <= law.high) || !std::isfinite(law.low) || !std::isfinite(law.high)) {
    throw std::invalid_argument("weight law needs finite low <= high");
  }
}

}  // namespace

PropMRF gen_random(const RandomSpec& spec) {
  if (spec.n < 1 || spec.m < 1 || spec.s < 1) throw std::invalid_argument("random model needs n, m, s >= 1");
  if (spec.s > spec.n) throw std::invalid_argument("clause size s exceeds variable count n");
  check_law(spec.weights);
  Rng rng(spec.seed);
  std::vector<SoftClause> soft;
  soft.reserve(static_cast<std::size_t>(spec.m));
  for (int i = 0; i < spec.m; ++i) {
    std::vector<Literal> lits;
    for (int v : distinct_vars(rng, spec.n, spec.s)) {
      lits.emplace_back(v, std::bernoulli_distribution(0.5)(rng));
    }
    double w = draw_weight(rng, spec.weights);
    soft.push_back({Clause(std::move(lits)), w});
  }
  return PropMRF(spec.n, {}, std::move(soft));
}

PropMRF gen_qmr(const QmrSpec& spec) {
  if (spec.d < 1 || spec.f < 1 || spec.s < 1) throw std::invalid_argument("QMR model needs d, f, s >= 1");
  if (spec.s > spec.d) throw std::invalid_argument("causes per symptom s exceeds disease count d");
  check_law(spec.weights);
  Rng rng(spec.seed);
  std::vector<SoftClause> soft;
  soft.reserve(static_cast<std::size_t>(spec.d + spec.f));
  for (int v = 1; v <= spec.d; ++v) soft.push_back({Clause{v}, draw_weight(rng, spec.weights)});
  for (int j = 0; j < spec.f; ++j) {
    std::vector<Literal> lits;
    for (int v : distinct_vars(rng, spec.d, spec.s)) lits.emplace_back(v, true);
    double w = draw_weight(rng, spec.weights);
    soft.push_back({Clause(std::move(lits)), w});
  }
  return PropMRF(spec.d, {}, std::move(soft));
}

PropMRF gen_fs(const FsSpec& spec) {
  const int k = spec.people;
  if (k < 1) throw std::invalid_argument("friends & smokers needs at least one person");
  check_law(spec.weights);
  Rng rng(spec.seed);
  const double w_friends = draw_weight(rng, spec.weights);
  const double w_cancer = draw_weight(rng, spec.weights);
  auto smokes = [](int a) { return a; };
  auto cancer = [k](int a) { return k + a; };
  auto friends = [k](int a, int b) { return 2 * k + (a - 1) * k + b; };

  std::vector<SoftClause> soft;
  for (int a = 1; a <= k; ++a) {
    for (int b = 1; b <= k; ++b) {
      // friends(a,a) & smokes(a) => smokes(a) is a tautology.
      if (a == b) continue;
      soft.push_back({Clause{-friends(a, b), -smokes(a), smokes(b)}, w_friends});
    }
  }
  for (int a = 1; a <= k; ++a) soft.push_back({Clause{-smokes(a), cancer(a)}, w_cancer});
  return PropMRF(k * k + 2 * k, {}, std::move(soft));
}

PropMRF pick_evidence(const PropMRF& m, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("evidence fraction must be in [0, 1]");
  const int n = m.num_vars();
  // Guard against 0.05 * 40 landing a hair above 2.
  int count = static_cast<int>(std::ceil(fraction * n - 1e-9));
  count = std::clamp(count, 0, n);
  if (count == 0) return m;
  Rng rng(seed);
  std::vector<Clause> hard = m.hard();
  for (int v : distinct_vars(rng, n, count)) {
    hard.push_back(Clause(std::vector<Literal>{Literal(v, std::bernoulli_distribution(0.5)(rng))}));
  }
  return PropMRF(n, std::move(hard), m.soft());
}

double brute_force_z(const PropMRF& m) {
  const int n = m.num_vars();
  if (n > kBruteForceMaxVars) {
    throw InstanceTooLarge("brute-force enumeration is limited to " + std::to_string(kBruteForceMaxVars) +
                           " variables");
  }
  // Streaming log-sum-exp: sum holds exp(term - hi).
  double hi = kNegInf;
  double sum = 0.0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    Assignment x = Assignment::from_bits(n, bits);
    bool solution = std::all_of(m.hard().begin(), m.hard().end(),
                                [&](const Clause& c) { return clause_status(c, x) == ClauseStatus::Satisfied; });
    if (!solution) continue;
    double w = 0.0;
    for (const SoftClause& s : m.soft()) {
      if (clause_status(s.clause, x) == ClauseStatus::Satisfied) w += s.weight;
    }
    if (w > hi) {
      sum = (hi == kNegInf ? 0.0 : sum * std::exp(hi - w)) + 1.0;
      hi = w;
    } else {
      sum += std::exp(w - hi);
    }
  }
  return hi == kNegInf ? kNegInf : hi + std::log(sum);
}

double sum_kld(std::span<const double> exact, std::span<const double> approx) {
  if (exact.size() != approx.size()) throw std::invalid_argument("marginal vectors differ in length");
  constexpr double eps = 1e-9;
  auto term = [](double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; };
  double total = 0.0;
  for (std::size_t j = 0; j < exact.size(); ++j) {
    double p = exact[j];
    double q = std::clamp(approx[j], eps, 1.0 - eps);
    total += term(p, q) + term(1.0 - p, 1.0 - q);
  }
  return std::max(total, 0.0);
}

}  // namespace pmrf
