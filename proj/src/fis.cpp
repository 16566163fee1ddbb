#include "pmrf/fis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "pmrf/errors.hpp"
#include "pmrf/logmath.hpp"
#include "pmrf/sat.hpp"

namespace pmrf {

namespace {

// H_i = value as clauses: the clause itself, or the negation of each literal.
void append_constraint(std::vector<Clause>& g, const Clause& h, bool value) {
  if (value) {
    g.push_back(h);
    return;
  }
  for (const Literal& lit : h) g.push_back(Clause(std::vector<Literal>{lit.negated()}));
}

double satisfied_soft_weight(const PropMRF& m, const Assignment& x) {
  double w = 0.0;
  for (const SoftClause& s : m.soft()) {
    if (clause_status(s.clause, x) == ClauseStatus::Satisfied) w += s.weight;
  }
  return w;
}

}  // namespace

Proposal uniform_proposal() {
  return [](const ProposalContext&) { return 0.5; };
}

Proposal bp_formula_proposal(const PropMRF& m, const BpMarginals& marginals, std::span<const Clause> formulas) {
  auto tables = std::make_shared<std::vector<FactorMarginal>>();
  tables->reserve(formulas.size());
  for (const Clause& h : formulas) {
    const FactorMarginal* table = nullptr;
    for (std::size_t j = 0; j < m.soft().size() && table == nullptr; ++j) {
      if (m.soft()[j].clause == h) table = &marginals.soft_factors[j];
    }
    for (std::size_t j = 0; j < m.hard().size() && table == nullptr; ++j) {
      if (m.hard()[j] == h) table = &marginals.hard_factors[j];
    }
    tables->push_back(table != nullptr ? *table : independent_marginal(marginals, h));
  }
  return [tables](const ProposalContext& ctx) {
    if (ctx.step >= tables->size()) throw std::out_of_range("proposal step beyond the formula sequence");
    return formula_proposal((*tables)[ctx.step], ctx.clause, ctx.forced);
  };
}

std::vector<Clause> soft_clause_formulas(const PropMRF& m) {
  std::vector<Clause> out;
  out.reserve(m.soft().size());
  for (const SoftClause& s : m.soft()) out.push_back(s.clause);
  return out;
}

// ---------------------------------------------------------------------------
// FormulaSampler

struct FormulaSampler::State {
  std::vector<bool> prefix;
  std::vector<Clause> constraints;  // hard clauses and H_i = h_i so far
  Assignment forced;
  Assignment witness;  // a solution of `constraints`

  std::size_t step() const { return prefix.size(); }
};

FormulaSampler::FormulaSampler(const PropMRF& m, std::vector<Clause> formulas, Proposal proposal,
                               SamplerOptions options)
    : model_(m), formulas_(std::move(formulas)), proposal_(std::move(proposal)), options_(options) {
  if (!(options_.proposal_floor >= 0.0 && options_.proposal_floor < 0.5)) {
    throw std::invalid_argument("proposal floor must be in [0, 0.5)");
  }
  for (const Clause& h : formulas_) {
    if (h.max_var() > m.num_vars()) throw std::out_of_range("formula mentions a variable outside the model");
  }
  auto witness = find_model(model_.hard(), model_.num_vars());
  if (!witness) throw NoConsistentSample("the hard clauses have no solution");
  initial_witness_ = std::move(*witness);
}

double FormulaSampler::branch_probability(const State& state) const {
  ProposalContext ctx{state.step(), formulas_[state.step()], state.prefix, state.forced};
  double p = proposal_(ctx);
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("proposal returned a value outside [0, 1]");
  return std::clamp(p, options_.proposal_floor, 1.0 - options_.proposal_floor);
}

const FormulaSampler::Counts& FormulaSampler::counts_for(const std::vector<bool>& h,
                                                         const std::vector<Clause>& constraints) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(h); it != cache_.end()) return *it->second;
  }
  auto counts = std::make_shared<Counts>();
  const int n = model_.num_vars();
  counts->log_count = log_model_count(n, constraints, options_.counting);
  if (options_.track_marginals) {
    Assignment forced = unit_propagate(constraints, Assignment(n)).assignment;
    std::vector<Clause> with_unit = constraints;
    with_unit.emplace_back();
    for (int v = 1; v <= n; ++v) {
      switch (forced.value(v)) {
        case TruthValue::True: counts->log_true_counts.push_back(counts->log_count); continue;
        case TruthValue::False: counts->log_true_counts.push_back(kNegInf); continue;
        case TruthValue::Unassigned: break;
      }
      with_unit.back() = Clause(std::vector<Literal>{Literal(v, true)});
      counts->log_true_counts.push_back(log_model_count(n, with_unit, options_.counting));
    }
  }
  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(h, std::move(counts));
  return *it->second;
}

std::size_t FormulaSampler::distinct_assignments() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

void FormulaSampler::finish(const State& state, Sample& out) const {
  out.h.values = state.prefix;
  out.log_soft_weight = satisfied_soft_weight(model_, state.witness);
  const Counts& counts = counts_for(state.prefix, state.constraints);
  out.log_count = counts.log_count;
  out.log_true_counts = counts.log_true_counts;
}

Sample FormulaSampler::draw(Rng& rng) const {
  const int n = model_.num_vars();
  State s{{}, model_.hard(), unit_propagate(model_.hard(), Assignment(n)).assignment, initial_witness_};
  s.prefix.reserve(formulas_.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double log_qb = 0.0;

  while (s.step() < formulas_.size()) {
    const Clause& h = formulas_[s.step()];
    // The witness already shows one truth value of H_i is consistent.
    const bool known = clause_status(h, s.witness) == ClauseStatus::Satisfied;
    std::vector<Clause> trial = s.constraints;
    append_constraint(trial, h, !known);
    std::optional<Assignment> other = find_model(trial, s.forced);

    bool value = known;
    if (other) {
      double p = branch_probability(s);
      value = uniform(rng) < p;
      log_qb += std::log(value ? p : 1.0 - p);
    }
    if (value != known) {
      s.constraints = std::move(trial);
      s.witness = std::move(*other);
    } else {
      append_constraint(s.constraints, h, value);
    }
    s.prefix.push_back(value);
    s.forced = unit_propagate(s.constraints, std::move(s.forced)).assignment;
  }

  Sample out;
  out.log_qb = log_qb;
  finish(s, out);
  return out;
}

void FormulaSampler::enumerate_from(State state, double log_prob, std::vector<Sample>& out) const {
  if (state.step() == formulas_.size()) {
    Sample sample;
    sample.log_qb = log_prob;
    finish(state, sample);
    out.push_back(std::move(sample));
    return;
  }
  const Clause& h = formulas_[state.step()];
  std::optional<Assignment> witness[2];
  std::vector<Clause> branch[2];
  for (int value = 0; value < 2; ++value) {
    branch[value] = state.constraints;
    append_constraint(branch[value], h, value == 1);
    witness[value] = find_model(branch[value], state.forced);
  }
  const bool free_step = witness[0] && witness[1];
  const double p = free_step ? branch_probability(state) : 1.0;
  for (int value = 0; value < 2; ++value) {
    if (!witness[value]) continue;
    double step_prob = free_step ? (value == 1 ? p : 1.0 - p) : 1.0;
    if (step_prob <= 0.0) continue;
    State next{state.prefix, std::move(branch[value]), state.forced, std::move(*witness[value])};
    next.prefix.push_back(value == 1);
    next.forced = unit_propagate(next.constraints, std::move(next.forced)).assignment;
    enumerate_from(std::move(next), log_prob + std::log(step_prob), out);
  }
}

std::vector<Sample> FormulaSampler::enumerate() const {
  const int n = model_.num_vars();
  State root{{}, model_.hard(), unit_propagate(model_.hard(), Assignment(n)).assignment, initial_witness_};
  std::vector<Sample> out;
  enumerate_from(std::move(root), 0.0, out);
  return out;
}

Sample sample_formula_assignment(const PropMRF& m, std::span<const Clause> formulas, const Proposal& proposal,
                                 Rng& rng, const SamplerOptions& options) {
  FormulaSampler sampler(m, std::vector<Clause>(formulas.begin(), formulas.end()), proposal, options);
  return sampler.draw(rng);
}

// ---------------------------------------------------------------------------
// Accumulation

void LogMeanAccumulator::rescale(double new_shift) {
  if (shift_ != kNegInf) {
    const double f = std::exp(shift_ - new_shift);
    mean_ *= f;
    m2_ *= f * f;
  }
  shift_ = new_shift;
}

void LogMeanAccumulator::add(double log_x) {
  if (std::isnan(log_x) || log_x == std::numeric_limits<double>::infinity()) {
    throw std::domain_error("sample estimate is not a finite number or -inf");
  }
  ++n_;
  if (log_x > shift_) rescale(log_x);
  const double x = log_x == kNegInf ? 0.0 : std::exp(log_x - shift_);
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void LogMeanAccumulator::merge(const LogMeanAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  LogMeanAccumulator b = other;
  const double shift = std::max(shift_, b.shift_);
  rescale(shift);
  b.rescale(shift);
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(b.n_);
  const double delta = b.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += b.m2_ + delta * delta * na * nb / total;
  n_ += b.n_;
}

double LogMeanAccumulator::log_mean() const {
  if (n_ == 0 || shift_ == kNegInf || mean_ <= 0.0) return kNegInf;
  return shift_ + std::log(mean_);
}

double LogMeanAccumulator::log_variance() const {
  if (n_ < 2 || shift_ == kNegInf || m2_ <= 0.0) return kNegInf;
  return 2.0 * shift_ + std::log(m2_ / static_cast<double>(n_ - 1));
}

Estimate make_estimate(const LogMeanAccumulator& acc) {
  Estimate e;
  e.n_samples = acc.count();
  e.log_z_hat = acc.log_mean();
  e.log_sample_variance = acc.log_variance();
  e.log_std_error = e.n_samples == 0 ? kNegInf
                                     : 0.5 * (e.log_sample_variance - std::log(static_cast<double>(e.n_samples)));
  return e;
}

// ---------------------------------------------------------------------------
// Variable sampling

double vis_log_estimator(const PropMRF& m, std::span<const double> q, const Assignment& x) {
  for (const Clause& c : m.hard()) {
    if (clause_status(c, x) != ClauseStatus::Satisfied) return kNegInf;
  }
  double log_q = 0.0;
  for (int v = 1; v <= m.num_vars(); ++v) {
    double p = q[static_cast<std::size_t>(v) - 1];
    log_q += std::log(x.is_true(v) ? p : 1.0 - p);
  }
  return satisfied_soft_weight(m, x) - log_q;
}

WeightedAssignment draw_vis(const PropMRF& m, std::span<const double> q, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  WeightedAssignment out{Assignment(m.num_vars()), 0.0};
  for (int v = 1; v <= m.num_vars(); ++v) out.x.set(v, uniform(rng) < q[static_cast<std::size_t>(v) - 1]);
  out.log_weight = vis_log_estimator(m, q, out.x);
  return out;
}

// ---------------------------------------------------------------------------
// Marginals

namespace {

template <typename Contribution>
std::vector<double> normalize_marginals(std::span<const double> log_weights, int num_vars, Contribution&& share) {
  double hi = kNegInf;
  for (double lw : log_weights) hi = std::max(hi, lw);
  if (hi == kNegInf) throw std::domain_error("every sample has zero weight");
  std::vector<double> num(static_cast<std::size_t>(num_vars), 0.0);
  double den = 0.0;
  for (std::size_t s = 0; s < log_weights.size(); ++s) {
    if (log_weights[s] == kNegInf) continue;
    const double w = std::exp(log_weights[s] - hi);
    den += w;
    for (int v = 1; v <= num_vars; ++v) num[static_cast<std::size_t>(v) - 1] += w * share(s, v);
  }
  for (double& p : num) p = std::clamp(p / den, 0.0, 1.0);
  return num;
}

}  // namespace

std::vector<double> marginals_from_samples(std::span<const Sample> samples, int num_vars) {
  std::vector<double> log_weights;
  log_weights.reserve(samples.size());
  for (const Sample& s : samples) {
    if (static_cast<int>(s.log_true_counts.size()) != num_vars) {
      throw std::invalid_argument("formula sample lacks per-variable counts");
    }
    log_weights.push_back(s.log_estimate());
  }
  return normalize_marginals(log_weights, num_vars, [&](std::size_t s, int v) {
    const Sample& sample = samples[s];
    return std::exp(sample.log_true_counts[static_cast<std::size_t>(v) - 1] - sample.log_count);
  });
}

std::vector<double> marginals_from_samples(std::span<const WeightedAssignment> samples, int num_vars) {
  std::vector<double> log_weights;
  log_weights.reserve(samples.size());
  for (const WeightedAssignment& s : samples) log_weights.push_back(s.log_weight);
  return normalize_marginals(log_weights, num_vars,
                             [&](std::size_t s, int v) { return samples[s].x.is_true(v) ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// Estimation driver

namespace {

std::vector<Clause> ordered_formulas(const PropMRF& m, const std::vector<std::size_t>& order) {
  if (order.empty()) return soft_clause_formulas(m);
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i || sorted.size() != m.soft().size()) {
      throw std::invalid_argument("formula order must be a permutation of the soft clauses");
    }
  }
  std::vector<Clause> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(m.soft()[i].clause);
  return out;
}

struct WorkerResult {
  LogMeanAccumulator acc;
  std::vector<Sample> formula_samples;
  std::vector<WeightedAssignment> variable_samples;
};

template <typename Body>
std::vector<WorkerResult> run_workers(const SamplingOptions& options, Body&& body) {
  const unsigned jobs = std::max(1U, options.jobs);
  std::vector<WorkerResult> results(jobs);
  auto work = [&](unsigned w) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(w)};
    Rng rng(seq);
    std::uint64_t count = options.samples / jobs + (w < options.samples % jobs ? 1 : 0);
    for (std::uint64_t i = 0; i < count; ++i) body(rng, results[w]);
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (std::thread& t : threads) t.join();
  }
  return results;
}

}  // namespace

SamplingRun run_sampling(const PropMRF& m, const SamplingOptions& options) {
  if (options.samples < 1) throw std::invalid_argument("need at least one sample");
  SamplingRun run;
  LogMeanAccumulator total;

  if (options.method == SamplingMethod::Fis) {
    std::vector<Clause> formulas = ordered_formulas(m, options.order);
    if (!is_satisfiable(m.hard())) throw NoConsistentSample("the hard clauses have no solution");
    BpMarginals bp = run_bp(m, options.bp);
    run.bp_iterations = bp.iterations;
    run.bp_converged = bp.converged;
    SamplerOptions sampler_options = options.sampler;
    sampler_options.track_marginals = options.marginals;
    FormulaSampler sampler(m, formulas, bp_formula_proposal(m, bp, formulas), sampler_options);
    auto results = run_workers(options, [&](Rng& rng, WorkerResult& out) {
      Sample s = sampler.draw(rng);
      out.acc.add(s.log_estimate());
      if (options.marginals) out.formula_samples.push_back(std::move(s));
    });
    std::vector<Sample> all;
    for (WorkerResult& r : results) {
      total.merge(r.acc);
      std::move(r.formula_samples.begin(), r.formula_samples.end(), std::back_inserter(all));
    }
    if (options.marginals) run.marginals = marginals_from_samples(all, m.num_vars());
    run.distinct_assignments = sampler.distinct_assignments();
  } else {
    std::vector<double> q;
    try {
      BpMarginals bp = run_bp(m, options.bp);
      run.bp_iterations = bp.iterations;
      run.bp_converged = bp.converged;
      q = variable_proposal(bp);
    } catch (const DegenerateBelief&) {
      // Inconsistent hard clauses: every sample will carry zero weight anyway.
      q.assign(static_cast<std::size_t>(m.num_vars()), 0.5);
    } catch (const std::domain_error&) {
      q.assign(static_cast<std::size_t>(m.num_vars()), 0.5);
    }
    auto results = run_workers(options, [&](Rng& rng, WorkerResult& out) {
      WeightedAssignment s = draw_vis(m, q, rng);
      out.acc.add(s.log_weight);
      if (options.marginals) out.variable_samples.push_back(std::move(s));
    });
    std::vector<WeightedAssignment> all;
    for (WorkerResult& r : results) {
      total.merge(r.acc);
      std::move(r.variable_samples.begin(), r.variable_samples.end(), std::back_inserter(all));
    }
    if (options.marginals) run.marginals = marginals_from_samples(all, m.num_vars());
  }
  run.estimate = make_estimate(total);
  return run;
}

Estimate estimate_z(const PropMRF& m, const SamplingOptions& options) {
  SamplingOptions plain = options;
  plain.marginals = false;
  return run_sampling(m, plain).estimate;
}

// ---------------------------------------------------------------------------
// U from Q

FormulaDistribution u_from_q(const PropMRF& m, std::span<const double> q, std::span<const Clause> formulas) {
  const int n = m.num_vars();
  if (n > kEnumerationMaxVars) {
    throw InstanceTooLarge("U(h) enumeration is limited to " + std::to_string(kEnumerationMaxVars) + " variables");
  }
  if (static_cast<int>(q.size()) != n) throw std::invalid_argument("proposal length differs from variable count");
  FormulaDistribution out;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    Assignment x = Assignment::from_bits(n, bits);
    bool solution = std::all_of(m.hard().begin(), m.hard().end(),
                                [&](const Clause& c) { return clause_status(c, x) == ClauseStatus::Satisfied; });
    if (!solution) continue;
    double qx = 1.0;
    for (int v = 1; v <= n; ++v) qx *= x.is_true(v) ? q[static_cast<std::size_t>(v) - 1] : 1.0 - q[static_cast<std::size_t>(v) - 1];
    std::vector<bool> h;
    h.reserve(formulas.size());
    for (const Clause& c : formulas) h.push_back(clause_status(c, x) == ClauseStatus::Satisfied);
    out.mass[h] += qx;
    out.total += qx;
  }
  return out;
}

Proposal FormulaDistribution::conditional() const {
  auto prefix_mass = std::make_shared<std::map<std::vector<bool>, double>>();
  for (const auto& [h, mass_h] : mass) {
    std::vector<bool> prefix;
    (*prefix_mass)[prefix] += mass_h;
    for (bool b : h) {
      prefix.push_back(b);
      (*prefix_mass)[prefix] += mass_h;
    }
  }
  return [prefix_mass](const ProposalContext& ctx) {
    auto lookup = [&](const std::vector<bool>& key) {
      auto it = prefix_mass->find(key);
      return it == prefix_mass->end() ? 0.0 : it->second;
    };
    const double base = lookup(ctx.prefix);
    if (base <= 0.0) return 0.5;
    std::vector<bool> with_true = ctx.prefix;
    with_true.push_back(true);
    return lookup(with_true) / base;
  };
}

}  // namespace pmrf
