#include "pmrf/bp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "pmrf/errors.hpp"

namespace pmrf {

namespace {

constexpr int kMaxTabulatedWidth = 20;

using Message = std::array<double, 2>;  // [false, true]

bool normalize(Message& m) {
  double z = m[0] + m[1];
  if (!(z > 0.0)) return false;
  m[0] /= z;
  m[1] /= z;
  return true;
}

struct FactorNode {
  const Clause* clause;
  double sat;    // potential when satisfied, scaled so max(sat, unsat) = 1
  double unsat;
  std::vector<Message> to_var;    // factor -> variable, per literal position
  std::vector<Message> from_var;  // variable -> factor, per literal position
};

FactorNode make_node(const Clause& c, double sat_log, double unsat_log) {
  FactorNode f;
  f.clause = &c;
  double hi = std::max(sat_log, unsat_log);
  f.sat = std::exp(sat_log - hi);
  f.unsat = std::exp(unsat_log - hi);
  f.to_var.assign(c.size(), Message{0.5, 0.5});
  f.from_var.assign(c.size(), Message{0.5, 0.5});
  return f;
}

// Sum over the factor's other variables, using that incoming messages are
// normalized: every configuration weighs `sat` except the single falsifying one.
void update_factor(FactorNode& f, double damping, double& change) {
  const std::size_t k = f.clause->size();
  std::vector<double> prefix(k + 1, 1.0), suffix(k + 1, 1.0);
  auto falsifying_mass = [&](std::size_t j) {
    const Literal& lit = (*f.clause)[j];
    return f.from_var[j][lit.positive() ? 0 : 1];
  };
  for (std::size_t j = 0; j < k; ++j) prefix[j + 1] = prefix[j] * falsifying_mass(j);
  for (std::size_t j = k; j > 0; --j) suffix[j - 1] = suffix[j] * falsifying_mass(j - 1);
  for (std::size_t j = 0; j < k; ++j) {
    const Literal& lit = (*f.clause)[j];
    const std::size_t falsifying_value = lit.positive() ? 0 : 1;
    Message out{f.sat, f.sat};
    out[falsifying_value] -= (f.sat - f.unsat) * prefix[j] * suffix[j + 1];
    out[falsifying_value] = std::max(out[falsifying_value], 0.0);
    if (!normalize(out)) out = Message{0.5, 0.5};
    Message& old = f.to_var[j];
    Message next{(1.0 - damping) * out[0] + damping * old[0], (1.0 - damping) * out[1] + damping * old[1]};
    // Exact zeros from hard factors are not smoothed away.
    for (std::size_t b = 0; b < 2; ++b) {
      if (out[b] == 0.0) next[b] = 0.0;
    }
    normalize(next);
    change = std::max(change, std::max(std::abs(next[0] - old[0]), std::abs(next[1] - old[1])));
    old = next;
  }
}

FactorMarginal tabulate(const FactorNode& f) {
  const std::size_t k = f.clause->size();
  FactorMarginal out;
  for (const Literal& lit : *f.clause) out.scope.push_back(lit.var());
  std::size_t falsifying = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(*f.clause)[j].positive()) falsifying |= std::size_t{1} << j;
  }
  const std::size_t size = std::size_t{1} << k;
  out.probabilities.resize(size);
  double z = 0.0;
  for (std::size_t y = 0; y < size; ++y) {
    double p = y == falsifying ? f.unsat : f.sat;
    for (std::size_t j = 0; j < k && p > 0.0; ++j) p *= f.from_var[j][(y >> j) & 1U];
    out.probabilities[y] = p;
    z += p;
  }
  if (z > 0.0) {
    for (double& p : out.probabilities) p /= z;
  } else {
    std::fill(out.probabilities.begin(), out.probabilities.end(), 1.0 / static_cast<double>(size));
  }
  return out;
}

}  // namespace

BpMarginals run_bp(const PropMRF& m, const BpOptions& options) {
  if (options.max_iters < 1) throw std::invalid_argument("belief propagation needs max_iters >= 1");
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw std::invalid_argument("damping must be in [0, 1)");

  std::vector<FactorNode> nodes;
  nodes.reserve(m.num_clauses());
  for (const Clause& c : m.hard()) {
    if (c.empty()) throw std::domain_error("model contains an empty hard clause");
    nodes.push_back(make_node(c, 0.0, -std::numeric_limits<double>::infinity()));
  }
  for (const SoftClause& s : m.soft()) nodes.push_back(make_node(s.clause, s.weight, 0.0));
  for (const FactorNode& f : nodes) {
    if (static_cast<int>(f.clause->size()) > kMaxTabulatedWidth) {
      throw FactorTooLarge("clause too wide for belief propagation", static_cast<int>(f.clause->size()));
    }
  }

  // Incidence lists: (factor, literal position) per variable.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident(static_cast<std::size_t>(m.num_vars()) + 1);
  for (std::size_t fi = 0; fi < nodes.size(); ++fi) {
    const Clause& c = *nodes[fi].clause;
    for (std::size_t j = 0; j < c.size(); ++j) incident[static_cast<std::size_t>(c[j].var())].emplace_back(fi, j);
  }

  std::vector<Message> belief(static_cast<std::size_t>(m.num_vars()) + 1, Message{0.5, 0.5});
  auto update_variables = [&] {
    for (int v = 1; v <= m.num_vars(); ++v) {
      const auto& inc = incident[static_cast<std::size_t>(v)];
      const std::size_t d = inc.size();
      std::vector<Message> prefix(d + 1, Message{1.0, 1.0}), suffix(d + 1, Message{1.0, 1.0});
      for (std::size_t i = 0; i < d; ++i) {
        const Message& in = nodes[inc[i].first].to_var[inc[i].second];
        prefix[i + 1] = {prefix[i][0] * in[0], prefix[i][1] * in[1]};
        // Rescale to keep long products away from underflow.
        normalize(prefix[i + 1]);
      }
      for (std::size_t i = d; i > 0; --i) {
        const Message& in = nodes[inc[i - 1].first].to_var[inc[i - 1].second];
        suffix[i - 1] = {suffix[i][0] * in[0], suffix[i][1] * in[1]};
        normalize(suffix[i - 1]);
      }
      Message full = prefix[d];
      if (d > 0 && !(full[0] + full[1] > 0.0)) throw DegenerateBelief(v);
      belief[static_cast<std::size_t>(v)] = full;
      for (std::size_t i = 0; i < d; ++i) {
        Message out{prefix[i][0] * suffix[i + 1][0], prefix[i][1] * suffix[i + 1][1]};
        if (!normalize(out)) throw DegenerateBelief(v);
        nodes[inc[i].first].from_var[inc[i].second] = out;
      }
    }
  };

  BpMarginals out;
  for (int it = 1; it <= options.max_iters; ++it) {
    double change = 0.0;
    for (FactorNode& f : nodes) update_factor(f, options.damping, change);
    update_variables();
    out.iterations = it;
    if (change < options.tol) {
      out.converged = true;
      break;
    }
  }

  out.variable_marginals.reserve(static_cast<std::size_t>(m.num_vars()));
  for (int v = 1; v <= m.num_vars(); ++v) out.variable_marginals.push_back(belief[static_cast<std::size_t>(v)][1]);
  std::size_t fi = 0;
  for (; fi < m.hard().size(); ++fi) out.hard_factors.push_back(tabulate(nodes[fi]));
  for (; fi < nodes.size(); ++fi) out.soft_factors.push_back(tabulate(nodes[fi]));
  return out;
}

double formula_proposal(const FactorMarginal& marginal, const Clause& clause, const Assignment& forced) {
  const std::size_t k = clause.size();
  if (marginal.scope.size() != k || marginal.probabilities.size() != (std::size_t{1} << k)) {
    throw std::invalid_argument("factor marginal does not match the clause scope");
  }
  // Values the forced literals allow per position: bit 0 = false ok, bit 1 = true ok.
  std::vector<unsigned> allowed(k, 3U);
  std::size_t falsifying = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (marginal.scope[j] != clause[j].var()) throw std::invalid_argument("factor marginal scope order differs");
    switch (forced.value(clause[j].var())) {
      case TruthValue::True: allowed[j] = 2U; break;
      case TruthValue::False: allowed[j] = 1U; break;
      case TruthValue::Unassigned: break;
    }
    if (!clause[j].positive()) falsifying |= std::size_t{1} << j;
  }
  double satisfying = 0.0;
  double falsified = 0.0;
  for (std::size_t y = 0; y < marginal.probabilities.size(); ++y) {
    bool consistent = true;
    for (std::size_t j = 0; j < k && consistent; ++j) consistent = ((allowed[j] >> ((y >> j) & 1U)) & 1U) != 0;
    if (!consistent) continue;
    (y == falsifying ? falsified : satisfying) += marginal.probabilities[y];
  }
  if (satisfying + falsified <= 0.0) return 0.5;
  return satisfying / (satisfying + falsified);
}

FactorMarginal independent_marginal(const BpMarginals& marginals, const Clause& clause) {
  FactorMarginal out;
  for (const Literal& lit : clause) out.scope.push_back(lit.var());
  const std::size_t k = clause.size();
  out.probabilities.assign(std::size_t{1} << k, 1.0);
  for (std::size_t y = 0; y < out.probabilities.size(); ++y) {
    for (std::size_t j = 0; j < k; ++j) {
      double p = marginals.p_true(clause[j].var());
      out.probabilities[y] *= ((y >> j) & 1U) ? p : 1.0 - p;
    }
  }
  return out;
}

std::vector<double> variable_proposal(const BpMarginals& marginals) { return marginals.variable_marginals; }

}  // namespace pmrf
