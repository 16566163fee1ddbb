#include "pmrf/simplify.hpp"

#include <algorithm>

#include "pmrf/logmath.hpp"
#include "pmrf/sat.hpp"

namespace pmrf {

namespace {

// Removes literals made false; caller has already dropped satisfied clauses.
Clause strip_false(const Clause& c, const Assignment& a) {
  std::vector<Literal> kept;
  kept.reserve(c.size());
  for (const Literal& lit : c) {
    if (a.value(lit) != TruthValue::False) kept.push_back(lit);
  }
  return Clause(std::move(kept));
}

// Drops hard clauses that contain (or equal, and come after) another hard clause.
std::vector<Clause> remove_subsumed(std::vector<Clause> clauses) {
  std::vector<std::size_t> order(clauses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return clauses[a].size() < clauses[b].size(); });
  std::vector<bool> dropped(clauses.size(), false);
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    std::size_t i = order[oi];
    if (dropped[i]) continue;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      std::size_t j = order[oj];
      if (!dropped[j] && clauses[i].subset_of(clauses[j])) dropped[j] = true;
    }
  }
  std::vector<Clause> out;
  out.reserve(clauses.size());
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (!dropped[i]) out.push_back(std::move(clauses[i]));
  }
  return out;
}

}  // namespace

std::pair<PropMRF, std::vector<int>> compact(int num_vars, std::vector<Clause> hard,
                                             std::vector<SoftClause> soft) {
  std::vector<int> rename(static_cast<std::size_t>(num_vars) + 1, 0);
  auto mark = [&](const Clause& c) {
    for (const Literal& lit : c) rename[static_cast<std::size_t>(lit.var())] = 1;
  };
  for (const Clause& c : hard) mark(c);
  for (const SoftClause& s : soft) mark(s.clause);
  std::vector<int> variables;
  for (int v = 1; v <= num_vars; ++v) {
    if (rename[static_cast<std::size_t>(v)] != 0) {
      variables.push_back(v);
      rename[static_cast<std::size_t>(v)] = static_cast<int>(variables.size());
    }
  }
  auto relabel = [&](const Clause& c) {
    std::vector<Literal> lits;
    lits.reserve(c.size());
    for (const Literal& lit : c) lits.emplace_back(rename[static_cast<std::size_t>(lit.var())], lit.positive());
    return Clause(std::move(lits));
  };
  for (Clause& c : hard) c = relabel(c);
  for (SoftClause& s : soft) s.clause = relabel(s.clause);
  int k = static_cast<int>(variables.size());
  return {PropMRF(k, std::move(hard), std::move(soft)), std::move(variables)};
}

SimplifyOutcome simplify(const PropMRF& m) {
  SimplifyOutcome out;
  std::vector<Clause> hard = m.hard();
  std::vector<SoftClause> soft = m.soft();
  Assignment forced(m.num_vars());
  double log_weight = 0.0;

  auto zero = [&] {
    out.status = SimplifyStatus::Zero;
    out.log_weight = kNegInf;
    out.forced = forced;
    return out;
  };

  // Propagation is the only step that can assign variables, and the later
  // steps only delete clauses or literals already false, so a single pass of
  // each reaches the fixpoint.
  PropagationResult pr = unit_propagate(hard, forced);
  forced = std::move(pr.assignment);
  if (!pr.consistent()) return zero();

  std::vector<Clause> reduced_hard;
  reduced_hard.reserve(hard.size());
  for (const Clause& c : hard) {
    if (clause_status(c, forced) == ClauseStatus::Satisfied) continue;
    reduced_hard.push_back(strip_false(c, forced));
    if (reduced_hard.back().empty()) return zero();
  }
  reduced_hard = remove_subsumed(std::move(reduced_hard));

  std::vector<SoftClause> reduced_soft;
  reduced_soft.reserve(soft.size());
  for (const SoftClause& s : soft) {
    switch (clause_status(s.clause, forced)) {
      case ClauseStatus::Satisfied: log_weight += s.weight; continue;
      case ClauseStatus::Falsified: continue;
      case ClauseStatus::Undetermined: break;
    }
    Clause body = strip_false(s.clause, forced);
    bool implied = std::any_of(reduced_hard.begin(), reduced_hard.end(),
                               [&](const Clause& h) { return h.subset_of(body); });
    if (implied) {
      log_weight += s.weight;
      continue;
    }
    reduced_soft.push_back({std::move(body), s.weight});
  }

  auto [model, variables] = compact(m.num_vars(), std::move(reduced_hard), std::move(reduced_soft));
  int free_vars = m.num_vars() - forced.count_assigned() - model.num_vars();
  log_weight += free_vars * kLn2;

  out.status = model.num_clauses() == 0 ? SimplifyStatus::Scalar : SimplifyStatus::Open;
  out.model = std::move(model);
  out.variables = std::move(variables);
  out.log_weight = log_weight;
  out.forced = std::move(forced);
  return out;
}

}  // namespace pmrf
