#include "pmrf/sat.hpp"

#include <algorithm>

namespace pmrf {

PropagationResult unit_propagate(std::span<const Clause> hard, Assignment a) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Clause& c : hard) {
      int open = 0;
      const Literal* last_open = nullptr;
      bool satisfied = false;
      for (const Literal& lit : c) {
        TruthValue v = a.value(lit);
        if (v == TruthValue::True) {
          satisfied = true;
          break;
        }
        if (v == TruthValue::Unassigned) {
          ++open;
          last_open = &lit;
        }
      }
      if (satisfied) continue;
      if (open == 0) return {std::move(a), c};
      if (open == 1) {
        a.set(*last_open);
        changed = true;
      }
    }
  }
  return {std::move(a), std::nullopt};
}

int max_variable(std::span<const Clause> clauses) {
  int n = 0;
  for (const Clause& c : clauses) n = std::max(n, c.max_var());
  return n;
}

namespace {

bool dpll(std::span<const Clause> hard, Assignment& a) {
  PropagationResult pr = unit_propagate(hard, std::move(a));
  a = std::move(pr.assignment);
  if (!pr.consistent()) return false;

  int branch = 0;
  for (const Clause& c : hard) {
    if (clause_status(c, a) != ClauseStatus::Undetermined) continue;
    for (const Literal& lit : c) {
      if (!a.is_assigned(lit.var()) && (branch == 0 || lit.var() < branch)) branch = lit.var();
    }
  }
  if (branch == 0) return true;

  for (bool value : {true, false}) {
    Assignment trial = a;
    trial.set(branch, value);
    if (dpll(hard, trial)) {
      a = std::move(trial);
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<Assignment> find_model(std::span<const Clause> hard, Assignment start) {
  if (!dpll(hard, start)) return std::nullopt;
  for (int v = 1; v <= start.num_vars(); ++v) {
    if (!start.is_assigned(v)) start.set(v, false);
  }
  return start;
}

std::optional<Assignment> find_model(std::span<const Clause> hard, int num_vars) {
  return find_model(hard, Assignment(std::max(num_vars, max_variable(hard))));
}

bool is_satisfiable(std::span<const Clause> hard) {
  Assignment a(max_variable(hard));
  return dpll(hard, a);
}

}  // namespace pmrf
