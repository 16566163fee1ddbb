#include "pmrf/fdc.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "pmrf/errors.hpp"
#include "pmrf/graph.hpp"
#include "pmrf/logmath.hpp"
#include "pmrf/simplify.hpp"
#include "pmrf/ve.hpp"

namespace pmrf {

std::pair<PropMRF, PropMRF> condition_on_clause(const PropMRF& m, const Clause& r) {
  if (r.max_var() > m.num_vars()) {
    throw std::out_of_range("conditioning clause mentions variable " + std::to_string(r.max_var()));
  }
  std::vector<Clause> with_r = m.hard();
  with_r.push_back(r);
  std::vector<Clause> with_not_r = m.hard();
  for (const Literal& lit : r) with_not_r.push_back(Clause(std::vector<Literal>{lit.negated()}));
  return {PropMRF(m.num_vars(), std::move(with_r), m.soft()),
          PropMRF(m.num_vars(), std::move(with_not_r), m.soft())};
}

namespace {

std::vector<const Clause*> all_clauses(const PropMRF& m) {
  std::vector<const Clause*> out;
  out.reserve(m.num_clauses());
  for (const Clause& c : m.hard()) out.push_back(&c);
  for (const SoftClause& s : m.soft()) out.push_back(&s.clause);
  return out;
}

Clause intersect(const Clause& a, const Clause& b) {
  std::vector<Literal> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return Clause(std::move(common));
}

bool lexicographically_less(const Clause& a, const Clause& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// (occurrences, size) descending, then smallest literal sequence.
bool better_candidate(const BranchCandidate& a, const BranchCandidate& b) {
  if (a.occurrence_count != b.occurrence_count) return a.occurrence_count > b.occurrence_count;
  if (a.clause.size() != b.clause.size()) return a.clause.size() > b.clause.size();
  return lexicographically_less(a.clause, b.clause);
}

BranchCandidate most_frequent_literal(const std::vector<const Clause*>& clauses) {
  std::map<Literal, int> freq;
  for (const Clause* c : clauses) {
    for (const Literal& lit : *c) ++freq[lit];
  }
  BranchCandidate best;
  for (const auto& [lit, count] : freq) {
    if (count > best.occurrence_count) best = {Clause(std::vector<Literal>{lit}), count};
  }
  return best;
}

BranchCandidate most_frequent_variable(const PropMRF& m, const std::vector<const Clause*>& clauses) {
  std::vector<int> freq(static_cast<std::size_t>(m.num_vars()) + 1, 0);
  for (const Clause* c : clauses) {
    for (const Literal& lit : *c) ++freq[static_cast<std::size_t>(lit.var())];
  }
  int best = 0;
  for (int v = 1; v <= m.num_vars(); ++v) {
    if (freq[static_cast<std::size_t>(v)] > freq[static_cast<std::size_t>(best)]) best = v;
  }
  return {Clause(std::vector<Literal>{Literal(best, true)}), freq[static_cast<std::size_t>(best)]};
}

}  // namespace

BranchCandidate choose_branch_clause(const PropMRF& m, BranchMode mode) {
  std::vector<const Clause*> clauses = all_clauses(m);
  bool any_literal = std::any_of(clauses.begin(), clauses.end(), [](const Clause* c) { return !c->empty(); });
  if (!any_literal) throw std::invalid_argument("no open clause to branch on");
  if (mode == BranchMode::Variable) return most_frequent_variable(m, clauses);

  std::set<Clause> seen;
  BranchCandidate best;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    for (std::size_t j = i + 1; j < clauses.size(); ++j) {
      Clause common = intersect(*clauses[i], *clauses[j]);
      if (common.empty() || !seen.insert(common).second) continue;
      int count = 0;
      for (const Clause* c : clauses) count += common.subset_of(*c) ? 1 : 0;
      BranchCandidate cand{std::move(common), count};
      if (best.occurrence_count == 0 || better_candidate(cand, best)) best = std::move(cand);
    }
  }
  if (best.occurrence_count == 0) return most_frequent_literal(clauses);
  return best;
}

// ---------------------------------------------------------------------------
// Canonical component keys

namespace {

void append_int(std::string& out, std::int32_t v) {
  char buf[sizeof v];
  std::memcpy(buf, &v, sizeof v);
  out.append(buf, sizeof v);
}

}  // namespace

std::string canonical_key(const PropMRF& m) {
  std::vector<int> rename(static_cast<std::size_t>(m.num_vars()) + 1, 0);
  int next = 0;
  auto visit = [&](const Clause& c) {
    for (const Literal& lit : c) {
      int& slot = rename[static_cast<std::size_t>(lit.var())];
      if (slot == 0) slot = ++next;
    }
  };
  for (const Clause& c : m.hard()) visit(c);
  for (const SoftClause& s : m.soft()) visit(s.clause);

  auto relabel = [&](const Clause& c) {
    std::vector<Literal> lits;
    lits.reserve(c.size());
    for (const Literal& lit : c) lits.emplace_back(rename[static_cast<std::size_t>(lit.var())], lit.positive());
    return Clause(std::move(lits));
  };
  std::vector<Clause> hard;
  hard.reserve(m.hard().size());
  for (const Clause& c : m.hard()) hard.push_back(relabel(c));
  std::sort(hard.begin(), hard.end());
  std::vector<std::pair<Clause, double>> soft;
  soft.reserve(m.soft().size());
  for (const SoftClause& s : m.soft()) soft.emplace_back(relabel(s.clause), s.weight);
  std::sort(soft.begin(), soft.end());

  std::string key;
  append_int(key, next);
  append_int(key, static_cast<std::int32_t>(hard.size()));
  for (const Clause& c : hard) {
    append_int(key, static_cast<std::int32_t>(c.size()));
    for (const Literal& lit : c) append_int(key, lit.to_int());
  }
  append_int(key, static_cast<std::int32_t>(soft.size()));
  for (const auto& [c, w] : soft) {
    auto bits = std::bit_cast<std::uint64_t>(w);
    append_int(key, static_cast<std::int32_t>(bits & 0xffffffffU));
    append_int(key, static_cast<std::int32_t>(bits >> 32));
    append_int(key, static_cast<std::int32_t>(c.size()));
    for (const Literal& lit : c) append_int(key, lit.to_int());
  }
  return key;
}

// ---------------------------------------------------------------------------
// Counting

namespace {

// Z of a component made of exactly one clause over all k of its variables.
double single_clause_log_z(const PropMRF& c) {
  if (!c.hard().empty()) return log_two_pow_minus_one(static_cast<int>(c.hard().front().size()));
  const SoftClause& s = c.soft().front();
  return log_add(s.weight + log_two_pow_minus_one(static_cast<int>(s.clause.size())), 0.0);
}

class Counter {
 public:
  explicit Counter(const FdcOptions& options) : options_(options) {}

  double solve(const PropMRF& m) {
    SimplifyOutcome out = simplify(m);
    switch (out.status) {
      case SimplifyStatus::Zero: ++stats_.leaves; return kNegInf;
      case SimplifyStatus::Scalar: ++stats_.leaves; return out.log_weight;
      case SimplifyStatus::Open: break;
    }
    double total = out.log_weight;
    for (const Component& comp : connected_components(out.model)) {
      total += solve_component(comp.model);
      if (total == kNegInf) break;
    }
    return total;
  }

  const SearchStats& stats() const { return stats_; }

 private:
  double solve_component(const PropMRF& c) {
    std::string key;
    if (options_.cache) {
      key = canonical_key(c);
      if (auto it = cache_.find(key); it != cache_.end()) {
        ++stats_.cache_hits;
        return it->second;
      }
    }
    double value;
    if (c.num_clauses() == 1) {
      ++stats_.leaves;
      value = single_clause_log_z(c);
    } else if (options_.ve_width_threshold > 0 && minfill_width(c).width < options_.ve_width_threshold) {
      ++stats_.leaves;
      value = ve_log_z(c);
    } else {
      ++stats_.nodes;
      BranchCandidate r = choose_branch_clause(c, options_.mode);
      auto [with_r, with_not_r] = condition_on_clause(c, r.clause);
      value = log_add(solve(with_r), solve(with_not_r));
    }
    if (options_.cache) {
      cache_.emplace(std::move(key), value);
      stats_.cache_entries = cache_.size();
    }
    return value;
  }

  FdcOptions options_;
  SearchStats stats_;
  std::unordered_map<std::string, double> cache_;
};

}  // namespace

ExactResult fdc_count(const PropMRF& m, const FdcOptions& options) {
  Counter counter(options);
  double log_z = counter.solve(m);
  return {log_z, counter.stats()};
}

double log_model_count(int num_vars, std::span<const Clause> clauses, const FdcOptions& options) {
  PropMRF m(num_vars, std::vector<Clause>(clauses.begin(), clauses.end()), {});
  return fdc_count(m, options).log_z;
}

std::vector<double> exact_marginals(const PropMRF& m, const FdcOptions& options) {
  double log_z = fdc_count(m, options).log_z;
  if (log_z == kNegInf) throw std::domain_error("marginals undefined: the hard clauses are inconsistent");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.num_vars()));
  for (int v = 1; v <= m.num_vars(); ++v) {
    Clause unit(std::vector<Literal>{Literal(v, true)});
    double log_zv = fdc_count(conjoin_query(m, std::span<const Clause>(&unit, 1)), options).log_z;
    out.push_back(std::clamp(std::exp(log_zv - log_z), 0.0, 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive smallest search space

namespace {

bool lex_less(const SearchStats& a, const SearchStats& b) {
  if (a.leaves != b.leaves) return a.leaves < b.leaves;
  return a.nodes < b.nodes;
}

class MinimalSearch {
 public:
  explicit MinimalSearch(BranchMode mode) : mode_(mode) {}

  SearchStats solve(const PropMRF& m) {
    SimplifyOutcome out = simplify(m);
    SearchStats total;
    if (out.status != SimplifyStatus::Open) {
      total.leaves = 1;
      return total;
    }
    for (const Component& comp : connected_components(out.model)) total += solve_component(comp.model);
    return total;
  }

 private:
  SearchStats solve_component(const PropMRF& c) {
    std::string key = canonical_key(c);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    SearchStats best;
    if (c.num_clauses() == 1) {
      best.leaves = 1;
    } else {
      bool have = false;
      for (const Clause& r : candidates(c)) {
        auto [with_r, with_not_r] = condition_on_clause(c, r);
        SearchStats s = solve(with_r);
        s += solve(with_not_r);
        s.nodes += 1;
        if (!have || lex_less(s, best)) {
          best = s;
          have = true;
        }
      }
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

  // Sub-clauses of current clauses, excluding a hard clause itself (whose true
  // branch would reproduce the same model).
  std::vector<Clause> candidates(const PropMRF& c) const {
    std::set<Clause> out;
    if (mode_ == BranchMode::Variable) {
      for (int v = 1; v <= c.num_vars(); ++v) out.insert(Clause(std::vector<Literal>{Literal(v, true)}));
      return {out.begin(), out.end()};
    }
    auto add_subsets = [&](const Clause& cl) {
      const std::size_t k = cl.size();
      for (std::uint32_t mask = 1; mask < (1U << k); ++mask) {
        std::vector<Literal> lits;
        for (std::size_t j = 0; j < k; ++j) {
          if ((mask >> j) & 1U) lits.push_back(cl[j]);
        }
        out.insert(Clause(std::move(lits)));
      }
    };
    for (const Clause& h : c.hard()) add_subsets(h);
    for (const SoftClause& s : c.soft()) add_subsets(s.clause);
    for (const Clause& h : c.hard()) out.erase(h);
    return {out.begin(), out.end()};
  }

  BranchMode mode_;
  std::unordered_map<std::string, SearchStats> memo_;
};

}  // namespace

SearchStats minimal_search_space(const PropMRF& m, BranchMode mode) {
  if (m.num_vars() > 12 || m.num_clauses() > 8) {
    throw InstanceTooLarge("exhaustive search space enumeration is limited to 12 variables and 8 clauses");
  }
  auto too_wide = [](const Clause& c) { return c.size() > 10; };
  if (std::any_of(m.hard().begin(), m.hard().end(), too_wide) ||
      std::any_of(m.soft().begin(), m.soft().end(), [&](const SoftClause& s) { return too_wide(s.clause); })) {
    throw InstanceTooLarge("exhaustive search space enumeration is limited to clauses of 10 literals");
  }
  return MinimalSearch(mode).solve(m);
}

}  // namespace pmrf
