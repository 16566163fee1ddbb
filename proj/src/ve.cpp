#include "pmrf/ve.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "pmrf/errors.hpp"
#include "pmrf/graph.hpp"
#include "pmrf/logmath.hpp"

namespace pmrf {

namespace {

Factor clause_factor(const Clause& c, double sat, double unsat, int max_width) {
  if (static_cast<int>(c.size()) > max_width) {
    throw FactorTooLarge("clause too wide to tabulate", static_cast<int>(c.size()));
  }
  Factor f;
  std::size_t falsifying = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    f.scope.push_back(c[j].var());
    if (!c[j].positive()) falsifying |= std::size_t{1} << j;
  }
  f.log_values.assign(std::size_t{1} << c.size(), sat);
  f.log_values[falsifying] = unsat;
  return f;
}

// Product of `members` (log-add), then sum out `var` if it is in the scope.
Factor combine_and_eliminate(std::span<const Factor* const> members, int var, int max_width) {
  std::vector<int> scope;
  for (const Factor* f : members) scope.insert(scope.end(), f->scope.begin(), f->scope.end());
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
  if (static_cast<int>(scope.size()) > max_width + 1) {
    throw FactorTooLarge("intermediate factor exceeds the width bound", static_cast<int>(scope.size()) - 1);
  }

  // Bit masks mapping a joint index onto each member's table.
  std::vector<std::vector<std::size_t>> maps;
  for (const Factor* f : members) {
    std::vector<std::size_t> bits;
    for (int v : f->scope) {
      bits.push_back(static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), v) - scope.begin()));
    }
    maps.push_back(std::move(bits));
  }
  const std::size_t size = std::size_t{1} << scope.size();
  std::vector<double> joint(size, 0.0);
  for (std::size_t idx = 0; idx < size; ++idx) {
    double total = 0.0;
    for (std::size_t k = 0; k < members.size() && total != kNegInf; ++k) {
      std::size_t sub = 0;
      for (std::size_t j = 0; j < maps[k].size(); ++j) sub |= ((idx >> maps[k][j]) & 1U) << j;
      total += members[k]->log_values[sub];
    }
    joint[idx] = total;
  }

  auto pos = std::lower_bound(scope.begin(), scope.end(), var);
  if (pos == scope.end() || *pos != var) return {std::move(scope), std::move(joint)};

  const auto bit = static_cast<std::size_t>(pos - scope.begin());
  Factor out;
  out.scope = scope;
  out.scope.erase(out.scope.begin() + static_cast<std::ptrdiff_t>(bit));
  out.log_values.resize(size / 2);
  const std::size_t low_mask = (std::size_t{1} << bit) - 1;
  for (std::size_t r = 0; r < size / 2; ++r) {
    std::size_t base = (r & low_mask) | ((r & ~low_mask) << 1);
    out.log_values[r] = log_add(joint[base], joint[base | (std::size_t{1} << bit)]);
  }
  return out;
}

}  // namespace

std::vector<Factor> clauses_to_factors(const PropMRF& m, int max_width) {
  std::vector<Factor> out;
  out.reserve(m.num_clauses());
  for (const Clause& c : m.hard()) out.push_back(clause_factor(c, 0.0, kNegInf, max_width));
  for (const SoftClause& s : m.soft()) out.push_back(clause_factor(s.clause, s.weight, 0.0, max_width));
  return out;
}

double bucket_elimination(std::span<const Factor> factors, std::span<const int> order, int max_width) {
  int max_var = 0;
  for (int v : order) max_var = std::max(max_var, v);
  for (const Factor& f : factors) {
    for (int v : f.scope) max_var = std::max(max_var, v);
  }
  std::vector<int> position(static_cast<std::size_t>(max_var) + 1, -1);
  for (std::size_t i = 0; i < order.size(); ++i) position[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

  // Owned intermediate factors live in `pool`; buckets hold pointers into
  // either the input or the pool. std::vector<Factor> growth would invalidate
  // pointers, so the pool is reserved up front (one new factor per bucket).
  std::vector<Factor> pool;
  pool.reserve(order.size());
  std::vector<std::vector<const Factor*>> buckets(order.size());
  double constant = 0.0;

  auto place = [&](const Factor* f) {
    if (f->scope.empty()) {
      constant += f->log_values[0];
      return;
    }
    int first = -1;
    for (int v : f->scope) {
      int p = position[static_cast<std::size_t>(v)];
      if (p < 0) throw std::invalid_argument("elimination order misses variable " + std::to_string(v));
      if (first < 0 || p < first) first = p;
    }
    buckets[static_cast<std::size_t>(first)].push_back(f);
  };
  for (const Factor& f : factors) place(&f);

  for (std::size_t i = 0; i < order.size(); ++i) {
    if (buckets[i].empty()) {
      constant += kLn2;
      continue;
    }
    pool.push_back(combine_and_eliminate(buckets[i], order[i], max_width));
    place(&pool.back());
    if (constant == kNegInf) return kNegInf;
  }
  return constant;
}

double ve_log_z(const PropMRF& m, int max_width) {
  std::vector<Factor> factors = clauses_to_factors(m, max_width);
  WidthEstimate est = minfill_width(m);
  return bucket_elimination(factors, est.order, max_width);
}

}  // namespace pmrf
