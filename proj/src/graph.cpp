#include "pmrf/graph.hpp"

#include <algorithm>
#include <numeric>

#include "pmrf/simplify.hpp"

namespace pmrf {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller index as root so roots are the minimum of their set.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

void join_scope(DisjointSets& sets, const Clause& c) {
  for (std::size_t i = 1; i < c.size(); ++i) {
    sets.unite(static_cast<std::size_t>(c[0].var()), static_cast<std::size_t>(c[i].var()));
  }
}

}  // namespace

std::vector<Component> connected_components(const PropMRF& m) {
  auto n = static_cast<std::size_t>(m.num_vars());
  DisjointSets sets(n + 1);
  for (const Clause& c : m.hard()) join_scope(sets, c);
  for (const SoftClause& s : m.soft()) join_scope(sets, s.clause);

  // Component slot per root, in order of the root (= smallest member) index.
  std::vector<int> slot(n + 1, -1);
  std::vector<bool> occurs(n + 1, false);
  auto mark = [&](const Clause& c) {
    for (const Literal& lit : c) occurs[static_cast<std::size_t>(lit.var())] = true;
  };
  for (const Clause& c : m.hard()) mark(c);
  for (const SoftClause& s : m.soft()) mark(s.clause);
  int count = 0;
  for (std::size_t v = 1; v <= n; ++v) {
    if (occurs[v] && sets.find(v) == v) slot[v] = count++;
  }

  std::vector<std::vector<Clause>> hard(static_cast<std::size_t>(count));
  std::vector<std::vector<SoftClause>> soft(static_cast<std::size_t>(count));
  std::vector<Clause> empty_hard;
  for (const Clause& c : m.hard()) {
    if (c.empty()) {
      empty_hard.push_back(c);
      continue;
    }
    hard[static_cast<std::size_t>(slot[sets.find(static_cast<std::size_t>(c[0].var()))])].push_back(c);
  }
  for (const SoftClause& s : m.soft()) {
    if (s.clause.empty()) continue;
    soft[static_cast<std::size_t>(slot[sets.find(static_cast<std::size_t>(s.clause[0].var()))])].push_back(s);
  }

  std::vector<Component> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
    auto [model, variables] = compact(m.num_vars(), std::move(hard[k]), std::move(soft[k]));
    out.push_back({std::move(variables), std::move(model)});
  }
  // An empty hard clause makes the whole model inconsistent; keep it visible
  // as a variable-free component so products over components stay correct.
  if (!empty_hard.empty()) out.push_back({{}, PropMRF(0, std::move(empty_hard), {})});
  return out;
}

std::vector<std::vector<int>> primal_graph(const PropMRF& m) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m.num_vars()) + 1);
  auto add_scope = [&](const Clause& c) {
    for (const Literal& a : c) {
      for (const Literal& b : c) {
        if (a.var() != b.var()) adj[static_cast<std::size_t>(a.var())].push_back(b.var());
      }
    }
  };
  for (const Clause& c : m.hard()) add_scope(c);
  for (const SoftClause& s : m.soft()) add_scope(s.clause);
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

WidthEstimate minfill_width(const PropMRF& m) { return minfill_width(primal_graph(m)); }

WidthEstimate minfill_width(std::vector<std::vector<int>> adjacency) {
  const std::size_t n = adjacency.empty() ? 0 : adjacency.size() - 1;
  // Dense adjacency keeps fill counting simple at the sizes this engine
  // tabulates; the sets are rebuilt from the sorted lists.
  std::vector<std::vector<bool>> edge(n + 1, std::vector<bool>(n + 1, false));
  for (std::size_t v = 1; v <= n; ++v) {
    for (int u : adjacency[v]) edge[v][static_cast<std::size_t>(u)] = true;
  }
  std::vector<bool> gone(n + 1, false);
  WidthEstimate est;
  est.order.reserve(n);

  auto neighbours = [&](std::size_t v) {
    std::vector<std::size_t> out;
    for (std::size_t u = 1; u <= n; ++u) {
      if (!gone[u] && edge[v][u]) out.push_back(u);
    }
    return out;
  };

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = 0;
    long best_fill = -1;
    for (std::size_t v = 1; v <= n; ++v) {
      if (gone[v]) continue;
      auto nb = neighbours(v);
      long fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
          if (!edge[nb[i]][nb[j]]) ++fill;
        }
      }
      if (best_fill < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    auto nb = neighbours(best);
    est.width = std::max(est.width, static_cast<int>(nb.size()));
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        edge[nb[i]][nb[j]] = edge[nb[j]][nb[i]] = true;
      }
    }
    gone[best] = true;
    est.order.push_back(static_cast<int>(best));
  }
  return est;
}

}  // namespace pmrf
