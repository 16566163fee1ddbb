#pragma once

#include <vector>

#include "pmrf/model.hpp"

namespace pmrf {

/// A variable-disjoint piece of a model. `model` is renumbered to 1..k;
/// `variables[i]` is the original index of component variable i+1.
struct Component {
  std::vector<int> variables;
  PropMRF model;
};

/// Connected components of the primal graph, ordered by smallest original
/// variable. Variables that occur in no clause belong to no component.
std::vector<Component> connected_components(const PropMRF& m);

/// Adjacency sets (sorted) of the primal graph over 1..n; index 0 unused.
std::vector<std::vector<int>> primal_graph(const PropMRF& m);

struct WidthEstimate {
  int width = 0;           // induced width along `order`
  std::vector<int> order;  // elimination order over all variables 1..n
};

/// Greedy min-fill elimination order; ties go to the lower variable index.
/// Width is the largest neighbourhood of a variable at its elimination.
WidthEstimate minfill_width(const PropMRF& m);
WidthEstimate minfill_width(std::vector<std::vector<int>> adjacency);

}  // namespace pmrf
