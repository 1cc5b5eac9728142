#pragma once

#include <span>

#include "tvss/graph.hpp"
#include "tvss/solver.hpp"

namespace tvss {

struct PropagationResult {
  GraphSignal x;
  /// Same schema as the solver trace: mu and lambda_eps are 0, f_mu holds the
  /// total variation of the iterate.
  SolverTrace trace;
};

/**
 * Clamped harmonic iteration: every unlabeled node takes the weighted
 * average of its neighbors' previous values, labeled nodes are reset to y.
 * Throws GraphError naming the first isolated unlabeled node.
 */
PropagationResult label_propagation(const EmpiricalGraph& g, const LabelSet& labels, std::size_t iters,
                                    std::span<const double> x0, const GraphSignal* truth = nullptr);

}  // namespace tvss
