#include "tvss/label_propagation.hpp"

#include <string>

#include "tvss/calculus.hpp"

namespace tvss {

PropagationResult label_propagation(const EmpiricalGraph& g, const LabelSet& labels, std::size_t iters,
                                    std::span<const double> x0, const GraphSignal* truth) {
  if (iters == 0) throw GraphError("label propagation needs at least one iteration");
  check_signal(g, x0, "initial guess");
  if (labels.node_count() != g.node_count()) throw GraphError("label set does not match the graph");
  if (truth) check_signal(g, *truth, "ground truth");
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (!labels.contains(i) && g.combinatorial_degree(i) == 0) {
      throw GraphError("unlabeled node " + std::to_string(i + 1) + " is isolated");
    }
  }

  std::vector<double> degree(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) degree[i] = weighted_degree(g, i);

  PropagationResult out;
  out.x.assign(x0.begin(), x0.end());
  GraphSignal next(g.node_count());
  out.trace.reserve(iters);
  for (std::size_t t = 0; t < iters; ++t) {
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (labels.contains(i)) {
        next[i] = labels.values()[labels.position(i)];
        continue;
      }
      double acc = 0.0;
      for (std::size_t s = g.row_begin(i); s < g.row_end(i); ++s) {
        acc += g.slot_weight(s) * out.x[g.slot_target(s)];
      }
      next[i] = acc / degree[i];
    }
    out.x.swap(next);

    TraceRecord rec;
    rec.k = t;
    rec.tv = total_variation(g, out.x);
    rec.f_mu = rec.tv;
    rec.emp_err = empirical_error(out.x, labels);
    if (truth) rec.nmse = nmse(out.x, *truth);
    out.trace.push_back(rec);
  }
  return out;
}

}  // namespace tvss
