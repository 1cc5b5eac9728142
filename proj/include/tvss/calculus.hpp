#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tvss/graph.hpp"

namespace tvss {

/**
 * Real values on directed edge slots of a graph. Row i holds P_{i,j} for
 * j in N(i), aligned with `EmpiricalGraph::neighbors(i)`, so every
 * undirected edge carries two independent entries.
 */
class EdgeField {
 public:
  EdgeField() = default;
  explicit EdgeField(const EmpiricalGraph& g) : values_(g.slot_count(), 0.0) {}

  std::span<double> row(const EmpiricalGraph& g, std::size_t i) {
    return {values_.data() + g.row_begin(i), g.combinatorial_degree(i)};
  }
  std::span<const double> row(const EmpiricalGraph& g, std::size_t i) const {
    return {values_.data() + g.row_begin(i), g.combinatorial_degree(i)};
  }

  double& operator[](std::size_t slot) { return values_[slot]; }
  double operator[](std::size_t slot) const { return values_[slot]; }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  /// True when the field has one entry per directed slot of `g`.
  bool supported_on(const EmpiricalGraph& g) const noexcept { return values_.size() == g.slot_count(); }

 private:
  std::vector<double> values_;
};

/// (grad x)_{i,j} = sqrt(W_ij) (x_j - x_i).
EdgeField graph_gradient(const EmpiricalGraph& g, std::span<const double> x);

/// (div P)_i = sum_j sqrt(W_ij) P_ij - sqrt(W_ji) P_ji; the negative adjoint of graph_gradient.
GraphSignal divergence(const EmpiricalGraph& g, const EdgeField& p);

/// ||grad_i x||_2 for one node.
double local_variation(const EmpiricalGraph& g, std::span<const double> x, std::size_t i);

double total_variation(const EmpiricalGraph& g, std::span<const double> x);

/// Frobenius inner product of two fields on the same graph.
double frobenius_inner(const EdgeField& a, const EdgeField& b);

struct QuadraticCheck {
  double gradient_energy;  ///< ||grad x||_F^2
  double laplacian_form;   ///< x^T (D - W) x
};

/// Both sides of the gradient/Laplacian energy relation; gradient_energy
/// equals 2 * laplacian_form because every edge is counted from both ends.
QuadraticCheck laplacian_quadratic_check(const EmpiricalGraph& g, std::span<const double> x);

struct NormEstimate {
  double value{0.0};
  std::size_t iterations{0};
  bool converged{false};
};

/// Power iteration on x -> -div(grad x). Returns sqrt of the dominant
/// eigenvalue, i.e. the operator norm of the gradient. Throws GraphError
/// for a graph without edges.
NormEstimate operator_norm_estimate(const EmpiricalGraph& g, double tol, std::uint64_t seed = 1,
                                    std::size_t max_iters = 100000);

/// Debug dump: one `i<TAB>j<TAB>value` line per directed slot, 1-based.
void write_edge_field(std::ostream& out, const EmpiricalGraph& g, const EdgeField& p);

}  // namespace tvss
