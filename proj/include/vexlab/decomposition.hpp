#pragma once

#include <string>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/geometry.hpp"
#include "vexlab/norm.hpp"

namespace vexlab {

struct DecompositionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// phi_t on the covered cells lying entirely inside U_t.
struct PartitionOfUnity {
  std::vector<std::vector<int>> cells;    // per node
  std::vector<std::vector<double>> phi;   // per node, aligned with cells
  double max_sum_error = 0.0;             // max |sum_t phi_t - 1| over covered cells
};

// Tent weights (multilinear, 1 on Q_t, 0 on the boundary of U_t) normalized per cell.
PartitionOfUnity partition_of_unity(const TreeCovering& tree, const GridDomain& dom);

// g_t = f_t + sum_{children s} h_s - h_t with f_t = g phi_t and
// h_s = chi_{B_s} A_s / |B_s|, A_s = sum_{t >= s} int f_t.
struct Decomposition {
  std::vector<std::vector<int>> f_cells;    // per node, cells of f_t
  std::vector<std::vector<double>> f_vals;  // per node, values of f_t
  std::vector<double> f_int;                // int f_t
  std::vector<double> A;                    // sum over the subtree of int f_t
  std::vector<double> coef;                 // A_t / |B_t| (0 at the root)

  // g_t resolved into disjoint pieces.
  Pieces node_pieces(const TreeCovering& tree, int t) const;
  // Ids of the strip terms entering g_t: (+) children, (-) the node itself.
  std::vector<std::string> provenance(const TreeCovering& tree, int t) const;
};

// Rejects g with |int g| > 1e-10 ||g||_1 ("nonzero mean") and g that is
// nonzero on a cell outside the covered set.
Decomposition decompose(const CellField& g, const TreeCovering& tree, const GridDomain& dom,
                        const PartitionOfUnity& pou);

// Subtree sums of the node integrals: one bottom-up pass, and the naive double loop.
std::vector<double> accumulate_bottom_up(const TreeCovering& tree, const std::vector<double>& x);
std::vector<double> accumulate_naive(const TreeCovering& tree, const std::vector<double>& x);

struct DecompositionReport {
  double sum_residual = 0.0;       // max |sum_t g_t - g| (cell averages)
  double max_abs_g = 0.0;
  double mean_ratio = 0.0;         // max_t |int g_t| / (1e-10 ||g_t||_1 + 1e-14); ok when <= 1
  bool sum_ok = true, mean_ok = true, support_ok = true;
  double constant = 0.0;           // decomposition constant, NaN when undefined
  std::string status = "pass";     // pass | fail | undefined
  std::vector<double> node_integral, node_norm;
  std::vector<char> node_support_ok;
  std::vector<std::string> warnings;
  std::string csv() const;
};

// Checks the three decomposition properties and measures the decomposition constant
// || sum_t chi_{U_t} ||g_t||_q / ||chi_{U_t}||_q ||_q / ||g||_q.
// Refuses q_- <= 1; warns when q fails the boundary log-Hoelder check at tau.
DecompositionReport verify_decomposition(const Decomposition& dec, const CellField& g, const TreeCovering& tree,
                                         const GridDomain& dom, const ExponentField& q, double tau = 1.0);

// Seeded smooth mean-zero fields supported on the covered cells.
std::vector<CellField> mean_zero_fields(const TreeCovering& tree, const GridDomain& dom, int count, uint64_t seed);

}  // namespace vexlab
