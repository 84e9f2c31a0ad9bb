#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/geometry.hpp"
#include "vexlab/norm.hpp"

namespace vexlab {

struct OperatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A_B f = chi_B (mean of f over B).
Pieces averaging(const CellField& f, const Region& B);

// A_Gamma f = sum_t chi_{B_t} |W_t|^{-1} int_{W_t} |f|.
Pieces hardy_shadow(const CellField& f, const TreeCovering& tree);

// sum_t chi_{U_t} |U_t|^{alpha/n} ||f chi_{U_t}||_p / ||chi_{U_t}||_p (alpha = 0: T_p).
Pieces tree_average_Tp(const CellField& f, const TreeCovering& tree, const GridDomain& dom, const ExponentField& p);
// Rejects cells where 1/p - 1/q > alpha/n or 1/p < 1/q.
Pieces tree_average_Talpha(const CellField& f, const TreeCovering& tree, const GridDomain& dom,
                           const ExponentField& p, const ExponentField& q, double alpha);

struct HolderSumReport {
  double diagonal = 0.0;      // sum_t ||chi f||_p ||chi g||_p' / (||f||_p ||g||_p')
  double off_diagonal = 0.0;  // same with q' in place of p'
};

HolderSumReport holder_sum_check(const CellField& f, const CellField& g, const TreeCovering& tree,
                                 const GridDomain& dom, const ExponentField& p, const ExponentField& q);

// Expand pieces into a per-cell field when every piece covers its whole cell.
CellField pieces_to_field(const Pieces& pc, int ncells);
Pieces field_to_pieces(const CellField& f);

struct TestFunction {
  std::string id;
  CellField f;
};

// Seeded corpus: constant, tents, box indicators, near-boundary bumps and
// random fields; `extra` members (for instance counterexample bumps) are appended.
std::vector<TestFunction> operator_corpus(const GridDomain& dom, int trials, uint64_t seed,
                                          const std::vector<TestFunction>& extra = {});

struct OperatorNormEstimate {
  std::string op;
  std::string source, target;
  uint64_t seed = 0;
  int trials = 0;
  double estimate = 0.0;
  std::string argmax;
  int argmax_index = -1;
  std::vector<std::pair<std::string, double>> rows;  // (trial id, ratio)
  std::string csv() const;
};

using Operator = std::function<Pieces(const CellField&)>;

OperatorNormEstimate estimate_operator_norm(const std::string& name, const Operator& op,
                                            const std::vector<TestFunction>& corpus, const ExponentField& p_src,
                                            const ExponentField& q_dst, double h, uint64_t seed = 0);

}  // namespace vexlab
