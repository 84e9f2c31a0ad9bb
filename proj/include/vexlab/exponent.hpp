#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vexlab/geometry.hpp"
#include "vexlab/norm.hpp"

namespace vexlab {

// Exponent fields are cellwise constant: one value per domain cell.
using ExponentField = CellField;

struct ExponentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ConditionReport {
  std::string name;
  std::string status = "pass";  // pass | fail | vacuous | undefined
  bool pass = true;
  double constant = 0.0;
  double threshold = kInfinity;
  int witness = -1;   // cell (or node for tree forms)
  int witness2 = -1;  // second cell of a witness pair
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> warnings;

  double value(const std::string& key) const;
  void set(const std::string& key, double v);
};

// min / max / count of a cell field over discs of cell centres.
class CellQuadtree {
 public:
  CellQuadtree(const GridDomain& dom, const CellField& v);
  // Centres at squared distance < r2 (cell units) from the centre of cell (ci, cj).
  void disc_minmax(int ci, int cj, double r2, double& mn, double& mx) const;
  int64_t disc_count(int ci, int cj, double r2) const;
  // Squared distance (cell units) to the nearest cell y with |v(y) - v0| >= eps,
  // searched below limit2; returns limit2 when there is none. y is set to the witness.
  int64_t nearest_violation(int ci, int cj, double v0, double eps, int64_t limit2, int& y) const;

 private:
  struct Level {
    int n = 0;
    std::vector<double> mn, mx;
    std::vector<int64_t> cnt;
  };
  const GridDomain& dom_;
  std::vector<Level> lv_;  // lv_[0] = cells
  const CellField& v_;
};

// p_-(E) and p_+(E) over the cells of a region, and the harmonic mean
// 1/p_E = |E|^{-1} int_E 1/p.
double p_minus(const ExponentField& p, const Region& r);
double p_plus(const ExponentField& p, const Region& r);
double harmonic_mean(const ExponentField& p, const Region& r);

// Radius of B_{x,tau} in cell units squared: (tau d(x) / h)^2.
double ball_radius2(const GridDomain& dom, int cell, double tau);

ConditionReport check_boundary_LH(const ExponentField& p, const GridDomain& dom, double tau,
                                  double threshold = kInfinity);
// Oscillation term of the boundary condition at one cell (0 when tau d(x) > 1/2).
double boundary_LH_term(const ExponentField& p, const GridDomain& dom, double tau, int cell);

ConditionReport check_LH_equiv(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree, double tau);
ConditionReport check_eps_continuity(const ExponentField& p, const GridDomain& dom, double eps);

ExponentField dual_exponent(const ExponentField& p);
// 1/q = 1/p - alpha/n, with alpha in [0,1) when p_+ < n and in [0, n/p_+) otherwise.
ExponentField sobolev_target(const ExponentField& p, double alpha, int n = 2);
// p* = n p / (n - p); requires p_+ < n.
ExponentField sobolev_conjugate(const ExponentField& p, int n = 2);

// Ball and tree forms, plus the two off-diagonal tree forms with q = sobolev_target(p, alpha)
// and beta = alpha. The ball form runs over every cell; keep L moderate.
ConditionReport check_K0(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree, double tau,
                         double alpha = 0.0, bool ball_form = true);

ConditionReport harmonic_mean_norm_check(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree);

// Full-domain log-Hoelder constant: sup over cell pairs with |x - y| < 1/2 of
// |p(x) - p(y)| (-log |x - y|). All pairs; O(N^2).
ConditionReport check_LH0(const ExponentField& p, const GridDomain& dom);

struct ExtendedExponent {
  GridDomain dom;            // cells of the closed ball 3B on the same lattice, plus all cells of Omega
  ExponentField p;
  std::vector<int> omega_map;  // Omega cell -> cell of dom
  double cx = 0.0, cy = 0.0, R = 0.0;
  int exterior_cubes = 0;    // Whitney cubes of the complement used in the partition of unity
  int closure_cells = 0;     // exterior cells next to Omega valued by the closure extension
};

// Enclosing ball: centre of the bounding box, radius = half its diagonal.
void enclosing_ball(const GridDomain& dom, double& cx, double& cy, double& R);
ExtendedExponent extend_exponent(const ExponentField& p, const GridDomain& dom, double cx, double cy, double R);
ExtendedExponent extend_exponent(const ExponentField& p, const GridDomain& dom);

struct TraceResult {
  std::vector<int> cells;        // boundary cells
  std::vector<double> value;     // traced boundary value per cell
  std::vector<int> untraced;     // boundary cells without a chain reaching within 2 cells
  double lambda = 0.0;           // measured max |x_k - x| / d(x_k) along the chains
  ConditionReport report;        // best constant of the boundary log-Hoelder bound
};

TraceResult boundary_trace(const ExponentField& p, const GridDomain& dom, double tau);

// Generators.
ExponentField constant_exponent(const GridDomain& dom, double value);
// value on the left half of the bounding box, value + jump on the right half
ExponentField step_exponent(const GridDomain& dom, double value, double jump);
// p_lo on the right half; p_lo + (p_hi - p_lo) log 2 / (-log(d/2)) on the left half
ExponentField radial_lh_exponent(const GridDomain& dom, double p_lo, double p_hi);

}  // namespace vexlab
