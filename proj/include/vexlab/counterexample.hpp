#pragma once

#include <string>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/geometry.hpp"
#include "vexlab/operators.hpp"

namespace vexlab {

struct CounterexampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ball family B(c_k, 7 r_k) with inner discs around a_k and b_k:
// A^1 = B(a, r), A^2 = B(a, 2r) \ A^1, A^3 = B(a, 3r) \ B(a, 2r), same around b.
struct CounterexampleConfig {
  std::string mode = "boundary";  // boundary | interior | korn
  double p0 = 2.0;
  int kmin = 2, kmax = 5;
  std::vector<double> radii;      // optional override, radii[k - kmin]; default 4^-k
  double mu = 0.25;               // interior clearance
  bool constant = false;          // force p_k = p0 (contrast runs)
  DomainSpec domain;              // default: rectangle 2x1 (boundary) or 2x2 (interior, korn)

  double radius(int k) const;
  double p_k(int k) const;
  static CounterexampleConfig defaults(const std::string& mode, int L);
};

struct BallPlacement {
  int k = 0;
  double r = 0.0, p = 0.0;
  double cx = 0.0, cy = 0.0;
  double ax = 0.0, ay = 0.0, bx = 0.0, by = 0.0;
};

struct CounterexampleGeometry {
  CounterexampleConfig cfg;
  GridDomain dom;
  std::vector<BallPlacement> balls;
  std::vector<std::string> warnings;  // truncations
  ExponentField p;
};

// Places the balls (greedy left-to-right scan at step h), truncates k_max where
// r_k < 2h or no room remains, asserts disjointness and containment on the cells,
// and builds the exponent.
CounterexampleGeometry build_counterexample(const CounterexampleConfig& cfg);
ExponentField build_counterexample_exponent(const CounterexampleGeometry& g);

// f_k: r on A^1 u A^2, 3r - |x - a| on A^3, mirrored negative around b, 0 elsewhere.
std::vector<TestFunction> build_test_functions(const CounterexampleGeometry& g);
// Indicator of the p0 zone of each ball: B(c, 7r) minus the discs of radius 2r around a and b.
std::vector<TestFunction> build_shell_functions(const CounterexampleGeometry& g);

struct BlowupRow {
  int k = 0;
  double r = 0.0, p = 0.0, lhs = 0.0, rhs = 0.0, ratio = 0.0, predicted = 0.0, quotient = 0.0;
};

struct BlowupReport {
  std::string mode;
  double alpha = 0.0;
  std::vector<BlowupRow> rows;
  bool monotone = true;          // ratio strictly increasing in k
  bool band_ok = true;           // every quotient in [1/4, 4]
  double flatness = 1.0;         // max ratio / min ratio
  std::vector<std::string> notes;
  std::string csv() const;
  std::string svg() const;
};

inline constexpr double kBandLo = 0.25, kBandHi = 4.0;

// boundary mode: ||f_k||_q / ||d^{1-alpha} grad f_k||_p with q = sobolev_target(p, alpha);
// interior mode: ||f_k||_{p*} / ||grad f_k||_p. predicted = r_k^{n/p_k - n/p0}.
BlowupReport blowup_sp(const CounterexampleGeometry& g, double alpha);

struct KornValue {
  double grad_norm = 0.0, sym_norm = 0.0, ratio = 0.0;
  bool unbounded = false;  // symmetric part vanishes while the gradient does not
};

// ||grad u||_p / ||eps(u)||_p with Frobenius magnitudes.
KornValue korn_ratio(const GridDomain& dom, const CellField& ux, const CellField& uy, const ExponentField& p);

// u = S (x - a_k) on A^1 u A^2, phi S (x - a_k) on A^3 with phi = 3 - |x - a_k| / r_k,
// mirrored with a minus sign around b_k. S = [[0, -1], [1, 0]].
void korn_field(const CounterexampleGeometry& g, int ball, CellField& ux, CellField& uy);

// Also records the largest |eps(u)| and |grad u - S| over the A^1 cells.
BlowupReport korn_blowup(const CounterexampleGeometry& g);

}  // namespace vexlab
