#pragma once

#include <string>
#include <vector>

#include "vexlab/exponent.hpp"
#include "vexlab/geometry.hpp"
#include "vexlab/norm.hpp"
#include "vexlab/operators.hpp"

namespace vexlab {

struct InequalityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Norm tolerance used by every inequality check.
inline constexpr double kLabTol = 1e-12;

struct RatioRow {
  std::string id;
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;  // ratio = 0 when lhs = 0
};

struct VerificationReport {
  std::string inequality;
  std::string family;
  std::vector<RatioRow> rows;
  double max_ratio = 0.0;
  std::string argmax;
  std::string status = "pass";  // pass | hypotheses unmet
  std::vector<std::pair<std::string, std::string>> certificate;
  std::vector<std::pair<int, double>> refinement;  // (L, max ratio)

  void add(const std::string& id, double lhs, double rhs);
  void certify(const std::string& key, const std::string& value) { certificate.emplace_back(key, value); }
  std::string certificate_value(const std::string& key) const;
  std::string csv() const;
};

// Cube-level check on a region Q (cells with weights) of measure |Q|:
// ||f - f_Q||_q <= C q |Q|^{1/n + 1/q - 1/p} ||grad f||_p, constant p and q.
// The measured ratio is the C factor. Branches: 1 <= p < n with p <= q <= p*,
// or p >= n with q finite.
VerificationReport classical_sp_verify(const GridDomain& dom, const Region& Q, double cube_measure, double p,
                                       double q, const TestFunction& f);

// Same on U_t with variable exponents; Q_t supplies |Q|. The right-hand side is
// (1 + |Q|)^2 |Q|^{1/n + 1/q_+(U) - 1/p_-(U)} ||grad f||_{p(.)}, times q_+(U) in the p_- < n branch.
VerificationReport local_sp_verify(const GridDomain& dom, const TreeCovering& tree, int node, const ExponentField& p,
                                   const ExponentField& q, const TestFunction& f);

struct OscillationPartition {
  std::vector<Region> cubes;
  std::vector<double> q_plus, p_minus;
  int M = 1;                 // subcubes (per axis squared)
  double delta = 0.0;        // continuity radius (domain units)
  double M_bound = 0.0;      // max(1, 8 |U| / delta^n)
  double q_bound = kInfinity;  // n / (1 - sigma - alpha)
  bool certified = true;
};

// Splits node t's U_t into subcubes of diameter in (delta/2, delta] where delta is
// the continuity radius of 1/p at level sigma/n, and certifies each subcube.
OscillationPartition partition_for_oscillation(const GridDomain& dom, const TreeCovering& tree, int node,
                                               const ExponentField& p, double sigma, double alpha);

// Global inequality variants (all report ||f - f_Omega||_q against ||d^{1-alpha} grad f||_p):
//   weighted           p_- > 1, 1/p uniformly sigma/n-continuous with sigma < 1 - alpha
//   small-exponent     p_+ < n, 1/p (1 - alpha)/n-continuous
//   large-exponent     p_- >= n, no continuity requirement
//   improved-poincare  alpha = 0, q = p, weight d
// Every variant also records the boundary log-Hoelder constant at the measured tau_K.
struct GlobalSpOptions {
  std::string variant = "weighted";
  double alpha = 0.0;
  double sigma = -1.0;  // default 0.5 (1 - alpha)
  double tau = -1.0;    // default: measured tau_K
};

VerificationReport global_sp_verify(const GridDomain& dom, const TreeCovering& tree, const ExponentField& p,
                                    const GlobalSpOptions& opt, const std::vector<TestFunction>& family);

// ||f||_q <= C ||grad f||_p for f vanishing near the boundary, computed on the
// ball 3B after extending p. The extension is certified (p_-, p_+ preserved and
// boundary log-Hoelder on 3B for tau in {1, 2}).
VerificationReport sobolev_verify(const GridDomain& dom, const ExponentField& p, double alpha,
                                  const std::vector<TestFunction>& family, double sigma = -1.0);

// Corpora. standard: constant, polynomials to degree 2, three tents and 10
// seeded random smooth fields (20 members). compact: smooth bumps vanishing on
// the cells next to the boundary.
std::vector<TestFunction> standard_corpus(const GridDomain& dom, uint64_t seed);
std::vector<TestFunction> compact_corpus(const GridDomain& dom, uint64_t seed);

std::string refinement_svg(const std::string& title, const std::vector<std::pair<int, double>>& rows);

}  // namespace vexlab
