#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vexlab/geometry.hpp"

namespace vexlab {

struct NormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTol = 1e-10;

// Neumaier compensated sum.
struct KahanSum {
  double sum = 0.0, comp = 0.0;
  void add(double x);
  double value() const { return sum + comp; }
};

// Platform-independent uniform draw in [0, 1).
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

// Terms of a modular: rho(f / lambda) = sum_k m_k (a_k / lambda)^{p_k}, a_k > 0.
struct ModularTerms {
  std::vector<double> a, p, m;
  void add(double value, double exponent, double measure);
  std::size_t size() const { return a.size(); }
  double rho(double lambda) const;
  double p_min() const;
  double p_max() const;
};

ModularTerms terms_full(const CellField& f, const CellField& p, double h);
ModularTerms terms_region(const CellField& f, const CellField& p, const Region& r, double h);
ModularTerms terms_pieces(const Pieces& f, const CellField& p, double h);
// Terms of the indicator of a region, merged over equal exponents.
ModularTerms terms_indicator(const Region& r, const CellField& p, double h);

struct NormValue {
  double value = 0.0;
  double tol = 0.0;        // relative tolerance achieved on lambda
  int iterations = 0;
  double modular_at = 0.0;  // rho(f / value), 0 when f = 0
};

NormValue luxemburg(const ModularTerms& t, double tol = kDefaultTol);

double modular(const CellField& f, const CellField& p, const Region& region, double h);
double modular(const CellField& f, const CellField& p, double h);
NormValue luxemburg_norm(const CellField& f, const CellField& p, const Region& region, double h,
                         double tol = kDefaultTol);
NormValue luxemburg_norm(const CellField& f, const CellField& p, double h, double tol = kDefaultTol);
NormValue luxemburg_norm(const Pieces& f, const CellField& p, double h, double tol = kDefaultTol);
double indicator_norm(const Region& r, const CellField& p, double h, double tol = kDefaultTol);

struct HolderReport {
  double integral = 0.0;  // int |f g|
  double norm_f = 0.0;    // ||f||_p
  double norm_g = 0.0;    // ||g||_p'
  double constant = 0.0;  // integral / (norm_f norm_g), 0 when a norm vanishes
  bool pass = true;       // constant <= budget
};

inline constexpr double kHolderBudget = 4.0;

HolderReport holder_pairing(const CellField& f, const CellField& g, const CellField& p, double h);

struct EmbeddingReport {
  double norm_p = 0.0, norm_q = 0.0, ratio = 0.0, bound = 0.0;
  bool pass = true;
};

// ||f||_p <= (1 + |Omega|) ||f||_q when p <= q cellwise.
EmbeddingReport embedding_check(const CellField& f, const CellField& p, const CellField& q, const GridDomain& dom);

struct VectorField {
  CellField x, y;
  CellField magnitude() const { return (x.square() + y.square()).sqrt(); }
};

// Central differences inside the region, second-order one-sided differences
// where a neighbour is missing (two-point when only one neighbour exists).
// Without a region mask the stencil uses the whole domain.
VectorField gradient(const GridDomain& dom, const CellField& f, const std::vector<char>* region = nullptr);

double average(const CellField& f, const Region& region);
double average(const CellField& f);

NormValue weighted_gradient_norm(const GridDomain& dom, const CellField& f, const CellField& p, double alpha,
                                 double tol = kDefaultTol);

// Named function generators: linear, linear-y, quadratic, random-uniform, tent.
CellField make_function(const GridDomain& dom, const std::string& name, uint64_t seed = 0);

// (cell_i, cell_j, value) rows; an optional header line is skipped. Cells
// absent from the file are set to fill, or rejected when require_all is set.
CellField read_cell_csv(const std::string& path, const GridDomain& dom, bool require_all, double fill = 0.0);

}  // namespace vexlab
