#include <doctest.h>

#include <cmath>

#include "vexlab/operators.hpp"

using namespace vexlab;

namespace {

struct Setup {
  GridDomain dom;
  TreeCovering tree;
};

Setup make(const std::string& spec, int L) {
  Setup s{build_domain(parse_domain_spec(spec, L)), {}};
  s.tree = build_tree_covering(whitney_decompose(s.dom).cubes, s.dom);
  return s;
}

double integral(const Pieces& pc, double h) {
  double s = 0.0;
  for (std::size_t k = 0; k < pc.size(); ++k) s += pc.w[k] * pc.v[k] * h * h;
  return s;
}

CellField cell_mass(const Pieces& pc, int n) {
  CellField m = CellField::Zero(n);
  for (std::size_t k = 0; k < pc.size(); ++k) m[pc.cell[k]] += pc.w[k] * pc.v[k];
  return m;
}

CellField wave(const GridDomain& dom) {
  CellField f(dom.size());
  for (int c = 0; c < dom.size(); ++c) f[c] = std::sin(5.0 * dom.cx(c)) - 0.3 * dom.cy(c);
  return f;
}

}  // namespace

TEST_CASE("averaging fixes constants, kills mean-zero data and is a contraction") {
  Setup s = make("unit-square", 4);
  Region B = box_region(s.dom, 0.2, 0.1, 0.7, 0.55);
  Pieces a = averaging(CellField::Constant(s.dom.size(), 3.0), B);
  for (double v : a.v) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));
  CellField f = wave(s.dom);
  CellField g = f - average(f, B);
  for (double v : averaging(g, B).v) CHECK(std::abs(v) < 1e-13);
  CellField p = CellField::Constant(s.dom.size(), 2.5);
  auto est = estimate_operator_norm("A_B", [&](const CellField& x) { return averaging(x, B); },
                                    operator_corpus(s.dom, 20, 5), p, p, s.dom.h, 5);
  CHECK(est.estimate <= 1.0 + 1e-8);
}

TEST_CASE("identity has estimated norm 1") {
  Setup s = make("L-shape", 4);
  CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
  auto est = estimate_operator_norm("I", [](const CellField& x) { return field_to_pieces(x); },
                                    operator_corpus(s.dom, 10, 1), p, p, s.dom.h, 1);
  CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("A_Gamma on f = 1 is the indicator of the disjoint strips") {
  Setup s = make("L-shape", 5);
  Pieces a = hardy_shadow(CellField::Ones(s.dom.size()), s.tree);
  for (double v : a.v) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CellField m = cell_mass(a, s.dom.size());
  for (int c = 0; c < s.dom.size(); ++c) CHECK(m[c] <= 1.0 + 1e-12);
  double strips = 0.0;
  for (int t = 0; t < s.tree.size(); ++t) strips += s.tree.B[t].measure(s.dom.h);
  CHECK(integral(a, s.dom.h) == doctest::Approx(strips).epsilon(1e-12));
}

TEST_CASE("A_Gamma integral oracle from the shadow integrals of |f|") {
  Setup s = make("unit-square", 4);
  CellField f = wave(s.dom);
  auto sh = shadow_integrals(s.tree, CellField(f.abs()), s.dom.h);
  double oracle = 0.0;
  for (int t = 0; t < s.tree.size(); ++t)
    if (t != s.tree.root) oracle += s.tree.B[t].measure(s.dom.h) * sh[t] / s.tree.shadow_measure[t];
  CHECK(integral(hardy_shadow(f, s.tree), s.dom.h) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("T_p integral oracle from per-node Luxemburg norms") {
  Setup s = make("L-shape", 4);
  CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
  CellField f = wave(s.dom);
  const double h = s.dom.h;
  double oracle = 0.0, oracle_a = 0.0;
  const double alpha = 0.5;
  for (int t = 0; t < s.tree.size(); ++t) {
    const Region& U = s.tree.U[t];
    const double ratio = luxemburg_norm(f, p, U, h).value / indicator_norm(U, p, h);
    oracle += U.measure(h) * ratio;
    oracle_a += std::pow(U.measure(h), 1.0 + alpha / 2.0) * ratio;
  }
  CHECK(integral(tree_average_Tp(f, s.tree, s.dom, p), h) == doctest::Approx(oracle).epsilon(1e-9));
  CellField q = 1.0 / (1.0 / p - alpha / 2.0);
  CHECK(integral(tree_average_Talpha(f, s.tree, s.dom, p, q, alpha), h) == doctest::Approx(oracle_a).epsilon(1e-9));
}

TEST_CASE("T^0 with q = p equals T_p piece by piece") {
  Setup s = make("unit-square", 4);
  CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
  CellField f = wave(s.dom);
  Pieces a = tree_average_Tp(f, s.tree, s.dom, p);
  Pieces b = tree_average_Talpha(f, s.tree, s.dom, p, p, 0.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.cell[k] == b.cell[k]);
    CHECK(a.w[k] == b.w[k]);
    CHECK(a.v[k] == doctest::Approx(b.v[k]).epsilon(1e-12));
  }
}

TEST_CASE("T^alpha rejects exponent pairs outside the admissible gap") {
  Setup s = make("unit-square", 3);
  CellField p = CellField::Constant(s.dom.size(), 2.0);
  CellField q = CellField::Constant(s.dom.size(), 5.0);  // 1/2 - 1/5 > 0.25 / 2
  CHECK_THROWS_AS(tree_average_Talpha(wave(s.dom), s.tree, s.dom, p, q, 0.25), OperatorError);
  CHECK_THROWS_AS(tree_average_Talpha(wave(s.dom), s.tree, s.dom, p, CellField(p * 0.9), 0.25), OperatorError);
}

TEST_CASE("positive homogeneity and support of the tree operators") {
  Setup s = make("L-shape", 4);
  CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
  CellField f = wave(s.dom);
  for (double a : {0.5, 7.0}) {
    Pieces x = hardy_shadow(f, s.tree), y = hardy_shadow(CellField(a * f), s.tree);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(y.v[k] == doctest::Approx(a * x.v[k]).epsilon(1e-12));
    Pieces u = tree_average_Tp(f, s.tree, s.dom, p), v = tree_average_Tp(CellField(a * f), s.tree, s.dom, p);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(v.v[k] == doctest::Approx(a * u.v[k]).epsilon(1e-9));
  }
  std::vector<char> in_u(s.dom.size(), 0), in_b(s.dom.size(), 0);
  for (int t = 0; t < s.tree.size(); ++t) {
    for (int c : s.tree.U[t].cells) in_u[c] = 1;
    for (int c : s.tree.B[t].cells) in_b[c] = 1;
  }
  for (int c : tree_average_Tp(f, s.tree, s.dom, p).cell) CHECK(in_u[c]);
  for (int c : hardy_shadow(f, s.tree).cell) CHECK(in_b[c]);
}

TEST_CASE("Hoelder sum: f = g = 1, constant p gives sum |U_t| / |Omega| <= C1") {
  Setup s = make("unit-square", 4);
  CellField one = CellField::Ones(s.dom.size());
  CellField p = CellField::Constant(s.dom.size(), 2.0);
  HolderSumReport r = holder_sum_check(one, one, s.tree, s.dom, p, p);
  double total = 0.0;
  for (int t = 0; t < s.tree.size(); ++t) total += s.tree.U[t].measure(s.dom.h);
  CHECK(r.diagonal == doctest::Approx(total / s.dom.area()).epsilon(1e-9));
  CHECK(r.diagonal <= s.tree.C1);
}

TEST_CASE("operator estimates are deterministic and stable across L for a radial-LH exponent") {
  std::vector<double> a, t;
  for (int L : {4, 5, 6}) {
    Setup s = make("unit-square", L);
    CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
    auto corpus = operator_corpus(s.dom, 20, 3);
    auto ea = estimate_operator_norm("A_Gamma", [&](const CellField& f) { return hardy_shadow(f, s.tree); }, corpus,
                                     p, p, s.dom.h, 3);
    auto ea2 = estimate_operator_norm("A_Gamma", [&](const CellField& f) { return hardy_shadow(f, s.tree); },
                                      operator_corpus(s.dom, 20, 3), p, p, s.dom.h, 3);
    CHECK(ea.csv() == ea2.csv());
    auto et = estimate_operator_norm(
        "T_p", [&](const CellField& f) { return tree_average_Tp(f, s.tree, s.dom, p); }, corpus, p, p, s.dom.h, 3);
    a.push_back(ea.estimate);
    t.push_back(et.estimate);
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    CHECK(std::max(a[i] / a[i - 1], a[i - 1] / a[i]) < 1.5);
    CHECK(std::max(t[i] / t[i - 1], t[i - 1] / t[i]) < 1.5);
  }
}

TEST_CASE("T^alpha with p = 2, alpha = 0.5 maps into q = 4 with a bounded estimate") {
  std::vector<double> e;
  for (int L : {4, 5, 6}) {
    Setup s = make("unit-square", L);
    CellField p = CellField::Constant(s.dom.size(), 2.0);
    CellField q = sobolev_target(p, 0.5);
    CHECK((q - 4.0).abs().maxCoeff() < 1e-12);
    auto est = estimate_operator_norm(
        "T_alpha", [&](const CellField& f) { return tree_average_Talpha(f, s.tree, s.dom, p, q, 0.5); },
        operator_corpus(s.dom, 20, 9), p, q, s.dom.h, 9);
    CHECK(std::isfinite(est.estimate));
    e.push_back(est.estimate);
  }
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::max(e[i] / e[i - 1], e[i - 1] / e[i]) < 1.5);
}

TEST_CASE("degenerate corpus is rejected") {
  Setup s = make("unit-square", 3);
  CellField p = CellField::Constant(s.dom.size(), 2.0);
  std::vector<TestFunction> zero = {{"zero", CellField::Zero(s.dom.size())}};
  CHECK_THROWS_AS(estimate_operator_norm("I", [](const CellField& x) { return field_to_pieces(x); }, zero, p, p,
                                         s.dom.h),
                  OperatorError);
}
