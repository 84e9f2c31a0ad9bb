#include <doctest.h>

#include <cmath>

#include "vexlab/inequality_lab.hpp"
#include "vexlab/report.hpp"

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

TestFunction field(const GridDomain& dom, const std::string& id, double (*fn)(double, double)) {
  CellField f(dom.size());
  for (int c = 0; c < dom.size(); ++c) f[c] = fn(dom.cx(c), dom.cy(c));
  return {id, f};
}

Region all_cells(const GridDomain& dom) {
  std::vector<int> c(dom.size());
  for (int i = 0; i < dom.size(); ++i) c[i] = i;
  return cells_region(c);
}

// Node whose U_t straddles x = 1/2 (the jump of the step exponent).
int straddling_node(const Setup& s) {
  for (int t = 0; t < s.tree.size(); ++t) {
    const Rect& U = s.tree.nodes[t].U;
    const int64_t mid = static_cast<int64_t>(s.dom.nx) * kSub / 2;
    if (U.x0 < mid && U.x1 > mid && U.x1 - U.x0 >= 4 * kSub) return t;
  }
  return -1;
}

double spread(const std::vector<double>& v) {
  double worst = 1.0;
  for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, std::max(v[i] / v[i - 1], v[i - 1] / v[i]));
  return worst;
}

}  // namespace

TEST_CASE("classical: constants give zero and f = x gives C q = sqrt(1/12)") {
  GridDomain dom = make("unit-square", 6).dom;
  Region Q = all_cells(dom);
  auto one = classical_sp_verify(dom, Q, 1.0, 2.0, 2.0, field(dom, "one", [](double, double) { return 1.0; }));
  CHECK(one.rows[0].lhs < 1e-12);
  CHECK(one.rows[0].ratio == 0.0);
  auto x = classical_sp_verify(dom, Q, 1.0, 2.0, 2.0, field(dom, "x", [](double x, double) { return x; }));
  CHECK(x.rows[0].ratio * 2.0 == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-3));
}

TEST_CASE("classical: p = 1.5 up to q = p* = 6 stays finite; branch errors") {
  GridDomain dom = make("unit-square", 5).dom;
  Region Q = all_cells(dom);
  auto tent = field(dom, "tent", [](double x, double y) { return std::max(0.0, 0.4 - std::hypot(x - 0.5, y - 0.5)); });
  for (double q : {2.0, 4.0, 6.0}) {
    auto r = classical_sp_verify(dom, Q, 1.0, 1.5, q, tent);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.max_ratio > 0.0);
    CHECK(r.certificate_value("branch") == "p<n");
  }
  CHECK_THROWS_AS(classical_sp_verify(dom, Q, 1.0, 1.5, 7.0, tent), InequalityError);
  CHECK_THROWS_AS(classical_sp_verify(dom, Q, 1.0, 1.5, 1.2, tent), InequalityError);
  CHECK_THROWS_AS(classical_sp_verify(dom, Q, 1.0, 2.0, kInfinity, tent), InequalityError);
}

TEST_CASE("local inequality with a constant exponent is the classical one over (1 + |Q|)^2") {
  Setup s = make("unit-square", 5);
  auto tent = field(s.dom, "tent", [](double x, double y) { return std::sin(3.0 * x) + x * y; });
  CellField p = constant_exponent(s.dom, 1.5);
  for (int t = 0; t < s.tree.size(); t += 9) {
    const Rect& Q = s.tree.nodes[t].Q;
    const double side = static_cast<double>(Q.x1 - Q.x0) / kSub * s.dom.h;
    const double Qm = side * side;
    auto loc = local_sp_verify(s.dom, s.tree, t, p, p, tent);
    auto cl = classical_sp_verify(s.dom, s.tree.U[t], Qm, 1.5, 1.5, tent);
    CHECK(loc.max_ratio * (1.0 + Qm) * (1.0 + Qm) == doctest::Approx(cl.max_ratio).epsilon(1e-10));
  }
}

TEST_CASE("local inequality: a small step in 1/p certifies branch 1, a large q fails") {
  Setup s = make("unit-square", 5);
  int t = straddling_node(s);
  REQUIRE(t >= 0);
  auto f = field(s.dom, "f", [](double x, double y) { return x * x - y; });
  CellField p = step_exponent(s.dom, 1.5, 0.1);
  auto r = local_sp_verify(s.dom, s.tree, t, p, p, f);
  CHECK(r.certificate_value("branch") == "p_-<n");
  CHECK(r.certificate_value("p_minus") == fmt(1.5));
  CellField low = constant_exponent(s.dom, 1.2);
  CHECK_THROWS_WITH_AS(local_sp_verify(s.dom, s.tree, t, low, constant_exponent(s.dom, 7.0), f),
                       doctest::Contains("oscillation hypothesis fails"), InequalityError);
}

TEST_CASE("oscillation partition: single cube for constants, counted bounds otherwise") {
  Setup s = make("unit-square", 6);
  auto c = partition_for_oscillation(s.dom, s.tree, s.tree.root, constant_exponent(s.dom, 1.5), 0.3, 0.25);
  CHECK(c.M == 1);
  CHECK(c.certified);
  CellField p = radial_lh_exponent(s.dom, 1.2, 1.6);
  for (int t = 0; t < s.tree.size(); t += 5) {
    auto part = partition_for_oscillation(s.dom, s.tree, t, p, 0.3, 0.25);
    CHECK(part.M <= part.M_bound + 1e-9);
    CHECK(part.q_bound == doctest::Approx(2.0 / (1.0 - 0.3 - 0.25)));
    if (part.certified)
      for (double q : part.q_plus) CHECK(q <= part.q_bound + 1e-12);
  }
  CHECK_THROWS_AS(partition_for_oscillation(s.dom, s.tree, 0, p, 0.8, 0.25), InequalityError);
  CHECK_THROWS_WITH_AS(partition_for_oscillation(s.dom, s.tree, 0, step_exponent(s.dom, 1.2, 1.0), 0.3, 0.25),
                       doctest::Contains("refine grid"), InequalityError);
}

TEST_CASE("global weighted inequality, p = 2, alpha = 0, f = x - 1/2: ratio = ||f||_2 / ||d||_2") {
  for (int L : {4, 5, 6}) {
    Setup s = make("unit-square", L);
    CellField p = constant_exponent(s.dom, 2.0);
    auto f = field(s.dom, "x", [](double x, double) { return x - 0.5; });
    GlobalSpOptions opt;
    auto r = global_sp_verify(s.dom, s.tree, p, opt, {f});
    CHECK(r.status == "pass");
    double lhs = 0.0, rhs = 0.0;
    for (int c = 0; c < s.dom.size(); ++c) {
      lhs += f.f[c] * f.f[c] * s.dom.h * s.dom.h;
      rhs += s.dom.d[c] * s.dom.d[c] * s.dom.h * s.dom.h;
    }
    CHECK(r.rows[0].ratio == doctest::Approx(std::sqrt(lhs / rhs)).epsilon(1e-9));
  }
}

TEST_CASE("global inequality: zero for constants, scale covariance, stability") {
  std::vector<double> mx;
  for (int L : {4, 5, 6}) {
    Setup s = make("unit-square", L);
    CellField p = radial_lh_exponent(s.dom, 1.5, 2.5);
    GlobalSpOptions opt;
    opt.alpha = 0.25;
    auto corpus = standard_corpus(s.dom, 1);
    CHECK(corpus.size() == 20);
    auto r = global_sp_verify(s.dom, s.tree, p, opt, corpus);
    CHECK(r.status == "pass");
    CHECK(r.rows.size() == 20);
    for (const auto& row : r.rows)
      if (row.id == "constant") CHECK(row.lhs < 1e-12);
    std::vector<TestFunction> scaled = corpus;
    for (auto& f : scaled) f.f *= -37.5;
    auto r2 = global_sp_verify(s.dom, s.tree, p, opt, scaled);
    for (std::size_t i = 0; i < r.rows.size(); ++i)
      if (r.rows[i].ratio > 0.0) CHECK(r2.rows[i].ratio == doctest::Approx(r.rows[i].ratio).epsilon(1e-10));
    mx.push_back(r.max_ratio);
  }
  CHECK(spread(mx) < 1.5);
}

TEST_CASE("hypothesis monotonicity: weighted certified implies small-exponent certified when p_+ < n") {
  Setup s = make("L-shape", 5);
  auto corpus = standard_corpus(s.dom, 2);
  for (ExponentField p : {radial_lh_exponent(s.dom, 1.2, 1.8), step_exponent(s.dom, 1.3, 0.1),
                          constant_exponent(s.dom, 1.7)}) {
    GlobalSpOptions w;
    w.alpha = 0.2;
    auto rw = global_sp_verify(s.dom, s.tree, p, w, corpus);
    GlobalSpOptions se = w;
    se.variant = "small-exponent";
    auto rs = global_sp_verify(s.dom, s.tree, p, se, corpus);
    if (rw.status == "pass") CHECK(rs.status == "pass");
  }
}

TEST_CASE("global inequality input errors") {
  Setup s = make("unit-square", 4);
  CellField p = constant_exponent(s.dom, 2.0);
  auto corpus = standard_corpus(s.dom, 1);
  GlobalSpOptions one;
  one.alpha = 1.0;
  CHECK_THROWS_WITH_AS(global_sp_verify(s.dom, s.tree, p, one, corpus), doctest::Contains("constant exponent"),
                       InequalityError);
  GlobalSpOptions bad;
  bad.variant = "nope";
  CHECK_THROWS_AS(global_sp_verify(s.dom, s.tree, p, bad, corpus), InequalityError);
  GlobalSpOptions ip;
  ip.variant = "improved-poincare";
  ip.alpha = 0.3;
  CHECK_THROWS_AS(global_sp_verify(s.dom, s.tree, p, ip, corpus), InequalityError);
  ip.alpha = 0.0;
  CHECK(global_sp_verify(s.dom, s.tree, p, ip, corpus).status == "pass");
}

TEST_CASE("large-exponent variant needs p_- >= n") {
  Setup s = make("unit-square", 4);
  auto corpus = standard_corpus(s.dom, 1);
  GlobalSpOptions le;
  le.variant = "large-exponent";
  CHECK(global_sp_verify(s.dom, s.tree, constant_exponent(s.dom, 2.5), le, corpus).status == "pass");
  CHECK(global_sp_verify(s.dom, s.tree, constant_exponent(s.dom, 1.5), le, corpus).status == "hypotheses unmet");
}

TEST_CASE("Sobolev via extension: zero, q = 4 for p = 2 and alpha = 1/2, stability") {
  std::vector<double> mx;
  for (int L : {4, 5, 6}) {
    GridDomain dom = make("unit-square", L).dom;
    CellField p = constant_exponent(dom, 2.0);
    auto corpus = compact_corpus(dom, 3);
    auto r = sobolev_verify(dom, p, 0.5, corpus);
    CHECK(r.status == "pass");
    CHECK(r.certificate_value("extension_preserves_range") == "yes");
    for (const auto& row : r.rows)
      if (row.id == "zero") {
        CHECK(row.lhs == 0.0);
        CHECK(row.ratio == 0.0);
      }
    mx.push_back(r.max_ratio);
  }
  CHECK(spread(mx) < 1.5);
}

TEST_CASE("Sobolev via extension on an L-shape with a small step exponent is finite") {
  GridDomain dom = make("L-shape", 5).dom;
  auto r = sobolev_verify(dom, step_exponent(dom, 1.6, 0.05), 0.25, compact_corpus(dom, 4));
  CHECK(std::isfinite(r.max_ratio));
  CHECK(r.max_ratio > 0.0);
  CHECK(r.certificate_value("extension_preserves_range") == "yes");
}

TEST_CASE("Sobolev via extension rejects functions touching the boundary") {
  GridDomain dom = make("unit-square", 4).dom;
  auto one = field(dom, "one", [](double, double) { return 1.0; });
  CHECK_THROWS_AS(sobolev_verify(dom, constant_exponent(dom, 2.0), 0.0, {one}), InequalityError);
}

TEST_CASE("report csv carries certificate and refinement lines") {
  Setup s = make("unit-square", 4);
  GlobalSpOptions opt;
  auto r = global_sp_verify(s.dom, s.tree, constant_exponent(s.dom, 2.0), opt, standard_corpus(s.dom, 1));
  r.refinement = {{4, r.max_ratio}};
  const std::string csv = r.csv();
  CHECK(csv.find("# certificate") != std::string::npos);
  CHECK(csv.find("# refinement L=4") != std::string::npos);
  CHECK(csv.find("id,lhs,rhs,ratio") != std::string::npos);
  CHECK(refinement_svg("t", r.refinement).rfind("<svg", 0) == 0);
}
