#include <doctest.h>

#include <cmath>

#include "vexlab/counterexample.hpp"

using namespace vexlab;

namespace {

CounterexampleGeometry build(const std::string& mode, int L, int kmax, bool constant = false) {
  CounterexampleConfig c = CounterexampleConfig::defaults(mode, L);
  c.kmax = kmax;
  c.constant = constant;
  return build_counterexample(c);
}

}  // namespace

TEST_CASE("p_k follows p0 + |log r_k|^{-1/2}") {
  CounterexampleConfig c = CounterexampleConfig::defaults("boundary", 8);
  CHECK(c.p_k(3) == doctest::Approx(2.0 + 1.0 / std::sqrt(3.0 * std::log(4.0))).epsilon(1e-14));
  CHECK(c.p_k(3) == doctest::Approx(2.490).epsilon(1e-3));
  CHECK(c.radius(4) == 1.0 / 256.0);
  c.constant = true;
  CHECK(c.p_k(3) == 2.0);
}

TEST_CASE("no balls gives p = p0") {
  CounterexampleGeometry g = build("boundary", 6, 1);
  CHECK(g.balls.empty());
  CHECK((g.p - 2.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("ball family: disjoint, inside the domain, boundary distance 7 r_k") {
  for (const char* mode : {"boundary", "interior", "korn"}) {
    CounterexampleGeometry g = build(mode, 9, 4);
    REQUIRE(g.balls.size() == 3);
    CHECK(g.warnings.empty());
    for (std::size_t i = 0; i < g.balls.size(); ++i) {
      const auto& a = g.balls[i];
      if (i > 0) CHECK(a.r < g.balls[i - 1].r);
      CHECK(std::hypot(a.ax - a.cx, a.ay - a.cy) == doctest::Approx(4.0 * a.r));
      CHECK(std::hypot(a.bx - a.cx, a.by - a.cy) == doctest::Approx(4.0 * a.r));
      if (std::string(mode) == "boundary") {
        CHECK(a.cy == doctest::Approx(7.0 * a.r).epsilon(1e-14));
      } else {
        CHECK(a.cy - 7.0 * a.r >= g.cfg.mu - 1e-12);
      }
      for (std::size_t j = i + 1; j < g.balls.size(); ++j) {
        const auto& b = g.balls[j];
        CHECK(std::hypot(a.cx - b.cx, a.cy - b.cy) >= 7.0 * (a.r + b.r) - 1e-12);
      }
    }
  }
}

TEST_CASE("infeasible radii truncate k_max with a warning") {
  CounterexampleGeometry g = build("boundary", 9, 5);
  CHECK(g.balls.size() == 3);
  REQUIRE(g.warnings.size() == 1);
  CHECK(g.warnings[0].find("k_max truncated to 4") != std::string::npos);
}

TEST_CASE("exponent values: p_k on the inner discs, p0 away from the balls, range [p0, p_k]") {
  CounterexampleGeometry g = build("boundary", 9, 4);
  const auto& dom = g.dom;
  for (const auto& b : g.balls) {
    int ca = dom.id(static_cast<int>(b.ax / dom.h), static_cast<int>(b.ay / dom.h));
    REQUIRE(ca >= 0);
    CHECK(g.p[ca] == b.p);
  }
  CHECK(g.p.minCoeff() == 2.0);
  CHECK(g.p.maxCoeff() == g.balls.front().p);
  CHECK(g.p[dom.id(dom.nx - 1, dom.ny - 1)] == 2.0);
}

TEST_CASE("test functions: disjoint supports inside the balls, mean zero, unit slope on the ramp") {
  CounterexampleGeometry g = build("boundary", 9, 4);
  const auto fk = build_test_functions(g);
  REQUIRE(fk.size() == g.balls.size());
  std::vector<int> owner(g.dom.size(), -1);
  for (std::size_t n = 0; n < fk.size(); ++n) {
    const auto& b = g.balls[n];
    CHECK(fk[n].id == "f" + std::to_string(b.k));
    double s = 0.0, s1 = 0.0;
    for (int c = 0; c < g.dom.size(); ++c) {
      if (fk[n].f[c] == 0.0) continue;
      CHECK(std::hypot(g.dom.cx(c) - b.cx, g.dom.cy(c) - b.cy) < 7.0 * b.r);
      CHECK(owner[c] == -1);
      owner[c] = static_cast<int>(n);
      s += fk[n].f[c];
      s1 += std::abs(fk[n].f[c]);
    }
    CHECK(std::abs(s) / s1 <= 1e-3);
    VectorField gr = gradient(g.dom, fk[n].f);
    CellField mag = gr.magnitude();
    const double h = g.dom.h;
    for (int c = 0; c < g.dom.size(); ++c) {
      const double rho = std::hypot(g.dom.cx(c) - b.ax, g.dom.cy(c) - b.ay);
      if (rho > 2 * b.r + 2 * h && rho < 3 * b.r - 2 * h) CHECK(mag[c] == doctest::Approx(1.0).epsilon(0.05));
      if (rho < 2 * b.r - 2 * h) CHECK(mag[c] < 1e-12);
    }
  }
  const auto sh = build_shell_functions(g);
  REQUIRE(sh.size() == g.balls.size());
  CHECK(sh[0].id == "shell2");
  CHECK(sh[0].f.maxCoeff() == 1.0);
}

TEST_CASE("uniform continuity: delta*(eps) stabilises as k_max grows") {
  // eps above the jump p_4 - p0 = 0.425 but below p_3 - p0 = 0.490: ball 4 cannot matter
  for (double eps : {0.45, 0.7}) {
    double d3 = check_eps_continuity(build("boundary", 9, 3).p, build("boundary", 9, 3).dom, eps).constant;
    double d4 = check_eps_continuity(build("boundary", 9, 4).p, build("boundary", 9, 4).dom, eps).constant;
    CHECK(d3 == d4);
  }
}

TEST_CASE("boundary mode: the boundary log-Hoelder constant grows with k_max") {
  std::vector<double> c;
  for (int kmax : {2, 3, 4}) {
    CounterexampleGeometry g = build("boundary", 9, kmax);
    c.push_back(check_boundary_LH(g.p, g.dom, 1.0).constant);
  }
  CHECK(c[1] > c[0]);
  CHECK(c[2] > c[1]);
}

TEST_CASE("interior mode: the boundary trace is p0") {
  CounterexampleGeometry g = build("interior", 8, 4);
  TraceResult tr = boundary_trace(g.p, g.dom, 1.0);
  for (double v : tr.value) CHECK(v == g.cfg.p0);
  CHECK(tr.report.constant == 0.0);
}

TEST_CASE("blow-up: monotone ratios, quotient recomputable, constant contrast flat") {
  for (const char* mode : {"boundary", "interior"}) {
    BlowupReport rep = blowup_sp(build(mode, 9, 4), 0.0);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.monotone);
    for (const auto& row : rep.rows) {
      CHECK(row.quotient == doctest::Approx(row.ratio / row.predicted).epsilon(1e-14));
      CHECK(row.predicted == doctest::Approx(std::pow(row.r, 2.0 / row.p - 2.0 / build(mode, 9, 4).cfg.p0)));
    }
    BlowupReport con = blowup_sp(build(mode, 9, 4, true), 0.0);
    CHECK(con.flatness <= 1.2);
  }
}

TEST_CASE("Korn: rigid rotation gives an unbounded witness, the blow-up is monotone") {
  GridDomain dom = build_domain(parse_domain_spec("disc", 6));
  CellField ux(dom.size()), uy(dom.size());
  for (int c = 0; c < dom.size(); ++c) {
    ux[c] = -(dom.cy(c) - 0.5);
    uy[c] = dom.cx(c) - 0.5;
  }
  KornValue v = korn_ratio(dom, ux, uy, CellField::Constant(dom.size(), 2.0));
  CHECK(v.unbounded);
  CHECK(std::isinf(v.ratio));

  CounterexampleGeometry g = build("korn", 9, 4);
  BlowupReport rep = korn_blowup(g);
  CHECK(rep.monotone);
  bool seen = false;
  for (const auto& n : rep.notes)
    if (n.rfind("rigid_residual=", 0) == 0) {
      seen = true;
      CHECK(std::stod(n.substr(15)) < 1e-12);
    }
  CHECK(seen);
  CHECK(korn_blowup(build("korn", 9, 4, true)).flatness <= 1.2);
  CHECK_THROWS_AS(korn_blowup(build("boundary", 8, 3)), CounterexampleError);
}

TEST_CASE("report csv and svg") {
  BlowupReport rep = blowup_sp(build("boundary", 8, 3), 0.0);
  const std::string csv = rep.csv();
  CHECK(csv.find("k,r_k,p_k,lhs,rhs,ratio,predicted,quotient") != std::string::npos);
  CHECK(rep.svg().rfind("<svg", 0) == 0);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(CounterexampleConfig::defaults("sideways", 5), CounterexampleError);
  CounterexampleConfig c = CounterexampleConfig::defaults("boundary", 6);
  c.p0 = 1.0;
  CHECK_THROWS_AS(build_counterexample(c), CounterexampleError);
  c = CounterexampleConfig::defaults("boundary", 6);
  c.domain = parse_domain_spec("L-shape", 6);
  CHECK_THROWS_AS(build_counterexample(c), CounterexampleError);
  c = CounterexampleConfig::defaults("boundary", 6);
  c.radii = {0.1, 0.2};
  c.kmax = 3;
  CHECK_THROWS_AS(build_counterexample(c), CounterexampleError);
}
