// One PASS/FAIL line per acceptance criterion. Exits 1 when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vexlab/counterexample.hpp"
#include "vexlab/decomposition.hpp"
#include "vexlab/inequality_lab.hpp"
#include "vexlab/operators.hpp"
#include "vexlab/pieces.hpp"

using namespace vexlab;

namespace {

GridDomain make(const std::string& spec, int L) { return build_domain(parse_domain_spec(spec, L)); }

TreeCovering tree_of(const GridDomain& dom) { return build_tree_covering(whitney_decompose(dom).cubes, dom); }

// max over consecutive pairs of max(a/b, b/a)
double spread(const std::vector<double>& v) {
  double worst = 1.0;
  for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, std::max(v[i] / v[i - 1], v[i - 1] / v[i]));
  return worst;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : "/") + num(x);
  return s;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int n, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= budget_s) {
    o.pass = false;
    o.detail += "; over the runtime budget";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s  %s  [%.2f s, budget %g s]\n", n, title, o.pass ? "PASS" : "FAIL",
              o.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

ExponentField smooth_exponent(const GridDomain& dom) {
  ExponentField p(dom.size());
  for (int c = 0; c < dom.size(); ++c) p[c] = 2.0 + 0.5 * std::sin(3.0 * dom.cx(c)) * std::cos(2.0 * dom.cy(c));
  return p;
}

Outcome whitney_exactness() {
  Outcome o;
  long cubes = 0;
  for (const char* spec : {"unit-square", "L-shape"})
    for (int L : {4, 5, 6}) {
      GridDomain dom = make(spec, L);
      for (const auto& q : whitney_decompose(dom).cubes) {
        const int64_t side = cube_side_cells(dom, q), d2 = cube_dist2(dom, q);
        // diam <= dist <= 4 diam, squared, diam^2 = 2 side^2
        if (d2 < 2 * side * side || d2 > 32 * side * side) o.pass = false;
        ++cubes;
      }
    }
  o.detail = std::to_string(cubes) + " cubes checked in integer arithmetic";
  return o;
}

Outcome tree_contract() {
  Outcome o;
  std::ostringstream d;
  for (const char* spec : {"unit-square", "L-shape"}) {
    std::vector<double> c2;
    int c1 = 0;
    bool disjoint = true;
    for (int L : {4, 5, 6}) {
      GridDomain dom = make(spec, L);
      TreeCovering tree = tree_of(dom);
      std::vector<Rect> strips;
      int64_t sum = 0;
      for (int t = 0; t < tree.size(); ++t)
        if (t != tree.root) {
          strips.push_back(tree.nodes[t].B);
          sum += tree.nodes[t].B.area();
        }
      disjoint = disjoint && union_area(strips) == sum;
      c1 = std::max(c1, tree.C1);
      c2.push_back(tree.C2);
    }
    const double st = spread(c2);
    o.pass = o.pass && c1 <= 4 && disjoint && st < 2.0;
    d << (d.tellp() > 0 ? "; " : "") << spec << ": C1=" << c1 << " B disjoint=" << (disjoint ? "yes" : "no")
      << " C2=" << join(c2) << " (spread " << num(st) << ")";
  }
  o.detail = d.str();
  return o;
}

Outcome luxemburg_oracles() {
  Outcome o;
  GridDomain dom = make("unit-square", 5);
  Region E = box_region(dom, 0.125, 0.25, 0.75, 0.5);
  const double meas = 0.625 * 0.25;
  double worst = 0.0;
  for (double p : {1.0, 1.25, 2.0, 3.7, 8.0}) {
    const double exact = std::pow(meas, 1.0 / p);
    worst = std::max(worst, std::abs(indicator_norm(E, CellField::Constant(dom.size(), p), dom.h) - exact) / exact);
  }
  GridDomain d4 = make("unit-square", 4);
  CellField f(d4.size()), p(d4.size());
  for (int c = 0; c < d4.size(); ++c) {
    const bool left = d4.cx(c) < 0.5;
    f[c] = left ? 2.0 : 0.0;
    p[c] = left ? 2.0 : 3.0;
  }
  const double two = luxemburg_norm(f, p, d4.h).value;
  o.pass = worst <= 1e-8 && std::abs(two - std::sqrt(2.0)) <= 1e-6;
  o.detail = "max rel error |E|^{1/p} " + num(worst) + "; two-valued " + num(two) + " vs sqrt(2)";
  return o;
}

Outcome poincare_number() {
  Outcome o;
  const double exact = std::sqrt(1.0 / 12.0);
  std::vector<double> err;
  for (int L : {6, 7, 8}) {
    GridDomain dom = make("unit-square", L);
    CellField f(dom.size());
    for (int c = 0; c < dom.size(); ++c) f[c] = dom.cx(c);
    f -= average(f);
    err.push_back(std::abs(luxemburg_norm(f, CellField::Constant(dom.size(), 2.0), dom.h).value - exact));
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  // second order: the error drops by about 4 per level
  o.pass = err[2] <= 1e-3 && r1 > 3.5 && r2 > 3.5;
  o.detail = "errors L=6,7,8 " + join(err) + " (ratios " + num(r1) + ", " + num(r2) + ")";
  return o;
}

Outcome decomposition_identities() {
  Outcome o;
  std::ostringstream d;
  {
    GridDomain dom = make("unit-square", 5);
    TreeCovering tree = tree_of(dom);
    PartitionOfUnity pou = partition_of_unity(tree, dom);
    ExponentField q = CellField::Constant(dom.size(), 2.0);
    double worst_sum = 0.0, worst_mean = 0.0;
    bool support = true;
    for (const CellField& g : mean_zero_fields(tree, dom, 50, 1)) {
      DecompositionReport r = verify_decomposition(decompose(g, tree, dom, pou), g, tree, dom, q);
      worst_sum = std::max(worst_sum, r.sum_residual / r.max_abs_g);
      worst_mean = std::max(worst_mean, r.mean_ratio);
      support = support && r.support_ok;
    }
    o.pass = worst_sum <= 1e-10 && worst_mean <= 1.0 && support;
    d << "50 fields at L=5: max residual/max|g| " << num(worst_sum) << ", mean ratio " << num(worst_mean)
      << ", supports " << (support ? "exact" : "violated");
  }
  std::vector<double> c;
  for (int L : {4, 5, 6}) {
    GridDomain dom = make("unit-square", L);
    TreeCovering tree = tree_of(dom);
    PartitionOfUnity pou = partition_of_unity(tree, dom);
    ExponentField p = radial_lh_exponent(dom, 1.5, 2.5);
    double worst = 0.0;
    for (const CellField& g : mean_zero_fields(tree, dom, 10, 1)) {
      DecompositionReport r = verify_decomposition(decompose(g, tree, dom, pou), g, tree, dom, p);
      if (std::isfinite(r.constant)) worst = std::max(worst, r.constant);
    }
    c.push_back(worst);
  }
  const double st = spread(c);
  o.pass = o.pass && st < 1.5;
  d << "; radial-LH constant L=4,5,6 " << join(c) << " (spread " << num(st) << ")";
  o.detail = d.str();
  return o;
}

double a_gamma(const GridDomain& dom, const TreeCovering& tree, const ExponentField& p,
               const std::vector<TestFunction>& corpus) {
  return estimate_operator_norm("A_Gamma", [&](const CellField& f) { return hardy_shadow(f, tree); }, corpus, p, p,
                                dom.h, 1)
      .estimate;
}

Outcome operator_contrast() {
  Outcome o;
  std::ostringstream d;
  std::vector<double> a, t;
  for (int L : {4, 5, 6}) {
    GridDomain dom = make("unit-square", L);
    TreeCovering tree = tree_of(dom);
    ExponentField p = radial_lh_exponent(dom, 1.5, 2.5);
    auto corpus = operator_corpus(dom, 20, 1);
    a.push_back(a_gamma(dom, tree, p, corpus));
    t.push_back(estimate_operator_norm(
                    "T_p", [&](const CellField& f) { return tree_average_Tp(f, tree, dom, p); }, corpus, p, p, dom.h, 1)
                    .estimate);
  }
  const double sa = spread(a), st = spread(t);
  o.pass = sa < 1.5 && st < 1.5;
  d << "radial-LH L=4,5,6: A_Gamma " << join(a) << " (spread " << num(sa) << "), T_p " << join(t) << " (spread "
    << num(st) << ")";

  // boundary counterexample exponent, p0 = 1.5; one lattice and tree, balls added one at a time
  CounterexampleConfig cfg = CounterexampleConfig::defaults("boundary", 11);
  cfg.p0 = 1.5;
  cfg.kmax = 5;
  CounterexampleGeometry full = build_counterexample(cfg);
  TreeCovering tree = tree_of(full.dom);
  std::vector<double> growth;
  for (int kmax = 2; kmax <= 5; ++kmax) {
    CounterexampleGeometry g = full;
    g.cfg.kmax = kmax;
    g.balls.resize(std::min<std::size_t>(g.balls.size(), kmax - g.cfg.kmin + 1));
    g.p = build_counterexample_exponent(g);
    std::vector<TestFunction> extra = build_test_functions(g), shells = build_shell_functions(g);
    extra.insert(extra.end(), shells.begin(), shells.end());
    growth.push_back(a_gamma(g.dom, tree, g.p, extra));
  }
  bool monotone = full.balls.size() == 4;
  for (std::size_t i = 1; i < growth.size(); ++i) monotone = monotone && growth[i] > growth[i - 1];
  const double total = growth.back() / growth.front();
  o.pass = o.pass && monotone && total >= 2.0;
  d << "; counterexample p0=1.5 L=11 k_max=2..5: A_Gamma " << join(growth) << " (monotone "
    << (monotone ? "yes" : "no") << ", growth " << num(total) << "x)";
  o.detail = d.str();
  return o;
}

std::string blowup_summary(const BlowupReport& r) {
  std::ostringstream d;
  d << r.mode << ": k=";
  for (std::size_t i = 0; i < r.rows.size(); ++i) d << (i ? "," : "") << r.rows[i].k;
  d << " ratio ";
  std::vector<double> ratio, quot;
  for (const auto& row : r.rows) {
    ratio.push_back(row.ratio);
    quot.push_back(row.quotient);
  }
  d << join(ratio) << " quotient " << join(quot) << " monotone=" << (r.monotone ? "yes" : "no")
    << " band=" << (r.band_ok ? "yes" : "no");
  return d.str();
}

Outcome blowup_power_law() {
  Outcome o;
  std::ostringstream d;
  auto geometry = [](const std::string& mode) {
    CounterexampleConfig c = CounterexampleConfig::defaults(mode, 10);
    c.kmax = 5;
    return build_counterexample(c);
  };
  CounterexampleGeometry b = geometry("boundary");
  BlowupReport rb = blowup_sp(b, 0.0);
  const bool all_k = rb.rows.size() == 4;
  o.pass = all_k && rb.monotone && rb.band_ok;
  d << blowup_summary(rb);
  if (!all_k) d << " (" << (b.warnings.empty() ? "missing rows" : b.warnings.front()) << ")";

  BlowupReport ri = blowup_sp(geometry("interior"), 0.0);
  o.pass = o.pass && ri.rows.size() == 4 && ri.monotone;
  d << "; " << blowup_summary(ri);

  BlowupReport rk = korn_blowup(geometry("korn"));
  o.pass = o.pass && rk.rows.size() == 4 && rk.monotone;
  d << "; " << blowup_summary(rk);
  o.detail = d.str();
  return o;
}

Outcome sobolev_extension() {
  Outcome o;
  std::ostringstream d;
  bool preserved = true, certified = true;
  for (const char* spec : {"unit-square", "L-shape"}) {
    GridDomain dom = make(spec, 5);
    ExponentField p = radial_lh_exponent(dom, 1.5, 2.5);
    ExtendedExponent ext = extend_exponent(p, dom);
    preserved = preserved && ext.p.minCoeff() == p.minCoeff() && ext.p.maxCoeff() == p.maxCoeff();
    for (double tau : {1.0, 2.0}) certified = certified && std::isfinite(check_boundary_LH(ext.p, ext.dom, tau).constant);
  }
  std::vector<double> m;
  for (int L : {4, 5, 6}) {
    GridDomain dom = make("unit-square", L);
    ExponentField p = radial_lh_exponent(dom, 1.5, 2.5);
    m.push_back(sobolev_verify(dom, p, 0.0, compact_corpus(dom, 1)).max_ratio);
  }
  const double st = spread(m);
  o.pass = preserved && certified && st < 1.5;
  d << "extension p_-/p_+ preserved=" << (preserved ? "yes" : "no") << ", boundary log-Hoelder on 3B for tau=1,2 "
    << (certified ? "finite" : "infinite") << "; max ratio L=4,5,6 " << join(m) << " (spread " << num(st) << ")";
  o.detail = d.str();
  return o;
}

Outcome boundary_trace_check() {
  Outcome o;
  std::ostringstream d;
  std::vector<double> c;
  bool traced = true;
  for (int L : {5, 6, 7}) {
    GridDomain dom = make("unit-square", L);
    TraceResult tr = boundary_trace(radial_lh_exponent(dom, 1.5, 2.5), dom, 1.0);
    traced = traced && tr.untraced.empty();
    c.push_back(tr.report.constant);
  }
  bool finite = true;
  for (double v : c) finite = finite && std::isfinite(v);
  const double st = spread(c);
  o.pass = traced && finite && st < 2.0;
  d << "radial-LH trace constant L=5,6,7 " << join(c) << " (spread " << num(st) << ")";
  for (int L : {5, 6}) {
    GridDomain dom = make("unit-square", L);
    ExponentField p = smooth_exponent(dom);
    const double clh = check_LH0(p, dom).constant;
    const double ct = boundary_trace(p, dom, 1.0).report.constant;
    o.pass = o.pass && ct <= 2.0 * clh;
    d << "; smooth L=" << L << ": trace " << num(ct) << " vs 2 x LH0 " << num(2.0 * clh);
  }
  o.detail = d.str();
  return o;
}

}  // namespace

int main() {
  criterion(1, "Whitney exactness", 1.0, whitney_exactness);
  criterion(2, "tree-covering contract", 1.0, tree_contract);
  criterion(3, "Luxemburg oracles", 0.1, luxemburg_oracles);
  criterion(4, "constant-exponent Poincare number", 5.0, poincare_number);
  criterion(5, "decomposition identities", 60.0, decomposition_identities);
  criterion(6, "operator boundedness contrast", 120.0, operator_contrast);
  criterion(7, "counterexample blow-up power law", 300.0, blowup_power_law);
  criterion(8, "Sobolev via extension", 60.0, sobolev_extension);
  criterion(9, "boundary trace", 30.0, boundary_trace_check);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
