#include "vexlab/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "vexlab/report.hpp"

namespace vexlab {

namespace {

constexpr int kDim = 2;

std::vector<char> region_mask(const GridDomain& dom, const Region& r) {
  std::vector<char> m(dom.size(), 0);
  for (int c : r.cells) m[c] = 1;
  return m;
}

void bbox(const GridDomain& dom, double& x0, double& y0, double& x1, double& y1) {
  x0 = y0 = 1e300;
  x1 = y1 = -1e300;
  for (int c = 0; c < dom.size(); ++c) {
    x0 = std::min(x0, dom.cx(c) - dom.h / 2);
    x1 = std::max(x1, dom.cx(c) + dom.h / 2);
    y0 = std::min(y0, dom.cy(c) - dom.h / 2);
    y1 = std::max(y1, dom.cy(c) + dom.h / 2);
  }
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

void reject_alpha_one(double alpha) {
  if (alpha == 1.0)
    throw InequalityError("alpha = 1 forces a constant exponent; the inequality is only tested for alpha < 1");
}

}  // namespace

void VerificationReport::add(const std::string& id, double lhs, double rhs) {
  RatioRow r{id, lhs, rhs, 0.0};
  if (lhs != 0.0) r.ratio = rhs > 0.0 ? lhs / rhs : kInfinity;
  if (argmax.empty() || r.ratio > max_ratio) {
    max_ratio = r.ratio;
    argmax = id;
  }
  rows.push_back(r);
}

std::string VerificationReport::certificate_value(const std::string& key) const {
  for (const auto& [k, v] : certificate)
    if (k == key) return v;
  return "";
}

std::string VerificationReport::csv() const {
  CsvWriter w({"id", "lhs", "rhs", "ratio"});
  w.comment("inequality=" + inequality + " family=" + family + " status=" + status);
  for (const auto& [k, v] : certificate) w.comment("certificate " + k + "=" + v);
  for (const auto& [L, m] : refinement) w.comment("refinement L=" + std::to_string(L) + " max_ratio=" + fmt(m));
  w.comment("max_ratio=" + fmt(max_ratio) + " argmax=" + argmax);
  for (const auto& r : rows) w.row({r.id, fmt(r.lhs), fmt(r.rhs), fmt(r.ratio)});
  return w.str();
}

VerificationReport classical_sp_verify(const GridDomain& dom, const Region& Q, double cube_measure, double p,
                                       double q, const TestFunction& f) {
  std::ostringstream err;
  if (p < 1.0) {
    err << "classical Sobolev-Poincare: p = " << p << " < 1";
  } else if (p < kDim) {
    const double ps = kDim * p / (kDim - p);
    if (q < p || q > ps) err << "branch 1 <= p < n needs p <= q <= p* = " << ps << " (p = " << p << ", q = " << q << ")";
  } else if (!std::isfinite(q)) {
    err << "branch p >= n needs a finite q";
  }
  if (!err.str().empty()) throw InequalityError(err.str());
  if (Q.empty()) throw InequalityError("classical Sobolev-Poincare: empty cube");

  VerificationReport r;
  r.inequality = "classical-sp";
  r.family = f.id;
  r.certify("branch", p < kDim ? "p<n" : "p>=n");
  const ExponentField pf = constant_exponent(dom, p), qf = constant_exponent(dom, q);
  const std::vector<char> mask = region_mask(dom, Q);
  const double fQ = average(f.f, Q);
  const double lhs = luxemburg_norm(CellField(f.f - fQ), qf, Q, dom.h, kLabTol).value;
  const VectorField g = gradient(dom, f.f, &mask);
  const double grad = luxemburg_norm(g.magnitude(), pf, Q, dom.h, kLabTol).value;
  const double scale = q * std::pow(cube_measure, 1.0 / kDim + 1.0 / q - 1.0 / p);
  r.add(f.id, lhs, scale * grad);
  return r;
}

VerificationReport local_sp_verify(const GridDomain& dom, const TreeCovering& tree, int node, const ExponentField& p,
                                   const ExponentField& q, const TestFunction& f) {
  const Region& U = tree.U[node];
  const double pm = p_minus(p, U), qp = p_plus(q, U);
  const bool b1 = pm < kDim && pm <= qp && qp <= kDim * pm / (kDim - pm);
  const bool b2 = pm >= kDim && std::isfinite(qp);
  if (!b1 && !b2) {
    std::ostringstream os;
    os << "oscillation hypothesis fails on node " << node << ": p_-(U) = " << pm << ", q_+(U) = " << qp
       << "; split U with partition_for_oscillation";
    throw InequalityError(os.str());
  }
  const Rect& Qr = tree.nodes[node].Q;
  const double side = static_cast<double>(Qr.x1 - Qr.x0) / kSub * dom.h;
  const double Qm = side * side;
  VerificationReport r;
  r.inequality = "local-sp";
  r.family = f.id;
  r.certify("branch", b1 ? "p_-<n" : "p_->=n");
  r.certify("p_minus", fmt(pm));
  r.certify("q_plus", fmt(qp));
  const std::vector<char> mask = region_mask(dom, U);
  const double fU = average(f.f, U);
  const double lhs = luxemburg_norm(CellField(f.f - fU), q, U, dom.h, kLabTol).value;
  const VectorField g = gradient(dom, f.f, &mask);
  const double grad = luxemburg_norm(g.magnitude(), p, U, dom.h, kLabTol).value;
  double scale = (1.0 + Qm) * (1.0 + Qm) * std::pow(Qm, 1.0 / kDim + 1.0 / qp - 1.0 / pm);
  if (b1) scale *= qp;
  r.add(f.id, lhs, scale * grad);
  return r;
}

OscillationPartition partition_for_oscillation(const GridDomain& dom, const TreeCovering& tree, int node,
                                               const ExponentField& p, double sigma, double alpha) {
  reject_alpha_one(alpha);
  if (!(sigma > 0.0) || sigma >= 1.0 - alpha)
    throw InequalityError("partition_for_oscillation: need 0 < sigma < 1 - alpha");
  const ExponentField inv = 1.0 / p;
  const ConditionReport cont = check_eps_continuity(inv, dom, sigma / kDim);
  if (!cont.pass)
    throw InequalityError("refine grid: 1/p jumps by sigma/n between neighbouring cells, so the continuity radius "
                          "is below the grid resolution");
  OscillationPartition out;
  out.delta = cont.constant * dom.h;
  const Rect& U = tree.nodes[node].U;
  const double s = static_cast<double>(U.x1 - U.x0) / kSub * dom.h;
  const double diam = std::sqrt(2.0) * s;
  const int m = std::max(1, static_cast<int>(std::ceil(diam / out.delta - 1e-12)));
  if (s / m < dom.h) throw InequalityError("refine grid: subcubes would be smaller than one cell");
  out.M = m * m;
  out.M_bound = std::max(1.0, 8.0 * s * s / (out.delta * out.delta));
  out.q_bound = kDim / (1.0 - sigma - alpha);
  const ExponentField q = sobolev_target(p, alpha, kDim);
  const double x0 = static_cast<double>(U.x0) / kSub * dom.h, y0 = static_cast<double>(U.y0) / kSub * dom.h;
  const double g = s / m;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Region G = box_region(dom, x0 + a * g, y0 + b * g, x0 + (a + 1) * g, y0 + (b + 1) * g);
      if (G.empty()) continue;
      const double pm = p_minus(p, G), qp = p_plus(q, G);
      const bool b1 = pm < kDim && pm <= qp && qp <= kDim * pm / (kDim - pm) && qp <= out.q_bound + 1e-12;
      const bool b2 = pm >= kDim && std::isfinite(qp);
      out.certified = out.certified && (b1 || b2);
      out.cubes.push_back(std::move(G));
      out.p_minus.push_back(pm);
      out.q_plus.push_back(qp);
    }
  return out;
}

VerificationReport global_sp_verify(const GridDomain& dom, const TreeCovering& tree, const ExponentField& p,
                                    const GlobalSpOptions& opt, const std::vector<TestFunction>& family) {
  double alpha = opt.alpha;
  reject_alpha_one(alpha);
  const std::string& v = opt.variant;
  if (v != "weighted" && v != "small-exponent" && v != "large-exponent" && v != "improved-poincare")
    throw InequalityError("unknown inequality variant '" + v +
                          "' (weighted, small-exponent, large-exponent, improved-poincare)");
  if (v == "improved-poincare") {
    if (alpha != 0.0) throw InequalityError("improved-poincare is the alpha = 0 case");
    alpha = 0.0;
  }
  const ExponentField q = sobolev_target(p, alpha, kDim);
  VerificationReport r;
  r.inequality = v;
  r.family = "corpus";
  const double pm = p.minCoeff(), pp = p.maxCoeff();
  bool ok = pm > 1.0;
  r.certify("p_minus", fmt(pm));
  r.certify("p_plus", fmt(pp));
  r.certify("alpha", fmt(alpha));

  const ExponentField inv = 1.0 / p;
  const double sigma = opt.sigma > 0.0 ? opt.sigma : 0.5 * (1.0 - alpha);
  if (v == "weighted" || v == "improved-poincare") {
    const bool s_ok = sigma < 1.0 - alpha;
    const ConditionReport c = check_eps_continuity(inv, dom, sigma / kDim);
    r.certify("sigma", fmt(sigma));
    r.certify("continuity", yes_no(s_ok && c.pass));
    r.certify("continuity_delta_cells", fmt(c.constant));
    ok = ok && s_ok && c.pass;
  } else if (v == "small-exponent") {
    const ConditionReport c = check_eps_continuity(inv, dom, (1.0 - alpha) / kDim);
    r.certify("p_plus_below_n", yes_no(pp < kDim));
    r.certify("continuity", yes_no(c.pass));
    ok = ok && pp < kDim && c.pass;
  } else {
    r.certify("p_minus_at_least_n", yes_no(pm >= kDim));
    ok = ok && pm >= kDim;
  }
  double tau = opt.tau;
  if (!(tau > 0.0)) tau = estimate_john_constants(tree, dom).tau_K;
  const ConditionReport blh = check_boundary_LH(p, dom, tau);
  r.certify("tau", fmt(tau));
  r.certify("boundary_LH_constant", fmt(blh.constant));
  r.certify("boundary_LH", blh.status);
  ok = ok && blh.pass;
  r.status = ok ? "pass" : "hypotheses unmet";

  for (const auto& f : family) {
    const double m = average(f.f);
    const double lhs = luxemburg_norm(CellField(f.f - m), q, dom.h, kLabTol).value;
    const double rhs = weighted_gradient_norm(dom, f.f, p, alpha, kLabTol).value;
    r.add(f.id, lhs, rhs);
  }
  return r;
}

VerificationReport sobolev_verify(const GridDomain& dom, const ExponentField& p, double alpha,
                                  const std::vector<TestFunction>& family, double sigma) {
  reject_alpha_one(alpha);
  for (const auto& f : family)
    for (int c = 0; c < dom.size(); ++c)
      if (f.f[c] != 0.0 && dom.is_boundary_cell(c)) {
        std::ostringstream os;
        os << "sobolev_verify: '" << f.id << "' is not compactly supported (nonzero at boundary cell ("
           << dom.ij[c][0] << "," << dom.ij[c][1] << "))";
        throw InequalityError(os.str());
      }
  VerificationReport r;
  r.inequality = "sobolev";
  r.family = "compact";
  if (!(sigma > 0.0)) sigma = 0.5 * (1.0 - alpha);
  const ConditionReport cont = check_eps_continuity(ExponentField(1.0 / p), dom, sigma / kDim);
  r.certify("sigma", fmt(sigma));
  r.certify("continuity", yes_no(sigma < 1.0 - alpha && cont.pass));
  bool ok = sigma < 1.0 - alpha && cont.pass && p.minCoeff() > 1.0;

  const ExtendedExponent ext = extend_exponent(p, dom);
  const bool preserved = ext.p.minCoeff() == p.minCoeff() && ext.p.maxCoeff() == p.maxCoeff();
  r.certify("extension_preserves_range", yes_no(preserved));
  r.certify("extension_cells", std::to_string(ext.dom.size()));
  ok = ok && preserved;
  for (double tau : {1.0, 2.0}) {
    const ConditionReport b = check_boundary_LH(ext.p, ext.dom, tau);
    r.certify("extension_boundary_LH_tau" + fmt(tau), fmt(b.constant));
    ok = ok && b.pass && std::isfinite(b.constant);
  }
  r.status = ok ? "pass" : "hypotheses unmet";

  const ExponentField qe = sobolev_target(ext.p, alpha, kDim);
  for (const auto& f : family) {
    CellField fe = CellField::Zero(ext.dom.size());
    for (int c = 0; c < dom.size(); ++c) fe[ext.omega_map[c]] = f.f[c];
    const double lhs = luxemburg_norm(fe, qe, ext.dom.h, kLabTol).value;
    const double rhs = luxemburg_norm(gradient(ext.dom, fe).magnitude(), ext.p, ext.dom.h, kLabTol).value;
    r.add(f.id, lhs, rhs);
  }
  return r;
}

std::vector<TestFunction> standard_corpus(const GridDomain& dom, uint64_t seed) {
  double x0, y0, x1, y1;
  bbox(dom, x0, y0, x1, y1);
  const double W = x1 - x0, H = y1 - y0, D = std::max(W, H);
  const int N = dom.size();
  auto field = [&](auto fn) {
    CellField f(N);
    for (int c = 0; c < N; ++c) f[c] = fn((dom.cx(c) - x0) / D, (dom.cy(c) - y0) / D);
    return f;
  };
  std::vector<TestFunction> out;
  out.push_back({"constant", CellField::Ones(N)});
  out.push_back({"x", field([](double x, double) { return x; })});
  out.push_back({"y", field([](double, double y) { return y; })});
  out.push_back({"x2", field([](double x, double) { return x * x; })});
  out.push_back({"xy", field([](double x, double y) { return x * y; })});
  out.push_back({"y2", field([](double, double y) { return y * y; })});
  out.push_back({"x2-y2", field([](double x, double y) { return x * x - y * y; })});
  const double tents[3][3] = {{0.5, 0.5, 0.3}, {0.25, 0.3, 0.2}, {0.7, 0.6, 0.25}};
  for (int k = 0; k < 3; ++k) {
    const double cx = tents[k][0] * W / D, cy = tents[k][1] * H / D, rr = tents[k][2] * std::min(W, H) / D;
    out.push_back({"tent-" + std::to_string(k),
                   field([&](double x, double y) { return std::max(0.0, 1.0 - std::hypot(x - cx, y - cy) / rr); })});
  }
  std::mt19937_64 rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < 10; ++k) {
    double a[4], kx[4], ky[4], ph[4];
    for (int m = 0; m < 4; ++m) {
      a[m] = 2.0 * uniform01(rng) - 1.0;
      kx[m] = std::floor(3.0 * uniform01(rng));
      ky[m] = std::floor(3.0 * uniform01(rng));
      ph[m] = two_pi * uniform01(rng);
    }
    out.push_back({"smooth-" + std::to_string(k), field([&](double x, double y) {
                     double v = 0.0;
                     for (int m = 0; m < 4; ++m) v += a[m] * std::cos(two_pi * (kx[m] * x + ky[m] * y) + ph[m]);
                     return v;
                   })});
  }
  return out;
}

std::vector<TestFunction> compact_corpus(const GridDomain& dom, uint64_t seed) {
  double x0, y0, x1, y1;
  bbox(dom, x0, y0, x1, y1);
  const double D = std::max(x1 - x0, y1 - y0);
  const int N = dom.size();
  auto bump = [&](double cx, double cy, double rho) {
    CellField f = CellField::Zero(N);
    for (int c = 0; c < N; ++c) {
      const double t = (std::pow(dom.cx(c) - cx, 2) + std::pow(dom.cy(c) - cy, 2)) / (rho * rho);
      if (t < 1.0) f[c] = (1.0 - t) * (1.0 - t);
    }
    return f;
  };
  std::vector<TestFunction> out;
  out.push_back({"zero", CellField::Zero(N)});
  int deep = 0;
  for (int c = 1; c < N; ++c)
    if (dom.d[c] > dom.d[deep]) deep = c;
  out.push_back({"bump-deep", bump(dom.cx(deep), dom.cy(deep), 0.5 * dom.d[deep])});
  std::mt19937_64 rng(seed);
  const double margin = std::max(3.0 * dom.h, 0.05 * D);
  int accepted = 0;
  for (int tries = 0; tries < 10000 && accepted < 10; ++tries) {
    const double cx = x0 + (x1 - x0) * uniform01(rng), cy = y0 + (y1 - y0) * uniform01(rng);
    const double rho = (0.05 + 0.2 * uniform01(rng)) * D;
    const int c = dom.id(static_cast<int>(std::floor(cx / dom.h)), static_cast<int>(std::floor(cy / dom.h)));
    if (c < 0 || dom.d[c] < rho + margin) continue;
    out.push_back({"bump-" + std::to_string(accepted), bump(cx, cy, rho)});
    ++accepted;
  }
  // The support test is exact: drop any member that still reaches a boundary cell.
  std::erase_if(out, [&](const TestFunction& f) {
    for (int c = 0; c < N; ++c)
      if (f.f[c] != 0.0 && dom.is_boundary_cell(c)) return true;
    return false;
  });
  return out;
}

std::string refinement_svg(const std::string& title, const std::vector<std::pair<int, double>>& rows) {
  SvgSeries s{"max ratio", {}, {}};
  for (const auto& [L, m] : rows) {
    s.x.push_back(L);
    s.y.push_back(m);
  }
  return svg_plot(title, "L", "max ratio", {s}, false, true);
}

}  // namespace vexlab
