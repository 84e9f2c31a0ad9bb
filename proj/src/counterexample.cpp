#include "vexlab/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vexlab/report.hpp"

namespace vexlab {

namespace {

constexpr int kDim = 2;

double log_tol_norm(const CellField& f, const ExponentField& p, double h) {
  return luxemburg_norm(f, p, h, 1e-12).value;
}

}  // namespace

double CounterexampleConfig::radius(int k) const {
  if (!radii.empty()) {
    const int i = k - kmin;
    if (i < 0 || i >= static_cast<int>(radii.size())) throw CounterexampleError("no radius given for k = " + std::to_string(k));
    return radii[i];
  }
  return std::pow(4.0, -k);
}

double CounterexampleConfig::p_k(int k) const {
  if (constant) return p0;
  return p0 + 1.0 / std::sqrt(std::abs(std::log(radius(k))));
}

CounterexampleConfig CounterexampleConfig::defaults(const std::string& mode, int L) {
  CounterexampleConfig c;
  c.mode = mode;
  if (mode == "boundary") {
    c.domain = parse_domain_spec("rectangle:2x1", L);
  } else if (mode == "interior") {
    c.p0 = 1.2;  // p* needs p_+ < n
    c.domain = parse_domain_spec("rectangle:2x2", L);
  } else if (mode == "korn") {
    c.domain = parse_domain_spec("rectangle:2x2", L);
  } else {
    throw CounterexampleError("unknown counterexample mode '" + mode + "' (boundary, interior, korn)");
  }
  return c;
}

CounterexampleGeometry build_counterexample(const CounterexampleConfig& cfg) {
  if (cfg.mode != "boundary" && cfg.mode != "interior" && cfg.mode != "korn")
    throw CounterexampleError("unknown counterexample mode '" + cfg.mode + "'");
  if (!(cfg.p0 > 1.0)) throw CounterexampleError("p0 must exceed 1");
  if (cfg.domain.kind != "unit-square" && cfg.domain.kind != "rectangle")
    throw CounterexampleError("counterexample placement needs a unit-square or rectangle domain");
  CounterexampleGeometry g;
  g.cfg = cfg;
  g.dom = build_domain(cfg.domain);
  const double h = g.dom.h;
  const double W = cfg.domain.kind == "rectangle" ? cfg.domain.width : 1.0;
  const double H = cfg.domain.kind == "rectangle" ? cfg.domain.height : 1.0;
  const bool boundary = cfg.mode == "boundary";

  double prev_r = kInfinity;
  for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
    const double r = cfg.radius(k);
    if (!(r > 0.0 && r < 1.0) || !(r < prev_r))
      throw CounterexampleError("radii must lie in (0, 1) and decrease strictly");
    prev_r = r;
  }
  for (int k = cfg.kmin; k <= cfg.kmax; ++k) {
    const double r = cfg.radius(k);
    if (r < 2.0 * h - 1e-15) {
      std::ostringstream os;
      os << "k_max truncated to " << k - 1 << ": r_" << k << " = " << r << " is below two cells (h = " << h << ")";
      g.warnings.push_back(os.str());
      break;
    }
    const double R = 7.0 * r;
    BallPlacement b;
    b.k = k;
    b.r = r;
    b.p = cfg.p_k(k);
    double y, xlo, xhi;
    if (boundary) {
      // Side clearance 12 r keeps the side walls farther than the bottom edge
      // from every point of the discs around a and b, so d = y there.
      y = R;
      xlo = 12.0 * r;
      xhi = W - 12.0 * r;
      if (2.0 * R > H) xhi = -1.0;
    } else {
      y = cfg.mu + 7.0 * cfg.radius(cfg.kmin);
      xlo = cfg.mu + R;
      xhi = W - cfg.mu - R;
      if (y - R < cfg.mu || y + R > H - cfg.mu) xhi = -1.0;
    }
    bool placed = false;
    for (int m = 0; xlo + m * h <= xhi + 1e-12; ++m) {
      const double x = xlo + m * h;
      bool ok = true;
      for (const auto& o : g.balls)
        if (std::hypot(x - o.cx, y - o.cy) < R + 7.0 * o.r - 1e-12) {
          ok = false;
          break;
        }
      if (ok) {
        b.cx = x;
        b.cy = y;
        placed = true;
        break;
      }
    }
    if (!placed) {
      g.warnings.push_back("k_max truncated to " + std::to_string(k - 1) + ": no room for ball " + std::to_string(k));
      break;
    }
    if (boundary) {
      const double s = std::sqrt(7.0) / 4.0;
      b.ax = b.cx - 3.0 * r;
      b.ay = b.cy - 4.0 * r * s;
      b.bx = b.cx + 3.0 * r;
      b.by = b.ay;
    } else {
      b.ax = b.cx - 4.0 * r;
      b.ay = b.cy;
      b.bx = b.cx + 4.0 * r;
      b.by = b.cy;
    }
    g.balls.push_back(b);
  }

  // Cell-level assertions: each ball's cells lie in the domain and no cell is claimed twice.
  std::vector<int> claim(g.dom.size(), -1);
  for (std::size_t n = 0; n < g.balls.size(); ++n) {
    const auto& b = g.balls[n];
    const double R = 7.0 * b.r;
    const int i0 = static_cast<int>(std::floor((b.cx - R) / h)), i1 = static_cast<int>(std::ceil((b.cx + R) / h));
    const int j0 = static_cast<int>(std::floor((b.cy - R) / h)), j1 = static_cast<int>(std::ceil((b.cy + R) / h));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const double x = (i + 0.5) * h, y = (j + 0.5) * h;
        if (std::hypot(x - b.cx, y - b.cy) >= R) continue;
        const int c = g.dom.id(i, j);
        if (c < 0) throw CounterexampleError("ball " + std::to_string(b.k) + " leaves the domain");
        if (claim[c] >= 0) throw CounterexampleError("balls " + std::to_string(g.balls[claim[c]].k) + " and " +
                                                     std::to_string(b.k) + " overlap");
        claim[c] = static_cast<int>(n);
      }
  }
  g.p = build_counterexample_exponent(g);
  return g;
}

ExponentField build_counterexample_exponent(const CounterexampleGeometry& g) {
  const double p0 = g.cfg.p0;
  ExponentField p = ExponentField::Constant(g.dom.size(), p0);
  const double h = g.dom.h;
  for (const auto& b : g.balls) {
    for (const auto& [x0, y0] : {std::pair{b.ax, b.ay}, std::pair{b.bx, b.by}}) {
      const int i0 = static_cast<int>(std::floor((x0 - 2 * b.r) / h)), i1 = static_cast<int>(std::ceil((x0 + 2 * b.r) / h));
      const int j0 = static_cast<int>(std::floor((y0 - 2 * b.r) / h)), j1 = static_cast<int>(std::ceil((y0 + 2 * b.r) / h));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const int c = g.dom.id(i, j);
          if (c < 0) continue;
          const double rho = std::hypot(g.dom.cx(c) - x0, g.dom.cy(c) - y0);
          if (rho < b.r)
            p[c] = b.p;
          else if (rho < 2 * b.r)
            p[c] = ((rho - b.r) / b.r) * p0 + ((2 * b.r - rho) / b.r) * b.p;
        }
    }
  }
  return p;
}

namespace {

// Visits the cells within distance `reach` of (x0, y0).
template <class Fn>
void for_cells_near(const GridDomain& dom, double x0, double y0, double reach, Fn fn) {
  const double h = dom.h;
  const int i0 = static_cast<int>(std::floor((x0 - reach) / h)), i1 = static_cast<int>(std::ceil((x0 + reach) / h));
  const int j0 = static_cast<int>(std::floor((y0 - reach) / h)), j1 = static_cast<int>(std::ceil((y0 + reach) / h));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const int c = dom.id(i, j);
      if (c >= 0) fn(c, std::hypot(dom.cx(c) - x0, dom.cy(c) - y0));
    }
}

}  // namespace

std::vector<TestFunction> build_test_functions(const CounterexampleGeometry& g) {
  std::vector<TestFunction> out;
  for (const auto& b : g.balls) {
    CellField f = CellField::Zero(g.dom.size());
    const double r = b.r;
    for_cells_near(g.dom, b.ax, b.ay, 3 * r, [&](int c, double rho) {
      if (rho < 2 * r)
        f[c] = r;
      else if (rho < 3 * r)
        f[c] = 3 * r - rho;
    });
    for_cells_near(g.dom, b.bx, b.by, 3 * r, [&](int c, double rho) {
      if (rho < 2 * r)
        f[c] = -r;
      else if (rho < 3 * r)
        f[c] = rho - 3 * r;
    });
    out.push_back({"f" + std::to_string(b.k), std::move(f)});
  }
  return out;
}

std::vector<TestFunction> build_shell_functions(const CounterexampleGeometry& g) {
  std::vector<TestFunction> out;
  for (const auto& b : g.balls) {
    CellField f = CellField::Zero(g.dom.size());
    for_cells_near(g.dom, b.cx, b.cy, 7 * b.r, [&](int c, double rho) {
      if (rho >= 7 * b.r) return;
      const double ra = std::hypot(g.dom.cx(c) - b.ax, g.dom.cy(c) - b.ay);
      const double rb = std::hypot(g.dom.cx(c) - b.bx, g.dom.cy(c) - b.by);
      if (ra >= 2 * b.r && rb >= 2 * b.r) f[c] = 1.0;
    });
    out.push_back({"shell" + std::to_string(b.k), std::move(f)});
  }
  return out;
}

namespace {

void finish(BlowupReport& rep) {
  double lo = kInfinity, hi = 0.0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    auto& row = rep.rows[i];
    row.quotient = row.ratio / row.predicted;
    rep.band_ok = rep.band_ok && row.quotient >= kBandLo && row.quotient <= kBandHi;
    if (i > 0) rep.monotone = rep.monotone && row.ratio > rep.rows[i - 1].ratio;
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
  }
  rep.flatness = rep.rows.empty() ? 1.0 : hi / lo;
}

}  // namespace

BlowupReport blowup_sp(const CounterexampleGeometry& g, double alpha) {
  BlowupReport rep;
  rep.mode = g.cfg.mode;
  rep.alpha = alpha;
  rep.notes = g.warnings;
  const bool boundary = g.cfg.mode == "boundary";
  ExponentField q;
  if (boundary)
    q = sobolev_target(g.p, alpha, kDim);
  else
    q = sobolev_conjugate(g.p, kDim);
  const auto fk = build_test_functions(g);
  const double h = g.dom.h;
  for (std::size_t n = 0; n < g.balls.size(); ++n) {
    const auto& b = g.balls[n];
    BlowupRow row;
    row.k = b.k;
    row.r = b.r;
    row.p = b.p;
    row.lhs = log_tol_norm(fk[n].f, q, h);
    if (boundary)
      row.rhs = weighted_gradient_norm(g.dom, fk[n].f, g.p, alpha, 1e-12).value;
    else
      row.rhs = log_tol_norm(gradient(g.dom, fk[n].f).magnitude(), g.p, h);
    row.ratio = row.lhs / row.rhs;
    row.predicted = std::pow(b.r, kDim / b.p - kDim / g.cfg.p0);
    rep.rows.push_back(row);
  }
  finish(rep);
  return rep;
}

KornValue korn_ratio(const GridDomain& dom, const CellField& ux, const CellField& uy, const ExponentField& p) {
  const VectorField g1 = gradient(dom, ux), g2 = gradient(dom, uy);
  const CellField grad = (g1.x.square() + g1.y.square() + g2.x.square() + g2.y.square()).sqrt();
  const CellField e12 = 0.5 * (g1.y + g2.x);
  const CellField sym = (g1.x.square() + g2.y.square() + 2.0 * e12.square()).sqrt();
  KornValue v;
  v.grad_norm = log_tol_norm(grad, p, dom.h);
  v.sym_norm = log_tol_norm(sym, p, dom.h);
  if (v.sym_norm <= 1e-12 * v.grad_norm && v.grad_norm > 0.0) {
    v.unbounded = true;
    v.ratio = kInfinity;
  } else {
    v.ratio = v.grad_norm > 0.0 ? v.grad_norm / v.sym_norm : 0.0;
  }
  return v;
}

void korn_field(const CounterexampleGeometry& g, int ball, CellField& ux, CellField& uy) {
  const auto& b = g.balls[ball];
  ux = CellField::Zero(g.dom.size());
  uy = CellField::Zero(g.dom.size());
  const double r = b.r;
  for (const auto& [x0, y0, sign] : {std::tuple{b.ax, b.ay, 1.0}, std::tuple{b.bx, b.by, -1.0}}) {
    for_cells_near(g.dom, x0, y0, 3 * r, [&](int c, double rho) {
      if (rho >= 3 * r) return;
      const double phi = rho < 2 * r ? 1.0 : 3.0 - rho / r;
      ux[c] = -sign * phi * (g.dom.cy(c) - y0);
      uy[c] = sign * phi * (g.dom.cx(c) - x0);
    });
  }
}

BlowupReport korn_blowup(const CounterexampleGeometry& g) {
  if (g.cfg.mode == "boundary") throw CounterexampleError("korn_blowup needs interior placement");
  BlowupReport rep;
  rep.mode = "korn";
  rep.notes = g.warnings;
  double eps_res = 0.0, grad_err = 0.0;
  for (std::size_t n = 0; n < g.balls.size(); ++n) {
    const auto& b = g.balls[n];
    CellField ux, uy;
    korn_field(g, static_cast<int>(n), ux, uy);
    const KornValue v = korn_ratio(g.dom, ux, uy, g.p);
    const VectorField g1 = gradient(g.dom, ux), g2 = gradient(g.dom, uy);
    for_cells_near(g.dom, b.ax, b.ay, b.r, [&](int c, double rho) {
      if (rho >= b.r) return;
      const double e12 = 0.5 * (g1.y[c] + g2.x[c]);
      eps_res = std::max(eps_res, std::sqrt(g1.x[c] * g1.x[c] + g2.y[c] * g2.y[c] + 2 * e12 * e12));
      grad_err = std::max({grad_err, std::abs(g1.x[c]), std::abs(g1.y[c] + 1.0), std::abs(g2.x[c] - 1.0),
                           std::abs(g2.y[c])});
    });
    BlowupRow row;
    row.k = b.k;
    row.r = b.r;
    row.p = b.p;
    row.lhs = v.grad_norm;
    row.rhs = v.sym_norm;
    row.ratio = v.ratio;
    row.predicted = std::pow(b.r, kDim / b.p - kDim / g.cfg.p0);
    rep.rows.push_back(row);
  }
  finish(rep);
  rep.notes.push_back("rigid_residual=" + fmt(eps_res));
  rep.notes.push_back("gradient_error_on_A1=" + fmt(grad_err));
  rep.notes.push_back(
      "corollary: the divergence equation is not solvable on L^{p(.)} for this exponent (implied by the Korn "
      "blow-up; no solver is built)");
  return rep;
}

std::string BlowupReport::csv() const {
  CsvWriter w({"k", "r_k", "p_k", "lhs", "rhs", "ratio", "predicted", "quotient"});
  w.comment("mode=" + mode + " alpha=" + fmt(alpha) + " monotone=" + (monotone ? "yes" : "no") +
            " band_ok=" + (band_ok ? "yes" : "no") + " flatness=" + fmt(flatness));
  for (const auto& n : notes) w.comment(n);
  for (const auto& r : rows)
    w.row({std::to_string(r.k), fmt(r.r), fmt(r.p), fmt(r.lhs), fmt(r.rhs), fmt(r.ratio), fmt(r.predicted),
           fmt(r.quotient)});
  return w.str();
}

std::string BlowupReport::svg() const {
  SvgSeries measured{"ratio", {}, {}}, predicted{"r_k^(n/p_k - n/p0)", {}, {}};
  for (const auto& r : rows) {
    measured.x.push_back(1.0 / r.r);
    measured.y.push_back(r.ratio);
    predicted.x.push_back(1.0 / r.r);
    predicted.y.push_back(r.predicted);
  }
  return svg_plot(mode + " blow-up", "1/r_k", "ratio", {measured, predicted}, true, true);
}

}  // namespace vexlab
