#include "vexlab/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vexlab {

double ConditionReport::value(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw ExponentError("report '" + name + "' has no value '" + key + "'");
}

void ConditionReport::set(const std::string& key, double v) {
  for (auto& kv : values)
    if (kv.first == key) {
      kv.second = v;
      return;
    }
  values.emplace_back(key, v);
}

// ============================================================================
// Quadtree over cells
// ============================================================================

CellQuadtree::CellQuadtree(const GridDomain& dom, const CellField& v) : dom_(dom), v_(v) {
  int M = 1;
  while (M < std::max(dom.nx, dom.ny)) M *= 2;
  Level base;
  base.n = M;
  base.mn.assign(std::size_t(M) * M, kInfinity);
  base.mx.assign(std::size_t(M) * M, -kInfinity);
  base.cnt.assign(std::size_t(M) * M, 0);
  for (int c = 0; c < dom.size(); ++c) {
    const std::size_t k = std::size_t(dom.ij[c][1]) * M + dom.ij[c][0];
    base.mn[k] = base.mx[k] = v[c];
    base.cnt[k] = 1;
  }
  lv_.push_back(std::move(base));
  while (lv_.back().n > 1) {
    const Level& f = lv_.back();
    Level g;
    g.n = f.n / 2;
    g.mn.assign(std::size_t(g.n) * g.n, kInfinity);
    g.mx.assign(std::size_t(g.n) * g.n, -kInfinity);
    g.cnt.assign(std::size_t(g.n) * g.n, 0);
    for (int b = 0; b < g.n; ++b)
      for (int a = 0; a < g.n; ++a) {
        const std::size_t k = std::size_t(b) * g.n + a;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t q = std::size_t(2 * b + dy) * f.n + 2 * a + dx;
            g.mn[k] = std::min(g.mn[k], f.mn[q]);
            g.mx[k] = std::max(g.mx[k], f.mx[q]);
            g.cnt[k] += f.cnt[q];
          }
      }
    lv_.push_back(std::move(g));
  }
}

namespace {

struct Box {
  int64_t lb, ub;  // squared distance bounds from the query cell to centres in the box
};

Box box_bounds(int ci, int cj, int i0, int j0, int s) {
  const int i1 = i0 + s - 1, j1 = j0 + s - 1;
  const int64_t dx = std::max({0, i0 - ci, ci - i1}), dy = std::max({0, j0 - cj, cj - j1});
  const int64_t ux = std::max(std::abs(ci - i0), std::abs(ci - i1)), uy = std::max(std::abs(cj - j0), std::abs(cj - j1));
  return Box{dx * dx + dy * dy, ux * ux + uy * uy};
}

}  // namespace

void CellQuadtree::disc_minmax(int ci, int cj, double r2, double& mn, double& mx) const {
  struct Item {
    int k, a, b;
  };
  std::vector<Item> stack{{static_cast<int>(lv_.size()) - 1, 0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Level& l = lv_[it.k];
    const std::size_t idx = std::size_t(it.b) * l.n + it.a;
    if (l.cnt[idx] == 0) continue;
    if (l.mn[idx] >= mn && l.mx[idx] <= mx) continue;
    const int s = 1 << it.k;
    const Box bb = box_bounds(ci, cj, it.a * s, it.b * s, s);
    if (double(bb.lb) >= r2) continue;
    if (double(bb.ub) < r2) {
      mn = std::min(mn, l.mn[idx]);
      mx = std::max(mx, l.mx[idx]);
      continue;
    }
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) stack.push_back({it.k - 1, 2 * it.a + dx, 2 * it.b + dy});
  }
}

int64_t CellQuadtree::disc_count(int ci, int cj, double r2) const {
  struct Item {
    int k, a, b;
  };
  int64_t total = 0;
  std::vector<Item> stack{{static_cast<int>(lv_.size()) - 1, 0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Level& l = lv_[it.k];
    const std::size_t idx = std::size_t(it.b) * l.n + it.a;
    if (l.cnt[idx] == 0) continue;
    const int s = 1 << it.k;
    const Box bb = box_bounds(ci, cj, it.a * s, it.b * s, s);
    if (double(bb.lb) >= r2) continue;
    if (double(bb.ub) < r2) {
      total += l.cnt[idx];
      continue;
    }
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) stack.push_back({it.k - 1, 2 * it.a + dx, 2 * it.b + dy});
  }
  return total;
}

int64_t CellQuadtree::nearest_violation(int ci, int cj, double v0, double eps, int64_t limit2, int& y) const {
  int64_t best = limit2;
  y = -1;
  const double hi = v0 + eps, lo = v0 - eps;
  struct Item {
    int k, a, b;
  };
  std::vector<Item> stack{{static_cast<int>(lv_.size()) - 1, 0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Level& l = lv_[it.k];
    const std::size_t idx = std::size_t(it.b) * l.n + it.a;
    if (l.cnt[idx] == 0 || (l.mx[idx] < hi && l.mn[idx] > lo)) continue;
    const int s = 1 << it.k;
    const Box bb = box_bounds(ci, cj, it.a * s, it.b * s, s);
    if (bb.lb >= best) continue;
    if (it.k == 0) {
      best = bb.lb;
      y = dom_.id(it.a, it.b);
      continue;
    }
    // push the farthest child first so the nearest is explored first
    Item ch[4];
    int64_t key[4];
    int n = 0;
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        ch[n] = {it.k - 1, 2 * it.a + dx, 2 * it.b + dy};
        key[n] = box_bounds(ci, cj, ch[n].a * (s / 2), ch[n].b * (s / 2), s / 2).lb;
        ++n;
      }
    int order[4] = {0, 1, 2, 3};
    std::sort(order, order + 4, [&](int u, int v) { return key[u] > key[v]; });
    for (int o : order) stack.push_back(ch[o]);
  }
  return best;
}

// ============================================================================
// Basic quantities
// ============================================================================

double p_minus(const ExponentField& p, const Region& r) {
  double m = kInfinity;
  for (int c : r.cells) m = std::min(m, p[c]);
  return m;
}

double p_plus(const ExponentField& p, const Region& r) {
  double m = -kInfinity;
  for (int c : r.cells) m = std::max(m, p[c]);
  return m;
}

double harmonic_mean(const ExponentField& p, const Region& r) {
  KahanSum s, w;
  for (std::size_t k = 0; k < r.size(); ++k) {
    s.add(r.w[k] / p[r.cells[k]]);
    w.add(r.w[k]);
  }
  return w.value() / s.value();
}

double ball_radius2(const GridDomain& dom, int cell, double tau) {
  const double r = tau * dom.d[cell] / dom.h;
  return r * r;
}

namespace {

double domain_diameter_cells(const GridDomain& dom) {
  int i0 = dom.nx, i1 = 0, j0 = dom.ny, j1 = 0;
  for (const auto& ij : dom.ij) {
    i0 = std::min(i0, ij[0]);
    i1 = std::max(i1, ij[0]);
    j0 = std::min(j0, ij[1]);
    j1 = std::max(j1, ij[1]);
  }
  return std::hypot(double(i1 - i0), double(j1 - j0));
}

std::vector<int> cells_by_distance(const GridDomain& dom) {
  std::vector<int> order(dom.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dom.d[a] < dom.d[b]; });
  return order;
}

// Domain cells of B_{x,tau}, by direct scan.
std::vector<int> ball_cells(const GridDomain& dom, int x, double tau) {
  const double r2 = ball_radius2(dom, x, tau);
  const int R = static_cast<int>(std::ceil(std::sqrt(r2)));
  const int ci = dom.ij[x][0], cj = dom.ij[x][1];
  std::vector<int> out;
  for (int j = cj - R; j <= cj + R; ++j)
    for (int i = ci - R; i <= ci + R; ++i) {
      const int c = dom.id(i, j);
      if (c < 0) continue;
      const double d2 = double(i - ci) * (i - ci) + double(j - cj) * (j - cj);
      if (d2 < r2) out.push_back(c);
    }
  return out;
}

}  // namespace

// ============================================================================
// Boundary log-Hoelder condition
// ============================================================================

double boundary_LH_term(const ExponentField& p, const GridDomain& dom, double tau, int cell) {
  const double td = tau * dom.d[cell];
  if (td > 0.5) return 0.0;
  double mn = p[cell], mx = p[cell];
  for (int c : ball_cells(dom, cell, tau)) {
    mn = std::min(mn, p[c]);
    mx = std::max(mx, p[c]);
  }
  return (mx - mn) * -std::log(td);
}

ConditionReport check_boundary_LH(const ExponentField& p, const GridDomain& dom, double tau, double threshold) {
  if (!(tau >= 1.0)) throw ExponentError("check_boundary_LH: tau must be >= 1");
  ConditionReport r;
  r.name = "boundary_LH";
  r.threshold = threshold;
  r.set("tau", tau);
  const CellQuadtree qt(dom, p);
  const double osc_all = p.maxCoeff() - p.minCoeff();
  int qualifying = 0;
  for (int x : cells_by_distance(dom)) {
    const double td = tau * dom.d[x];
    if (td > 0.5) break;
    ++qualifying;
    const double lg = -std::log(td);
    if (osc_all * lg <= r.constant) break;
    double mn = p[x], mx = p[x];
    qt.disc_minmax(dom.ij[x][0], dom.ij[x][1], ball_radius2(dom, x, tau), mn, mx);
    const double v = (mx - mn) * lg;
    if (v > r.constant) {
      r.constant = v;
      r.witness = x;
    }
  }
  if (qualifying == 0) {
    r.status = "vacuous";
    r.constant = 0.0;
    return r;
  }
  r.pass = r.constant <= threshold;
  r.status = r.pass ? "pass" : "fail";
  return r;
}

ConditionReport check_LH_equiv(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree, double tau) {
  ConditionReport r;
  r.name = "LH_equivalent_forms";
  r.set("tau", tau);
  const CellQuadtree qt(dom, p);
  const double osc_all = p.maxCoeff() - p.minCoeff();
  const double area = dom.h * dom.h;
  double ball = 0.0;
  int wb = -1;
  for (int x : cells_by_distance(dom)) {
    // B_{x,tau} contains every centre closer than d(x), all of them domain cells
    const double R = dom.d[x] / dom.h - std::sqrt(0.5);
    const double count_lb = std::max(1.0, R > 0 ? M_PI * R * R : 1.0);
    const double meas_lb = count_lb * area;
    const double bound = meas_lb < 1.0 ? std::exp(-osc_all * std::log(meas_lb)) : 1.0;
    if (bound <= ball) break;
    const double r2 = ball_radius2(dom, x, tau);
    double mn = p[x], mx = p[x];
    qt.disc_minmax(dom.ij[x][0], dom.ij[x][1], r2, mn, mx);
    const double meas = double(qt.disc_count(dom.ij[x][0], dom.ij[x][1], r2)) * area;
    const double v = std::exp(-(mx - mn) * std::log(meas));
    if (v > ball) {
      ball = v;
      wb = x;
    }
  }
  std::vector<double> mn, mx;
  shadow_minmax(tree, p, mn, mx);
  double tf = 0.0;
  int wt = -1;
  for (int t = 0; t < tree.size(); ++t) {
    const double v = std::exp(-(mx[t] - mn[t]) * std::log(tree.shadow_measure[t]));
    if (v > tf) {
      tf = v;
      wt = t;
    }
  }
  r.constant = std::max(ball, tf);
  r.witness = wb;
  r.witness2 = wt;
  r.set("ball_form", ball);
  r.set("tree_form", tf);
  return r;
}

ConditionReport check_eps_continuity(const ExponentField& p, const GridDomain& dom, double eps) {
  if (!(eps > 0.0)) throw ExponentError("check_eps_continuity: eps must be positive");
  ConditionReport r;
  r.name = "eps_continuity";
  r.set("eps", eps);
  const CellQuadtree qt(dom, p);
  const double diam = domain_diameter_cells(dom);
  const int64_t none = static_cast<int64_t>(std::ceil(diam * diam)) + 1;
  int64_t best = none;
  for (int x = 0; x < dom.size(); ++x) {
    int y = -1;
    const int64_t d2 = qt.nearest_violation(dom.ij[x][0], dom.ij[x][1], p[x], eps, best, y);
    if (y >= 0 && d2 < best) {
      best = d2;
      r.witness = x;
      r.witness2 = y;
    }
    if (best == 1) break;
  }
  r.constant = best == none ? diam : std::sqrt(double(best));
  r.set("delta_cells", r.constant);
  r.pass = best > 1;
  r.status = r.pass ? "pass" : "fail";
  return r;
}

// ============================================================================
// Dual and Sobolev exponents
// ============================================================================

ExponentField dual_exponent(const ExponentField& p) {
  if (p.size() == 0) return p;
  if (p.minCoeff() <= 1.0) throw ExponentError("dual exponent unbounded: p(x) = 1 somewhere");
  return p / (p - 1.0);
}

ExponentField sobolev_target(const ExponentField& p, double alpha, int n) {
  const double pp = p.maxCoeff();
  if (p.minCoeff() < 1.0) throw ExponentError("sobolev_target: exponent below 1");
  if (pp < n) {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw ExponentError("alpha must lie in [0, 1) when p_+ < n (got " + std::to_string(alpha) + ")");
  } else if (!(alpha >= 0.0 && alpha < double(n) / pp)) {
    std::ostringstream os;
    os << "alpha must lie in [0, n/p_+) = [0, " << double(n) / pp << ") when p_+ >= n (got " << alpha << ")";
    throw ExponentError(os.str());
  }
  if (alpha == 0.0) return p;
  return 1.0 / (1.0 / p - alpha / n);
}

ExponentField sobolev_conjugate(const ExponentField& p, int n) {
  if (p.maxCoeff() >= n) throw ExponentError("sobolev_conjugate: needs p_+ < n");
  return n * p / (n - p);
}

// ============================================================================
// K0-type conditions
// ============================================================================

ConditionReport check_K0(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree, double tau,
                         double alpha, bool ball_form) {
  if (p.minCoeff() <= 1.0) throw ExponentError("check_K0: needs p_- > 1");
  const int n = 2;
  const ExponentField pd = dual_exponent(p);
  const ExponentField q = sobolev_target(p, alpha, n);
  const ExponentField qd = dual_exponent(q);
  const double h = dom.h;
  ConditionReport r;
  r.name = "K0";
  r.set("tau", tau);
  r.set("alpha", alpha);
  double ball = 0.0;
  if (ball_form) {
    for (int x = 0; x < dom.size(); ++x) {
      const Region B = cells_region(ball_cells(dom, x, tau));
      const double meas = B.measure(h);
      const double v = indicator_norm(B, p, h) * indicator_norm(B, pd, h) / meas;
      if (v > ball) {
        ball = v;
        r.witness = x;
      }
    }
    r.set("ball_form", ball);
  }
  double tf = 0.0, off1 = 0.0, off2 = 0.0;
  for (int t = 0; t < tree.size(); ++t) {
    const Region& U = tree.U[t];
    const double meas = U.measure(h);
    const double np = indicator_norm(U, p, h), npd = indicator_norm(U, pd, h);
    const double v = np * npd / meas;
    if (v > tf) {
      tf = v;
      r.witness2 = t;
    }
    const double nq = alpha == 0.0 ? np : indicator_norm(U, q, h);
    const double nqd = alpha == 0.0 ? npd : indicator_norm(U, qd, h);
    off1 = std::max(off1, std::pow(meas, -1.0 + alpha / n) * nq * npd);
    off2 = std::max(off2, std::pow(meas, -1.0 - alpha / n) * nqd * np);
  }
  r.set("tree_form", tf);
  r.set("offdiag_q_pdual", off1);
  r.set("offdiag_qdual_p", off2);
  r.constant = std::max(ball, tf);
  return r;
}

ConditionReport harmonic_mean_norm_check(const ExponentField& p, const GridDomain& dom, const TreeCovering& tree) {
  if (p.minCoeff() <= 1.0) throw ExponentError("harmonic_mean_norm_check: needs p_- > 1");
  ConditionReport r;
  r.name = "harmonic_mean_norm";
  double lo = kInfinity, hi = 0.0;
  bool ok = true;
  for (int t = 0; t < tree.size(); ++t) {
    const Region& U = tree.U[t];
    const double pu = harmonic_mean(p, U);
    if (pu < p_minus(p, U) * (1 - 1e-12) || pu > p_plus(p, U) * (1 + 1e-12)) {
      ok = false;
      r.warnings.push_back("harmonic mean outside [p_-, p_+] at node " + std::to_string(t));
    }
    const double meas = U.measure(dom.h);
    const double power = std::pow(meas, 1.0 / pu);
    const double nrm = indicator_norm(U, p, dom.h);
    const double ratio = nrm / power;
    if (ratio > hi) {
      hi = ratio;
      r.witness = t;
    }
    lo = std::min(lo, ratio);
    if (power > 2.0 * nrm) ok = false;
  }
  r.constant = hi;
  r.set("max_ratio", hi);
  r.set("min_ratio", lo);
  r.pass = ok;
  r.status = ok ? "pass" : "fail";
  return r;
}

ConditionReport check_LH0(const ExponentField& p, const GridDomain& dom) {
  ConditionReport r;
  r.name = "LH0";
  const double lim = 0.5 / dom.h;  // |x - y| < 1/2 in cell units
  const int R = static_cast<int>(std::ceil(lim));
  const int64_t lim2 = static_cast<int64_t>(std::ceil(lim * lim));
  std::vector<double> lg(lim2 + 1, 0.0);
  for (int64_t k = 1; k <= lim2; ++k) lg[k] = -(0.5 * std::log(double(k)) + std::log(dom.h));
  for (int x = 0; x < dom.size(); ++x) {
    const int ci = dom.ij[x][0], cj = dom.ij[x][1];
    for (int j = cj; j <= std::min(dom.ny - 1, cj + R); ++j)
      for (int i = std::max(0, ci - R); i <= std::min(dom.nx - 1, ci + R); ++i) {
        if (j == cj && i <= ci) continue;
        const int y = dom.id(i, j);
        if (y < 0) continue;
        const int64_t d2 = int64_t(i - ci) * (i - ci) + int64_t(j - cj) * (j - cj);
        if (double(d2) >= lim * lim) continue;
        const double v = std::abs(p[x] - p[y]) * lg[d2];
        if (v > r.constant) {
          r.constant = v;
          r.witness = x;
          r.witness2 = y;
        }
      }
  }
  return r;
}

// ============================================================================
// Extension to 3B
// ============================================================================

namespace {

// Smooth transition: 1 for u <= 0, 0 for u >= 1.
double smooth_step(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - u)), b = std::exp(-1.0 / u);
  return a / (a + b);
}

}  // namespace

void enclosing_ball(const GridDomain& dom, double& cx, double& cy, double& R) {
  int i0 = dom.nx, i1 = 0, j0 = dom.ny, j1 = 0;
  for (const auto& ij : dom.ij) {
    i0 = std::min(i0, ij[0]);
    i1 = std::max(i1, ij[0] + 1);
    j0 = std::min(j0, ij[1]);
    j1 = std::max(j1, ij[1] + 1);
  }
  cx = 0.5 * (i0 + i1) * dom.h;
  cy = 0.5 * (j0 + j1) * dom.h;
  R = 0.5 * std::hypot(double(i1 - i0), double(j1 - j0)) * dom.h;
}

ExtendedExponent extend_exponent(const ExponentField& p, const GridDomain& dom) {
  double cx, cy, R;
  enclosing_ball(dom, cx, cy, R);
  return extend_exponent(p, dom, cx, cy, R);
}

ExtendedExponent extend_exponent(const ExponentField& p, const GridDomain& dom, double cx, double cy, double R) {
  const double h = dom.h;
  for (const auto& ij : dom.ij)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double x = (ij[0] + dx) * h - cx, y = (ij[1] + dy) * h - cy;
        if (x * x + y * y > R * R * (1 + 1e-12)) throw ExponentError("extend_exponent: closure of the domain is not inside the ball");
      }
  const double pm = p.minCoeff();
  ExtendedExponent out;
  out.cx = cx;
  out.cy = cy;
  out.R = R;

  // grid of 3B, aligned with the domain lattice (global cell = local + offset)
  const int ox = static_cast<int>(std::floor((cx - 3 * R) / h)), oy = static_cast<int>(std::floor((cy - 3 * R) / h));
  const int nx = static_cast<int>(std::ceil((cx + 3 * R) / h)) - ox, ny = static_cast<int>(std::ceil((cy + 3 * R) / h)) - oy;
  std::vector<uint8_t> mask(std::size_t(nx) * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = (i + ox + 0.5) * h - cx, y = (j + oy + 0.5) * h - cy;
      mask[std::size_t(j) * nx + i] = x * x + y * y <= 9 * R * R;
    }
  for (const auto& ij : dom.ij) mask[std::size_t(ij[1] - oy) * nx + (ij[0] - ox)] = 1;
  out.dom = domain_from_mask(dom.L, nx, ny, mask);
  const GridDomain& E = out.dom;
  out.omega_map.resize(dom.size());
  std::vector<int> inside(E.size(), -1);
  for (int c = 0; c < dom.size(); ++c) {
    const int e = E.id(dom.ij[c][0] - ox, dom.ij[c][1] - oy);
    out.omega_map[c] = e;
    inside[e] = c;
  }

  // Whitney cubes of the complement of the closed domain, on a box wide enough
  // that its outer edge never limits cubes meeting 3B
  const int bx = static_cast<int>(std::floor((cx - 7 * R) / h)), by = static_cast<int>(std::floor((cy - 7 * R) / h));
  const int bnx = static_cast<int>(std::ceil((cx + 7 * R) / h)) - bx, bny = static_cast<int>(std::ceil((cy + 7 * R) / h)) - by;
  std::vector<uint8_t> cmask(std::size_t(bnx) * bny, 1);
  for (const auto& ij : dom.ij) cmask[std::size_t(ij[1] - by) * bnx + (ij[0] - bx)] = 0;
  const GridDomain C = domain_from_mask(dom.L, bnx, bny, cmask, false);
  const WhitneyResult W = whitney_decompose(C);

  std::vector<int> bcells;
  for (int c = 0; c < dom.size(); ++c)
    if (dom.is_boundary_cell(c)) bcells.push_back(c);
  auto nearest_boundary_value = [&](double x, double y) {
    double best = kInfinity, val = 0.0;
    for (int c : bcells) {
      const double dx = dom.cx(c) - x, dy = dom.cy(c) - y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        val = p[c];
      }
    }
    return val;
  };

  std::vector<double> num(E.size(), 0.0), den(E.size(), 0.0);
  for (const auto& q : W.cubes) {
    const int s = 1 << (C.L - q.level);
    // cube in global cell coordinates
    const double gx0 = double(q.ax) * s + bx, gy0 = double(q.ay) * s + by;
    const double e = s / 16.0;  // 9/8 expansion: s/16 on each side
    const int li0 = static_cast<int>(std::floor(gx0 - e)) - ox, li1 = static_cast<int>(std::ceil(gx0 + s + e)) - ox;
    const int lj0 = static_cast<int>(std::floor(gy0 - e)) - oy, lj1 = static_cast<int>(std::ceil(gy0 + s + e)) - oy;
    if (li1 < 0 || lj1 < 0 || li0 >= nx || lj0 >= ny) continue;
    ++out.exterior_cubes;
    // value of the closure extension at the boundary point nearest to the cube
    const double fk = nearest_boundary_value((gx0 + 0.5 * s) * h, (gy0 + 0.5 * s) * h) - pm;
    for (int j = std::max(0, lj0); j < std::min(ny, lj1 + 1); ++j)
      for (int i = std::max(0, li0); i < std::min(nx, li1 + 1); ++i) {
        const int c = E.id(i, j);
        if (c < 0 || inside[c] >= 0) continue;
        const double x = i + ox + 0.5, y = j + oy + 0.5;
        const double ux = std::max(0.0, std::max(gx0 - x, x - (gx0 + s))) / e;
        const double uy = std::max(0.0, std::max(gy0 - y, y - (gy0 + s))) / e;
        const double w = smooth_step(ux) * smooth_step(uy);
        if (w <= 0.0) continue;
        num[c] += w * fk;
        den[c] += w;
      }
  }
  out.p = ExponentField(E.size());
  for (int c = 0; c < E.size(); ++c) {
    if (inside[c] >= 0) {
      out.p[c] = p[inside[c]];
      continue;
    }
    double f;
    if (den[c] > 0.0) {
      f = num[c] / den[c];
    } else {
      f = nearest_boundary_value(E.cx(c) + ox * h, E.cy(c) + oy * h) - pm;
      ++out.closure_cells;
    }
    const double rr = std::hypot(E.cx(c) + ox * h - cx, E.cy(c) + oy * h - cy);
    out.p[c] = f * smooth_step((rr - 2 * R) / R) + pm;
  }
  return out;
}

// ============================================================================
// Boundary trace
// ============================================================================

TraceResult boundary_trace(const ExponentField& p, const GridDomain& dom, double tau) {
  TraceResult tr;
  tr.report.name = "boundary_trace";
  tr.report.set("tau", tau);
  const double h = dom.h;
  for (int c = 0; c < dom.size(); ++c) {
    if (!dom.is_boundary_cell(c)) continue;
    // steepest ascent of d from the boundary cell: the chain x_0, x_1, ...
    std::vector<int> chain{c};
    int cur = c;
    for (int step = 0; step < 4 * (dom.nx + dom.ny); ++step) {
      int nxt = -1;
      double best = dom.d[cur];
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int y = dom.id(dom.ij[cur][0] + di, dom.ij[cur][1] + dj);
          if (y >= 0 && dom.d[y] > best) {
            best = dom.d[y];
            nxt = y;
          }
        }
      if (nxt < 0) break;
      chain.push_back(nxt);
      cur = nxt;
    }
    // nontangential parameter of the chain relative to x_0
    for (int y : chain) {
      const double dist = std::hypot(dom.cx(y) - dom.cx(c), dom.cy(y) - dom.cy(c)) + 0.5 * h;
      tr.lambda = std::max(tr.lambda, dist / dom.d[y]);
    }
    // liminf toward the boundary over the chain cells within 2 cells of it
    double v = kInfinity;
    for (int y : chain)
      if (dom.d[y] <= 2.0 * h) v = std::min(v, p[y]);
    if (v == kInfinity) {
      tr.untraced.push_back(c);
      continue;
    }
    tr.cells.push_back(c);
    tr.value.push_back(v);
  }
  if (!(tau > 2 * tr.lambda))
    tr.report.warnings.push_back("tau <= 2 lambda for the measured chain parameter lambda = " +
                                 std::to_string(tr.lambda));
  const std::size_t nb = tr.cells.size();
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = a + 1; b < nb; ++b) {
      const int x = tr.cells[a], y = tr.cells[b];
      const double dist = std::hypot(dom.cx(x) - dom.cx(y), dom.cy(x) - dom.cy(y));
      if (dist >= 0.5) continue;
      const double v = std::abs(tr.value[a] - tr.value[b]) * -std::log(dist);
      if (v > tr.report.constant) {
        tr.report.constant = v;
        tr.report.witness = x;
        tr.report.witness2 = y;
      }
    }
  tr.report.set("lambda", tr.lambda);
  tr.report.set("untraced", double(tr.untraced.size()));
  tr.report.pass = tr.untraced.empty();
  tr.report.status = tr.report.pass ? "pass" : "fail";
  return tr;
}

// ============================================================================
// Generators
// ============================================================================

namespace {

double mid_x(const GridDomain& dom) {
  int i0 = dom.nx, i1 = 0;
  for (const auto& ij : dom.ij) {
    i0 = std::min(i0, ij[0]);
    i1 = std::max(i1, ij[0] + 1);
  }
  return 0.5 * (i0 + i1) * dom.h;
}

}  // namespace

ExponentField constant_exponent(const GridDomain& dom, double value) {
  if (value < 1.0) throw ExponentError("exponent values must be >= 1");
  return ExponentField::Constant(dom.size(), value);
}

ExponentField step_exponent(const GridDomain& dom, double value, double jump) {
  if (value < 1.0 || value + jump < 1.0) throw ExponentError("exponent values must be >= 1");
  const double m = mid_x(dom);
  ExponentField p(dom.size());
  for (int c = 0; c < dom.size(); ++c) p[c] = dom.cx(c) < m ? value : value + jump;
  return p;
}

ExponentField radial_lh_exponent(const GridDomain& dom, double p_lo, double p_hi) {
  if (p_lo < 1.0 || p_hi < p_lo) throw ExponentError("radial-LH needs 1 <= p_- <= p_+");
  const double m = mid_x(dom);
  ExponentField p(dom.size());
  for (int c = 0; c < dom.size(); ++c)
    p[c] = dom.cx(c) >= m ? p_lo : p_lo + (p_hi - p_lo) * std::log(2.0) / -std::log(dom.d[c] / 2.0);
  return p;
}

}  // namespace vexlab
