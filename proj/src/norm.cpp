#include "vexlab/norm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace vexlab {

void KahanSum::add(double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x))
    comp += (sum - t) + x;
  else
    comp += (x - t) + sum;
  sum = t;
}

void ModularTerms::add(double value, double exponent, double measure) {
  const double v = std::abs(value);
  if (v == 0.0 || measure <= 0.0) return;
  a.push_back(v);
  p.push_back(exponent);
  m.push_back(measure);
}

double ModularTerms::rho(double lambda) const {
  KahanSum s;
  for (std::size_t k = 0; k < a.size(); ++k) s.add(m[k] * std::pow(a[k] / lambda, p[k]));
  return s.value();
}

double ModularTerms::p_min() const { return p.empty() ? 1.0 : *std::min_element(p.begin(), p.end()); }
double ModularTerms::p_max() const { return p.empty() ? 1.0 : *std::max_element(p.begin(), p.end()); }

ModularTerms terms_full(const CellField& f, const CellField& p, double h) {
  ModularTerms t;
  const double area = h * h;
  for (Eigen::Index c = 0; c < f.size(); ++c) t.add(f[c], p[c], area);
  return t;
}

ModularTerms terms_region(const CellField& f, const CellField& p, const Region& r, double h) {
  ModularTerms t;
  const double area = h * h;
  for (std::size_t k = 0; k < r.size(); ++k) t.add(f[r.cells[k]], p[r.cells[k]], r.w[k] * area);
  return t;
}

ModularTerms terms_pieces(const Pieces& f, const CellField& p, double h) {
  ModularTerms t;
  const double area = h * h;
  for (std::size_t k = 0; k < f.size(); ++k) t.add(f.v[k], p[f.cell[k]], f.w[k] * area);
  return t;
}

ModularTerms terms_indicator(const Region& r, const CellField& p, double h) {
  std::vector<std::pair<double, double>> pm;
  pm.reserve(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) pm.emplace_back(p[r.cells[k]], r.w[k] * h * h);
  std::sort(pm.begin(), pm.end());
  ModularTerms t;
  for (std::size_t k = 0; k < pm.size();) {
    KahanSum s;
    std::size_t j = k;
    while (j < pm.size() && pm[j].first == pm[k].first) s.add(pm[j++].second);
    t.add(1.0, pm[k].first, s.value());
    k = j;
  }
  return t;
}

NormValue luxemburg(const ModularTerms& t, double tol) {
  if (!(tol > 0.0)) throw NormError("luxemburg: tolerance must be positive");
  NormValue out;
  out.tol = tol;
  if (t.size() == 0) return out;
  const std::size_t n = t.size();
  std::vector<double> la(n);
  for (std::size_t k = 0; k < n; ++k) la[k] = std::log(t.a[k]);
  auto rho_log = [&](double ll) {
    KahanSum s;
    for (std::size_t k = 0; k < n; ++k) s.add(t.m[k] * std::exp(t.p[k] * (la[k] - ll)));
    return s.value();
  };
  const double pmin = t.p_min(), pmax = t.p_max();
  const double m = rho_log(0.0);
  const double lm = std::log(m);
  // constant-exponent bounds: for lambda >= 1 the modular lies between
  // lambda^{-p+} m and lambda^{-p-} m, and the reverse for lambda <= 1
  double lo = m >= 1.0 ? lm / pmax : lm / pmin;
  double hi = m >= 1.0 ? lm / pmin : lm / pmax;
  for (int g = 0; g < 60 && rho_log(hi) > 1.0; ++g) hi += 1e-15 * std::max(1.0, std::abs(hi)) * (1 << std::min(g, 30));
  for (int g = 0; g < 60 && rho_log(lo) < 1.0; ++g) lo -= 1e-15 * std::max(1.0, std::abs(lo)) * (1 << std::min(g, 30));
  const double step = tol / std::max(1.0, pmax);
  int it = 0;
  while (hi - lo > step) {
    if (++it > 200) throw NormError("luxemburg: bisection did not converge in 200 iterations");
    const double mid = 0.5 * (lo + hi);
    if (rho_log(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  out.value = std::exp(hi);
  out.iterations = it;
  out.modular_at = rho_log(hi);
  return out;
}

double modular(const CellField& f, const CellField& p, const Region& region, double h) {
  return terms_region(f, p, region, h).rho(1.0);
}

double modular(const CellField& f, const CellField& p, double h) { return terms_full(f, p, h).rho(1.0); }

NormValue luxemburg_norm(const CellField& f, const CellField& p, const Region& region, double h, double tol) {
  return luxemburg(terms_region(f, p, region, h), tol);
}

NormValue luxemburg_norm(const CellField& f, const CellField& p, double h, double tol) {
  return luxemburg(terms_full(f, p, h), tol);
}

NormValue luxemburg_norm(const Pieces& f, const CellField& p, double h, double tol) {
  return luxemburg(terms_pieces(f, p, h), tol);
}

double indicator_norm(const Region& r, const CellField& p, double h, double tol) {
  return luxemburg(terms_indicator(r, p, h), tol).value;
}

HolderReport holder_pairing(const CellField& f, const CellField& g, const CellField& p, double h) {
  if (p.minCoeff() <= 1.0) throw NormError("holder_pairing: needs p_- > 1");
  const CellField pd = p / (p - 1.0);
  HolderReport r;
  KahanSum s;
  for (Eigen::Index c = 0; c < f.size(); ++c) s.add(std::abs(f[c] * g[c]) * h * h);
  r.integral = s.value();
  r.norm_f = luxemburg_norm(f, p, h).value;
  r.norm_g = luxemburg_norm(g, pd, h).value;
  r.constant = (r.norm_f > 0 && r.norm_g > 0) ? r.integral / (r.norm_f * r.norm_g) : 0.0;
  r.pass = r.constant <= kHolderBudget;
  return r;
}

EmbeddingReport embedding_check(const CellField& f, const CellField& p, const CellField& q, const GridDomain& dom) {
  for (int c = 0; c < dom.size(); ++c)
    if (p[c] > q[c]) {
      std::ostringstream os;
      os << "embedding_check: p > q at cell (" << dom.ij[c][0] << "," << dom.ij[c][1] << "): " << p[c] << " > "
         << q[c];
      throw NormError(os.str());
    }
  EmbeddingReport r;
  r.norm_p = luxemburg_norm(f, p, dom.h).value;
  r.norm_q = luxemburg_norm(f, q, dom.h).value;
  r.bound = 1.0 + dom.area();
  r.ratio = r.norm_q > 0 ? r.norm_p / r.norm_q : 0.0;
  r.pass = r.norm_p <= r.bound * r.norm_q * (1 + 1e-9);
  return r;
}

VectorField gradient(const GridDomain& dom, const CellField& f, const std::vector<char>* region) {
  VectorField g{CellField::Zero(dom.size()), CellField::Zero(dom.size())};
  auto in = [&](int i, int j) {
    const int c = dom.id(i, j);
    return (c >= 0 && (!region || (*region)[c])) ? c : -1;
  };
  auto diff = [&](int c, int di, int dj) {
    const int i = dom.ij[c][0], j = dom.ij[c][1];
    const int m1 = in(i - di, j - dj), p1 = in(i + di, j + dj);
    if (m1 >= 0 && p1 >= 0) return (f[p1] - f[m1]) / (2 * dom.h);
    if (p1 >= 0) {
      const int p2 = in(i + 2 * di, j + 2 * dj);
      if (p2 >= 0) return (-3 * f[c] + 4 * f[p1] - f[p2]) / (2 * dom.h);
      return (f[p1] - f[c]) / dom.h;
    }
    if (m1 >= 0) {
      const int m2 = in(i - 2 * di, j - 2 * dj);
      if (m2 >= 0) return (3 * f[c] - 4 * f[m1] + f[m2]) / (2 * dom.h);
      return (f[c] - f[m1]) / dom.h;
    }
    std::ostringstream os;
    os << "stencil undefined at cell (" << i << "," << j << "): region is one cell wide";
    throw NormError(os.str());
  };
  for (int c = 0; c < dom.size(); ++c) {
    if (region && !(*region)[c]) continue;
    g.x[c] = diff(c, 1, 0);
    g.y[c] = diff(c, 0, 1);
  }
  return g;
}

double average(const CellField& f, const Region& region) {
  if (region.empty()) throw NormError("average over an empty region");
  KahanSum s, w;
  for (std::size_t k = 0; k < region.size(); ++k) {
    s.add(f[region.cells[k]] * region.w[k]);
    w.add(region.w[k]);
  }
  return s.value() / w.value();
}

double average(const CellField& f) {
  if (f.size() == 0) throw NormError("average over an empty region");
  KahanSum s;
  for (Eigen::Index c = 0; c < f.size(); ++c) s.add(f[c]);
  return s.value() / static_cast<double>(f.size());
}

NormValue weighted_gradient_norm(const GridDomain& dom, const CellField& f, const CellField& p, double alpha,
                                 double tol) {
  const VectorField g = gradient(dom, f);
  const CellField w = alpha == 1.0 ? CellField(CellField::Ones(dom.size())) : CellField(dom.d.pow(1.0 - alpha));
  return luxemburg_norm(CellField(w * g.magnitude()), p, dom.h, tol);
}

CellField make_function(const GridDomain& dom, const std::string& name, uint64_t seed) {
  CellField f(dom.size());
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (int c = 0; c < dom.size(); ++c) {
    x0 = std::min(x0, dom.cx(c));
    x1 = std::max(x1, dom.cx(c));
    y0 = std::min(y0, dom.cy(c));
    y1 = std::max(y1, dom.cy(c));
  }
  if (name == "linear") {
    for (int c = 0; c < dom.size(); ++c) f[c] = dom.cx(c);
  } else if (name == "linear-y") {
    for (int c = 0; c < dom.size(); ++c) f[c] = dom.cy(c);
  } else if (name == "quadratic") {
    for (int c = 0; c < dom.size(); ++c) f[c] = dom.cx(c) * dom.cx(c) + dom.cy(c) * dom.cy(c);
  } else if (name == "random-uniform") {
    std::mt19937_64 rng(seed);
    for (int c = 0; c < dom.size(); ++c) f[c] = 2.0 * uniform01(rng) - 1.0;
  } else if (name == "tent") {
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const double r = 0.5 * std::min(x1 - x0, y1 - y0) + 0.5 * dom.h;
    for (int c = 0; c < dom.size(); ++c)
      f[c] = std::max(0.0, 1.0 - std::max(std::abs(dom.cx(c) - cx), std::abs(dom.cy(c) - cy)) / r);
  } else {
    throw NormError("unknown function generator '" + name + "'");
  }
  return f;
}

CellField read_cell_csv(const std::string& path, const GridDomain& dom, bool require_all, double fill) {
  std::ifstream in(path);
  if (!in) throw NormError("cannot open " + path);
  CellField f = CellField::Constant(dom.size(), fill);
  std::vector<char> seen(dom.size(), 0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    int i, j;
    double v;
    if (!(ls >> i >> j >> v)) {
      if (lineno == 1) continue;  // header
      throw NormError(path + ":" + std::to_string(lineno) + ": expected cell_i,cell_j,value");
    }
    const int c = dom.id(i, j);
    if (c < 0) throw NormError(path + ":" + std::to_string(lineno) + ": cell outside the domain");
    f[c] = v;
    seen[c] = 1;
  }
  if (require_all)
    for (int c = 0; c < dom.size(); ++c)
      if (!seen[c])
        throw NormError(path + ": missing value for cell (" + std::to_string(dom.ij[c][0]) + "," +
                        std::to_string(dom.ij[c][1]) + ")");
  return f;
}

}  // namespace vexlab
