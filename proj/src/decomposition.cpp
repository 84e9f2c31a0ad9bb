#include "vexlab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "vexlab/report.hpp"

namespace vexlab {

namespace {

// Tent factor along one axis: 1 on [q0, q1], linear to 0 at u0 and u1.
double tent1(int64_t x, int64_t u0, int64_t u1, int64_t q0, int64_t q1) {
  if (x <= u0 || x >= u1) return 0.0;
  if (x < q0) return static_cast<double>(x - u0) / static_cast<double>(q0 - u0);
  if (x > q1) return static_cast<double>(u1 - x) / static_cast<double>(u1 - q1);
  return 1.0;
}

}  // namespace

PartitionOfUnity partition_of_unity(const TreeCovering& tree, const GridDomain& dom) {
  const int N = tree.size();
  PartitionOfUnity pou;
  pou.cells.resize(N);
  pou.phi.resize(N);
  std::vector<double> total(dom.size(), 0.0);
  for (int t = 0; t < N; ++t) {
    const Rect& U = tree.nodes[t].U;
    const Rect& Q = tree.nodes[t].Q;
    for (std::size_t k = 0; k < tree.U[t].size(); ++k) {
      const int c = tree.U[t].cells[k];
      if (tree.owner[c] < 0) continue;
      if (!U.contains(cell_rect(dom.ij[c][0], dom.ij[c][1]))) continue;
      const int64_t x = dom.ij[c][0] * kSub + kSub / 2, y = dom.ij[c][1] * kSub + kSub / 2;
      const double w = tent1(x, U.x0, U.x1, Q.x0, Q.x1) * tent1(y, U.y0, U.y1, Q.y0, Q.y1);
      if (w <= 0.0) continue;
      pou.cells[t].push_back(c);
      pou.phi[t].push_back(w);
      total[c] += w;
    }
  }
  std::vector<int> missing;
  for (int c : tree.covered)
    if (total[c] <= 0.0) missing.push_back(c);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "partition_of_unity: " << missing.size() << " covered cells lie in no U_t:";
    for (std::size_t k = 0; k < std::min<std::size_t>(missing.size(), 10); ++k)
      os << " (" << dom.ij[missing[k]][0] << "," << dom.ij[missing[k]][1] << ")";
    throw DecompositionError(os.str());
  }
  for (int t = 0; t < N; ++t)
    for (std::size_t k = 0; k < pou.cells[t].size(); ++k) pou.phi[t][k] /= total[pou.cells[t][k]];
  std::vector<double> check(dom.size(), 0.0);
  for (int t = 0; t < N; ++t)
    for (std::size_t k = 0; k < pou.cells[t].size(); ++k) check[pou.cells[t][k]] += pou.phi[t][k];
  for (int c : tree.covered) pou.max_sum_error = std::max(pou.max_sum_error, std::abs(check[c] - 1.0));
  return pou;
}

std::vector<double> accumulate_bottom_up(const TreeCovering& tree, const std::vector<double>& x) {
  std::vector<double> A = x;
  for (auto it = tree.bfs.rbegin(); it != tree.bfs.rend(); ++it) {
    const int t = *it;
    if (tree.nodes[t].parent >= 0) A[tree.nodes[t].parent] += A[t];
  }
  return A;
}

std::vector<double> accumulate_naive(const TreeCovering& tree, const std::vector<double>& x) {
  const int N = tree.size();
  std::vector<double> A(N, 0.0);
  for (int s = 0; s < N; ++s) {
    KahanSum acc;
    for (int t = 0; t < N; ++t)
      if (tree.precedes(s, t)) acc.add(x[t]);
    A[s] = acc.value();
  }
  return A;
}

Decomposition decompose(const CellField& g, const TreeCovering& tree, const GridDomain& dom,
                        const PartitionOfUnity& pou) {
  const double h2 = dom.h * dom.h;
  KahanSum integral, l1;
  for (int c = 0; c < dom.size(); ++c) {
    integral.add(g[c] * h2);
    l1.add(std::abs(g[c]) * h2);
    if (g[c] != 0.0 && tree.owner[c] < 0) {
      std::ostringstream os;
      os << "decompose: g is nonzero at cell (" << dom.ij[c][0] << "," << dom.ij[c][1]
         << ") outside the covered region";
      throw DecompositionError(os.str());
    }
  }
  if (std::abs(integral.value()) > 1e-10 * l1.value()) {
    std::ostringstream os;
    os << "nonzero mean: |int g| = " << std::abs(integral.value()) << " exceeds 1e-10 ||g||_1 = " << 1e-10 * l1.value();
    throw DecompositionError(os.str());
  }
  const int N = tree.size();
  Decomposition dec;
  dec.f_cells.resize(N);
  dec.f_vals.resize(N);
  dec.f_int.assign(N, 0.0);
  for (int t = 0; t < N; ++t) {
    KahanSum s;
    for (std::size_t k = 0; k < pou.cells[t].size(); ++k) {
      const int c = pou.cells[t][k];
      const double v = g[c] * pou.phi[t][k];
      if (v == 0.0) continue;
      dec.f_cells[t].push_back(c);
      dec.f_vals[t].push_back(v);
      s.add(v * h2);
    }
    dec.f_int[t] = s.value();
  }
  dec.A = accumulate_bottom_up(tree, dec.f_int);
  dec.coef.assign(N, 0.0);
  for (int t = 0; t < N; ++t)
    if (tree.nodes[t].parent >= 0) dec.coef[t] = dec.A[t] / tree.B[t].measure(dom.h);
  return dec;
}

Pieces Decomposition::node_pieces(const TreeCovering& tree, int t) const {
  struct Cell {
    double base = 0.0;
    std::vector<std::pair<double, double>> strips;  // (fraction, value)
  };
  std::map<int, Cell> cells;
  for (std::size_t k = 0; k < f_cells[t].size(); ++k) cells[f_cells[t][k]].base = f_vals[t][k];
  auto add_strip = [&](const Region& B, double v) {
    if (v == 0.0) return;
    for (std::size_t k = 0; k < B.size(); ++k) cells[B.cells[k]].strips.emplace_back(B.w[k], v);
  };
  for (int s : tree.nodes[t].children) add_strip(tree.B[s], coef[s]);
  if (tree.nodes[t].parent >= 0) add_strip(tree.B[t], -coef[t]);
  Pieces out;
  for (const auto& [c, cell] : cells) {
    double rest = 1.0;
    for (const auto& [w, v] : cell.strips) {
      out.push(c, w, cell.base + v);
      rest -= w;
    }
    if (cell.base != 0.0 && rest > 0.0) out.push(c, rest, cell.base);
  }
  return out;
}

std::vector<std::string> Decomposition::provenance(const TreeCovering& tree, int t) const {
  std::vector<std::string> out{"f" + std::to_string(t)};
  for (int s : tree.nodes[t].children) out.push_back("+h" + std::to_string(s));
  if (tree.nodes[t].parent >= 0) out.push_back("-h" + std::to_string(t));
  return out;
}

std::string DecompositionReport::csv() const {
  CsvWriter w({"node_id", "integral", "norm_q", "support_ok"});
  for (std::size_t t = 0; t < node_integral.size(); ++t)
    w.row({std::to_string(t), fmt(node_integral[t]), fmt(node_norm[t]), node_support_ok[t] ? "1" : "0"});
  return w.str();
}

DecompositionReport verify_decomposition(const Decomposition& dec, const CellField& g, const TreeCovering& tree,
                                         const GridDomain& dom, const ExponentField& q, double tau) {
  const double qm = q.minCoeff();
  if (qm <= 1.0) {
    std::ostringstream os;
    os << "verify_decomposition: q_- = " << qm << " <= 1 is outside the supported range (q_- > 1 required)";
    throw DecompositionError(os.str());
  }
  DecompositionReport r;
  const ConditionReport blh = check_boundary_LH(q, dom, tau);
  if (!blh.pass) r.warnings.push_back("q fails the boundary log-Hoelder check at tau = " + fmt(tau));

  const int N = tree.size();
  const double h = dom.h, h2 = h * h;
  std::vector<double> cell_sum(dom.size(), 0.0);
  r.node_integral.assign(N, 0.0);
  r.node_norm.assign(N, 0.0);
  r.node_support_ok.assign(N, 1);
  std::vector<Rect> rects(N);
  std::vector<double> vals(N, 0.0);
  for (int t = 0; t < N; ++t) {
    const Pieces pc = dec.node_pieces(tree, t);
    KahanSum in, l1;
    for (std::size_t k = 0; k < pc.size(); ++k) {
      in.add(pc.v[k] * pc.w[k] * h2);
      l1.add(std::abs(pc.v[k]) * pc.w[k] * h2);
      cell_sum[pc.cell[k]] += pc.v[k] * pc.w[k];
    }
    r.node_integral[t] = in.value();
    r.mean_ratio = std::max(r.mean_ratio, std::abs(in.value()) / (1e-10 * l1.value() + 1e-14));

    // Support: f_t cells lie inside U_t; each strip B_s lies inside U_t.
    const Rect& U = tree.nodes[t].U;
    bool ok = true;
    for (int c : dec.f_cells[t]) ok = ok && U.contains(cell_rect(dom.ij[c][0], dom.ij[c][1]));
    for (int s : tree.nodes[t].children) ok = ok && (dec.coef[s] == 0.0 || U.contains(tree.nodes[s].B));
    if (tree.nodes[t].parent >= 0) ok = ok && (dec.coef[t] == 0.0 || U.contains(tree.nodes[t].B));
    r.node_support_ok[t] = ok;
    r.support_ok = r.support_ok && ok;

    rects[t] = U;
    if (!pc.cell.empty()) {
      r.node_norm[t] = luxemburg_norm(pc, q, h).value;
      if (r.node_norm[t] > 0.0) vals[t] = r.node_norm[t] / indicator_norm(tree.U[t], q, h);
    }
  }
  for (int c = 0; c < dom.size(); ++c) {
    r.max_abs_g = std::max(r.max_abs_g, std::abs(g[c]));
    r.sum_residual = std::max(r.sum_residual, std::abs(cell_sum[c] - g[c]));
  }
  r.sum_ok = r.sum_residual <= 1e-10 * r.max_abs_g;
  r.mean_ok = r.mean_ratio <= 1.0;

  const double ng = luxemburg_norm(g, q, h).value;
  const double lhs = luxemburg_norm(rect_sum(dom, rects, vals), q, h).value;
  if (ng == 0.0) {
    r.constant = std::nan("");
    r.status = lhs == 0.0 ? "undefined" : "fail";
  } else {
    r.constant = lhs / ng;
    r.status = (r.sum_ok && r.mean_ok && r.support_ok) ? "pass" : "fail";
  }
  return r;
}

std::vector<CellField> mean_zero_fields(const TreeCovering& tree, const GridDomain& dom, int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (int c = 0; c < dom.size(); ++c) {
    x0 = std::min(x0, dom.cx(c) - dom.h / 2);
    x1 = std::max(x1, dom.cx(c) + dom.h / 2);
    y0 = std::min(y0, dom.cy(c) - dom.h / 2);
    y1 = std::max(y1, dom.cy(c) + dom.h / 2);
  }
  const double D = std::max(x1 - x0, y1 - y0);
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<CellField> out;
  for (int n = 0; n < count; ++n) {
    struct Mode {
      double a, kx, ky, ph;
    };
    std::vector<Mode> modes(6);
    for (auto& m : modes) {
      m.a = 2.0 * uniform01(rng) - 1.0;
      m.kx = std::floor(4.0 * uniform01(rng));
      m.ky = std::floor(4.0 * uniform01(rng));
      m.ph = two_pi * uniform01(rng);
    }
    CellField g = CellField::Zero(dom.size());
    KahanSum s;
    for (int c : tree.covered) {
      double v = 0.0;
      for (const auto& m : modes)
        v += m.a * std::cos(two_pi * (m.kx * (dom.cx(c) - x0) + m.ky * (dom.cy(c) - y0)) / D + m.ph);
      g[c] = v;
      s.add(v);
    }
    const double mean = s.value() / static_cast<double>(tree.covered.size());
    for (int c : tree.covered) g[c] -= mean;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace vexlab
