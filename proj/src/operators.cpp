#include "vexlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vexlab/report.hpp"

namespace vexlab {

Pieces averaging(const CellField& f, const Region& B) {
  if (B.empty()) throw OperatorError("averaging over an empty region");
  const double m = average(f, B);
  Pieces out;
  for (std::size_t k = 0; k < B.size(); ++k) out.push(B.cells[k], B.w[k], m);
  return out;
}

Pieces hardy_shadow(const CellField& f, const TreeCovering& tree) {
  const CellField af = f.abs();
  const std::vector<double> I = shadow_integrals(tree, af, tree.h);
  Pieces out;
  for (int t : tree.bfs) {
    if (tree.nodes[t].parent < 0) continue;
    const double v = I[t] / tree.shadow_measure[t];
    const Region& B = tree.B[t];
    for (std::size_t k = 0; k < B.size(); ++k) out.push(B.cells[k], B.w[k], v);
  }
  return out;
}

namespace {

Pieces tree_average(const CellField& f, const TreeCovering& tree, const GridDomain& dom, const ExponentField& p,
                    double alpha) {
  const int n = 2;
  std::vector<Rect> rects(tree.size());
  std::vector<double> vals(tree.size(), 0.0);
  for (int t = 0; t < tree.size(); ++t) {
    rects[t] = tree.nodes[t].U;
    const Region& U = tree.U[t];
    const double num = luxemburg(terms_region(f, p, U, dom.h)).value;
    if (num == 0.0) continue;
    const double scale = alpha == 0.0 ? 1.0 : std::pow(U.measure(dom.h), alpha / n);
    vals[t] = scale * num / indicator_norm(U, p, dom.h);
  }
  return rect_sum(dom, rects, vals);
}

}  // namespace

Pieces tree_average_Tp(const CellField& f, const TreeCovering& tree, const GridDomain& dom, const ExponentField& p) {
  return tree_average(f, tree, dom, p, 0.0);
}

Pieces tree_average_Talpha(const CellField& f, const TreeCovering& tree, const GridDomain& dom,
                           const ExponentField& p, const ExponentField& q, double alpha) {
  const int n = 2;
  for (int c = 0; c < dom.size(); ++c) {
    const double beta_n = 1.0 / p[c] - 1.0 / q[c];
    if (beta_n < -1e-12 || beta_n > alpha / n + 1e-12) {
      std::ostringstream os;
      os << "tree_average_Talpha: 1/p - 1/q = " << beta_n << " outside [0, alpha/n = " << alpha / n
         << "] at cell (" << dom.ij[c][0] << "," << dom.ij[c][1] << ")";
      throw OperatorError(os.str());
    }
  }
  return tree_average(f, tree, dom, p, alpha);
}

HolderSumReport holder_sum_check(const CellField& f, const CellField& g, const TreeCovering& tree,
                                 const GridDomain& dom, const ExponentField& p, const ExponentField& q) {
  const ExponentField pd = dual_exponent(p), qd = dual_exponent(q);
  const double h = dom.h;
  KahanSum sd, so;
  for (int t = 0; t < tree.size(); ++t) {
    const Region& U = tree.U[t];
    const double nf = luxemburg(terms_region(f, p, U, h)).value;
    if (nf == 0.0) continue;
    sd.add(nf * luxemburg(terms_region(g, pd, U, h)).value);
    so.add(nf * luxemburg(terms_region(g, qd, U, h)).value);
  }
  HolderSumReport r;
  const double nf = luxemburg_norm(f, p, h).value;
  const double ngp = luxemburg_norm(g, pd, h).value, ngq = luxemburg_norm(g, qd, h).value;
  r.diagonal = (nf > 0 && ngp > 0) ? sd.value() / (nf * ngp) : 0.0;
  r.off_diagonal = (nf > 0 && ngq > 0) ? so.value() / (nf * ngq) : 0.0;
  return r;
}

CellField pieces_to_field(const Pieces& pc, int ncells) {
  CellField f = CellField::Zero(ncells);
  for (std::size_t k = 0; k < pc.size(); ++k) {
    if (pc.w[k] != 1.0) throw OperatorError("pieces_to_field: piece does not cover its cell");
    f[pc.cell[k]] += pc.v[k];
  }
  return f;
}

Pieces field_to_pieces(const CellField& f) {
  Pieces out;
  for (Eigen::Index c = 0; c < f.size(); ++c)
    if (f[c] != 0.0) out.push(static_cast<int>(c), 1.0, f[c]);
  return out;
}

std::vector<TestFunction> operator_corpus(const GridDomain& dom, int trials, uint64_t seed,
                                          const std::vector<TestFunction>& extra) {
  std::mt19937_64 rng(seed);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (int c = 0; c < dom.size(); ++c) {
    x0 = std::min(x0, dom.cx(c));
    x1 = std::max(x1, dom.cx(c));
    y0 = std::min(y0, dom.cy(c));
    y1 = std::max(y1, dom.cy(c));
  }
  std::vector<int> bcells;
  for (int c = 0; c < dom.size(); ++c)
    if (dom.is_boundary_cell(c)) bcells.push_back(c);
  std::vector<TestFunction> out;
  out.push_back({"uniform", CellField::Ones(dom.size())});
  for (int k = 0; k < trials; ++k) {
    CellField f = CellField::Zero(dom.size());
    std::string id;
    switch (k % 4) {
      case 0: {  // tent
        const double cx = x0 + (x1 - x0) * uniform01(rng), cy = y0 + (y1 - y0) * uniform01(rng);
        const double r = (0.05 + 0.45 * uniform01(rng)) * std::min(x1 - x0, y1 - y0) + dom.h;
        for (int c = 0; c < dom.size(); ++c) f[c] = std::max(0.0, 1.0 - std::hypot(dom.cx(c) - cx, dom.cy(c) - cy) / r);
        id = "tent";
        break;
      }
      case 1: {  // box indicator
        double a = x0 + (x1 - x0) * uniform01(rng), b = x0 + (x1 - x0) * uniform01(rng);
        double e = y0 + (y1 - y0) * uniform01(rng), g = y0 + (y1 - y0) * uniform01(rng);
        if (a > b) std::swap(a, b);
        if (e > g) std::swap(e, g);
        for (int c = 0; c < dom.size(); ++c)
          f[c] = (dom.cx(c) >= a - dom.h && dom.cx(c) <= b + dom.h && dom.cy(c) >= e - dom.h && dom.cy(c) <= g + dom.h);
        id = "indicator";
        break;
      }
      case 2: {  // bump at a boundary cell
        const int b = bcells[static_cast<std::size_t>(uniform01(rng) * bcells.size())];
        const double r = (2.0 + 6.0 * uniform01(rng)) * dom.h;
        for (int c = 0; c < dom.size(); ++c)
          f[c] = std::max(0.0, 1.0 - std::hypot(dom.cx(c) - dom.cx(b), dom.cy(c) - dom.cy(b)) / r);
        id = "boundary-bump";
        break;
      }
      default: {
        for (int c = 0; c < dom.size(); ++c) f[c] = uniform01(rng);
        id = "random";
      }
    }
    out.push_back({id + "-" + std::to_string(k), std::move(f)});
  }
  for (const auto& e : extra) out.push_back(e);
  return out;
}

std::string OperatorNormEstimate::csv() const {
  CsvWriter w({"trial_id", "ratio"});
  w.comment("operator=" + op + " source=" + source + " target=" + target + " seed=" + std::to_string(seed) +
            " trials=" + std::to_string(trials));
  for (const auto& [id, r] : rows) w.row({id, fmt(r)});
  w.row({"summary:max@" + argmax, fmt(estimate)});
  return w.str();
}

OperatorNormEstimate estimate_operator_norm(const std::string& name, const Operator& op,
                                            const std::vector<TestFunction>& corpus, const ExponentField& p_src,
                                            const ExponentField& q_dst, double h, uint64_t seed) {
  OperatorNormEstimate e;
  e.op = name;
  e.seed = seed;
  e.trials = static_cast<int>(corpus.size());
  bool any = false;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const double nf = luxemburg_norm(corpus[k].f, p_src, h).value;
    if (nf == 0.0) continue;
    any = true;
    const double ratio = luxemburg_norm(op(corpus[k].f), q_dst, h).value / nf;
    e.rows.emplace_back(corpus[k].id, ratio);
    if (e.argmax_index < 0 || ratio > e.estimate) {
      e.estimate = ratio;
      e.argmax = corpus[k].id;
      e.argmax_index = static_cast<int>(k);
    }
  }
  if (!any) throw OperatorError("degenerate corpus: every test function has zero norm");
  return e;
}

}  // namespace vexlab
