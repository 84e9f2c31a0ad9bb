#include "vexlab/pieces.hpp"

#include <algorithm>
#include <cmath>

#include "vexlab/geometry.hpp"

namespace vexlab {

Rect intersect(const Rect& a, const Rect& b) {
  Rect r{std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1), std::min(a.y1, b.y1)};
  if (r.empty()) return Rect{};
  return r;
}

Rect cell_rect(int i, int j) { return Rect{i * kSub, j * kSub, (i + 1) * kSub, (j + 1) * kSub}; }

double Region::measure(double h) const {
  double s = 0.0;
  for (double x : w) s += x;
  return s * h * h;
}

namespace {

int64_t floor_div(int64_t a, int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

Region rect_region(const GridDomain& dom, const Rect& r) {
  Region out;
  if (r.empty()) return out;
  const int i0 = static_cast<int>(std::max<int64_t>(0, floor_div(r.x0, kSub)));
  const int i1 = static_cast<int>(std::min<int64_t>(dom.nx - 1, floor_div(r.x1 - 1, kSub)));
  const int j0 = static_cast<int>(std::max<int64_t>(0, floor_div(r.y0, kSub)));
  const int j1 = static_cast<int>(std::min<int64_t>(dom.ny - 1, floor_div(r.y1 - 1, kSub)));
  constexpr double inv = 1.0 / static_cast<double>(kSub * kSub);
  std::vector<std::pair<int, double>> tmp;
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      const int c = dom.id(i, j);
      if (c < 0) continue;
      const int64_t a = intersect(r, cell_rect(i, j)).area();
      if (a > 0) tmp.emplace_back(c, a * inv);
    }
  std::sort(tmp.begin(), tmp.end());
  out.cells.reserve(tmp.size());
  out.w.reserve(tmp.size());
  for (auto& [c, w] : tmp) {
    out.cells.push_back(c);
    out.w.push_back(w);
  }
  return out;
}

Region box_region(const GridDomain& dom, double x0, double y0, double x1, double y1) {
  Region out;
  const double X0 = x0 / dom.h, X1 = x1 / dom.h, Y0 = y0 / dom.h, Y1 = y1 / dom.h;
  if (X1 <= X0 || Y1 <= Y0) return out;
  const int i0 = std::max(0, static_cast<int>(std::floor(X0)));
  const int i1 = std::min(dom.nx - 1, static_cast<int>(std::ceil(X1)) - 1);
  const int j0 = std::max(0, static_cast<int>(std::floor(Y0)));
  const int j1 = std::min(dom.ny - 1, static_cast<int>(std::ceil(Y1)) - 1);
  std::vector<std::pair<int, double>> tmp;
  for (int j = j0; j <= j1; ++j) {
    const double oy = std::min<double>(Y1, j + 1) - std::max<double>(Y0, j);
    if (oy <= 0) continue;
    for (int i = i0; i <= i1; ++i) {
      const int c = dom.id(i, j);
      if (c < 0) continue;
      const double ox = std::min<double>(X1, i + 1) - std::max<double>(X0, i);
      if (ox > 0) tmp.emplace_back(c, ox * oy);
    }
  }
  std::sort(tmp.begin(), tmp.end());
  for (auto& [c, w] : tmp) {
    out.cells.push_back(c);
    out.w.push_back(w);
  }
  return out;
}

Region cells_region(const std::vector<int>& cells) {
  Region r;
  r.cells = cells;
  std::sort(r.cells.begin(), r.cells.end());
  r.w.assign(r.cells.size(), 1.0);
  return r;
}

Pieces rect_sum(const GridDomain& dom, const std::vector<Rect>& rects,
                const std::vector<double>& values) {
  const int N = dom.size();
  std::vector<double> full(N, 0.0);
  std::vector<char> touched(N, 0);
  std::vector<std::pair<int, int>> parts;  // (cell, rect index)
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const Rect& r = rects[k];
    if (r.empty()) continue;
    const int i0 = static_cast<int>(std::max<int64_t>(0, floor_div(r.x0, kSub)));
    const int i1 = static_cast<int>(std::min<int64_t>(dom.nx - 1, floor_div(r.x1 - 1, kSub)));
    const int j0 = static_cast<int>(std::max<int64_t>(0, floor_div(r.y0, kSub)));
    const int j1 = static_cast<int>(std::min<int64_t>(dom.ny - 1, floor_div(r.y1 - 1, kSub)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const int c = dom.id(i, j);
        if (c < 0) continue;
        const Rect cr = cell_rect(i, j);
        const Rect in = intersect(r, cr);
        if (in.empty()) continue;
        touched[c] = 1;
        if (in.area() == kSub * kSub)
          full[c] += values[k];
        else
          parts.emplace_back(c, static_cast<int>(k));
      }
  }
  std::sort(parts.begin(), parts.end());

  Pieces out;
  constexpr double inv = 1.0 / static_cast<double>(kSub * kSub);
  std::size_t p = 0;
  std::vector<int64_t> xs, ys;
  for (int c = 0; c < N; ++c) {
    if (!touched[c]) continue;
    if (p >= parts.size() || parts[p].first != c) {
      out.push(c, 1.0, full[c]);
      continue;
    }
    std::size_t q = p;
    while (q < parts.size() && parts[q].first == c) ++q;
    const Rect cr = cell_rect(dom.ij[c][0], dom.ij[c][1]);
    xs = {cr.x0, cr.x1};
    ys = {cr.y0, cr.y1};
    for (std::size_t k = p; k < q; ++k) {
      const Rect in = intersect(rects[parts[k].second], cr);
      xs.push_back(in.x0);
      xs.push_back(in.x1);
      ys.push_back(in.y0);
      ys.push_back(in.y1);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    for (std::size_t b = 0; b + 1 < ys.size(); ++b)
      for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
        double val = full[c];
        for (std::size_t k = p; k < q; ++k) {
          const Rect& r = rects[parts[k].second];
          if (r.x0 <= xs[a] && r.x1 >= xs[a + 1] && r.y0 <= ys[b] && r.y1 >= ys[b + 1])
            val += values[parts[k].second];
        }
        out.push(c, static_cast<double>((xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b])) * inv, val);
      }
    p = q;
  }
  return out;
}

int64_t union_area(const std::vector<Rect>& rects) {
  std::vector<int64_t> xs, ys;
  for (const Rect& r : rects) {
    if (r.empty()) continue;
    xs.push_back(r.x0);
    xs.push_back(r.x1);
    ys.push_back(r.y0);
    ys.push_back(r.y1);
  }
  if (xs.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  int64_t total = 0;
  for (std::size_t b = 0; b + 1 < ys.size(); ++b)
    for (std::size_t a = 0; a + 1 < xs.size(); ++a)
      for (const Rect& r : rects)
        if (!r.empty() && r.x0 <= xs[a] && r.x1 >= xs[a + 1] && r.y0 <= ys[b] && r.y1 >= ys[b + 1]) {
          total += (xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b]);
          break;
        }
  return total;
}

}  // namespace vexlab
