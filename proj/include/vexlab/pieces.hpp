#pragma once

#include <cstdint>
#include <vector>

namespace vexlab {

struct GridDomain;

// Sub-cell lattice: one cell is kSub x kSub lattice units. Every corner of an
// expanded cube (17/16 of a dyadic cube of side >= h) lands on this lattice.
inline constexpr int64_t kSub = 32;

// Axis-aligned box in sub-cell lattice units.
struct Rect {
  int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  int64_t area() const { return empty() ? 0 : (x1 - x0) * (y1 - y0); }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.x1 <= x1 && r.y0 >= y0 && r.y1 <= y1;
  }
};

Rect intersect(const Rect& a, const Rect& b);
Rect cell_rect(int i, int j);

// Weighted cell set: w is the covered fraction of each cell's area.
struct Region {
  std::vector<int> cells;
  std::vector<double> w;
  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
  double measure(double h) const;
};

// Piecewise-constant function on sub-cell pieces: piece k has value v[k] on a
// fraction w[k] of cell[k]. Cell area not listed carries the value 0.
struct Pieces {
  std::vector<int> cell;
  std::vector<double> w;
  std::vector<double> v;
  std::size_t size() const { return cell.size(); }
  void push(int c, double weight, double value) {
    cell.push_back(c);
    w.push_back(weight);
    v.push_back(value);
  }
};

// Cells of the domain meeting the open box, with exact area fractions.
Region rect_region(const GridDomain& dom, const Rect& r);

// Region for a box given in domain coordinates (not necessarily lattice aligned).
Region box_region(const GridDomain& dom, double x0, double y0, double x1, double y1);

// Region of full cells.
Region cells_region(const std::vector<int>& cells);

// sum_k values[k] * chi_{rects[k]}, resolved into pieces by a per-cell
// arrangement of the partially covering boxes.
Pieces rect_sum(const GridDomain& dom, const std::vector<Rect>& rects,
                const std::vector<double>& values);

// Area (lattice units) of the union of boxes.
int64_t union_area(const std::vector<Rect>& rects);

}  // namespace vexlab
