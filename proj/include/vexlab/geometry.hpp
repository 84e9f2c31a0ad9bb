#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vexlab/pieces.hpp"

namespace vexlab {

using CellField = Eigen::ArrayXd;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dyadic cube [a 2^-level, (a+1) 2^-level]^2.
struct DyadicCube {
  int level = 0;
  int ax = 0;
  int ay = 0;
  auto operator<=>(const DyadicCube&) const = default;
};

// Grid domain at resolution h = 2^-L. Cell (i, j) is [i h, (i+1) h] x [j h, (j+1) h].
struct GridDomain {
  int L = 0;
  double h = 1.0;
  int nx = 0;
  int ny = 0;
  std::vector<int32_t> cell_at;         // nx*ny, -1 outside the domain
  std::vector<std::array<int, 2>> ij;   // cell id -> (i, j)
  CellField d;                          // exact distance from cell centre to the boundary
  std::vector<int32_t> vertex_d2;       // squared distance (cell units) from lattice vertices to the complement

  int size() const { return static_cast<int>(ij.size()); }
  int id(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return cell_at[static_cast<std::size_t>(j) * nx + i];
  }
  double cx(int c) const { return (ij[c][0] + 0.5) * h; }
  double cy(int c) const { return (ij[c][1] + 0.5) * h; }
  double cell_area() const { return h * h; }
  double area() const { return size() * h * h; }
  int64_t vd2(int vi, int vj) const {
    if (vi < 0 || vj < 0 || vi > nx || vj > ny) return 0;
    return vertex_d2[static_cast<std::size_t>(vj) * (nx + 1) + vi];
  }
  // True when the cell touches the complement across an edge.
  bool is_boundary_cell(int c) const;
};

struct DomainSpec {
  std::string kind = "unit-square";  // unit-square | L-shape | rectangle | disc | mask
  double width = 1.0;                // rectangle
  double height = 1.0;
  std::string mask_path;             // PGM file for kind == mask
  int L = 4;
};

DomainSpec parse_domain_spec(const std::string& text, int L);

// nx*ny occupancy, row-major with j as the slow index.
// Connectivity is required unless require_connected is false (exterior grids).
GridDomain domain_from_mask(int L, int nx, int ny, const std::vector<uint8_t>& mask, bool require_connected = true);
GridDomain build_domain(const DomainSpec& spec);
std::vector<uint8_t> read_pgm_mask(const std::string& path, int& nx, int& ny);

struct WhitneyResult {
  std::vector<DyadicCube> cubes;
  std::vector<int> uncovered;  // domain cells inside no emitted cube
  bool truncated = false;      // true when uncovered is non-empty
  int truncation_level = 0;    // finest admissible level (= L)
};

WhitneyResult whitney_decompose(const GridDomain& dom);

// Squared distance (cell units) between the closed cube and the complement.
int64_t cube_dist2(const GridDomain& dom, const DyadicCube& q);
int64_t cube_side_cells(const GridDomain& dom, const DyadicCube& q);
Rect cube_rect(const GridDomain& dom, const DyadicCube& q);
// 17/16 expansion of the open cube.
Rect expanded_rect(const GridDomain& dom, const DyadicCube& q);
bool face_adjacent(const GridDomain& dom, const DyadicCube& a, const DyadicCube& b);

// Shadow integrals over W_t = union of U_s, s below t, with overlaps counted once.
// Cells met by a single U, fully inside it, are attributed to that node; every
// other cell carries telescoping area increments on the nodes of its ancestor
// chains, so that a subtree sum of increments is the area of W_t inside the cell.
struct ShadowIndex {
  std::vector<int> pure_owner;       // per cell, -1 when the cell is not pure
  std::vector<int> entry_node;
  std::vector<int> entry_cell;
  std::vector<double> entry_w;       // area fraction increment
  std::vector<int> touch_node;       // (node, cell) pairs with positive overlap
  std::vector<int> touch_cell;
};

struct TreeNode {
  DyadicCube cube;
  int parent = -1;
  int depth = 0;
  std::vector<int> children;
  Rect Q, U, B;  // B empty for the root
};

struct TreeCovering {
  std::vector<TreeNode> nodes;
  std::vector<int> bfs;              // nodes in BFS order, bfs[0] = root
  int root = 0;
  std::vector<Region> U;             // U_t as weighted cell sets
  std::vector<Region> B;             // B_t (empty for the root)
  std::vector<int> owner;            // per cell: node whose Q_t contains it, or -1
  std::vector<int> covered;          // cells with owner >= 0
  ShadowIndex shadow;
  std::vector<int> subtree_size;     // |{s : s >= t}|
  std::vector<double> shadow_measure;  // |W_t|
  int C1 = 0;                        // max overlap of the U_t
  double C2 = 0.0;                   // max |U_t| / |B_t|
  int n_uncovered = 0;
  double h = 1.0;

  int size() const { return static_cast<int>(nodes.size()); }
  // s >= t: the path from s to the root passes through t.
  bool precedes(int t, int s) const;
};

TreeCovering build_tree_covering(const std::vector<DyadicCube>& cubes, const GridDomain& dom);

// Per-node integrals of g over W_t (subtree accumulation of shadow increments).
std::vector<double> shadow_integrals(const TreeCovering& tree, const CellField& g, double h);
// min / max of a cell field over the cells met by W_t.
void shadow_minmax(const TreeCovering& tree, const CellField& g, std::vector<double>& mn,
                   std::vector<double>& mx);

struct JohnReport {
  double K = 1.0;
  double tau_K = 1.0;
  int worst_K_node = -1;
  int worst_tau_node = -1;
  std::vector<double> K_node;
  std::vector<double> tau_node;
};

JohnReport estimate_john_constants(const TreeCovering& tree, const GridDomain& dom);
// Distance from the centre of the cube to the boundary.
double cube_center_distance(const GridDomain& dom, const DyadicCube& q);

std::string tree_csv(const TreeCovering& tree, const GridDomain& dom);

}  // namespace vexlab
