#include "vexlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace vexlab {

bool GridDomain::is_boundary_cell(int c) const {
  const int i = ij[c][0], j = ij[c][1];
  return id(i - 1, j) < 0 || id(i + 1, j) < 0 || id(i, j - 1) < 0 || id(i, j + 1) < 0;
}

// ============================================================================
// Distance field
// ============================================================================

namespace {

constexpr double kInf = 1e300;

// Lower envelope of parabolas (Felzenszwalb-Huttenlocher), exact for integer data.
void dt1d(const double* f, int n, double* out, std::vector<int>& v, std::vector<double>& z) {
  v.resize(n + 1);
  z.resize(n + 2);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (k >= 0) {
      const int r = v[k];
      s = ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * q - 2.0 * r);
      if (s <= z[k])
        --k;
      else
        break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
    }
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    out[q] = dq * dq + f[v[j]];
  }
}

// Squared distances on the half-cell lattice from cell centres and lattice
// vertices to the closed complement. The nearest complement point of a
// half-integer point always lies on the half-integer lattice.
void compute_distances(GridDomain& dom) {
  const int W = 2 * dom.nx + 1, H = 2 * dom.ny + 1;
  auto outside = [&](int i, int j) { return dom.id(i, j) < 0; };
  auto site = [&](int X, int Y) {
    int ci[2], cj[2], ni = 0, nj = 0;
    if (X % 2 == 0) {
      ci[ni++] = X / 2 - 1;
      ci[ni++] = X / 2;
    } else {
      ci[ni++] = (X - 1) / 2;
    }
    if (Y % 2 == 0) {
      cj[nj++] = Y / 2 - 1;
      cj[nj++] = Y / 2;
    } else {
      cj[nj++] = (Y - 1) / 2;
    }
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < nj; ++b)
        if (outside(ci[a], cj[b])) return true;
    return false;
  };

  std::vector<int32_t> g(static_cast<std::size_t>(W) * H);
  std::vector<double> f(std::max(W, H)), out(std::max(W, H));
  std::vector<int> v;
  std::vector<double> z;
  for (int X = 0; X < W; ++X) {
    for (int Y = 0; Y < H; ++Y) f[Y] = site(X, Y) ? 0.0 : kInf;
    dt1d(f.data(), H, out.data(), v, z);
    for (int Y = 0; Y < H; ++Y)
      g[static_cast<std::size_t>(Y) * W + X] =
          out[Y] >= kInf ? std::numeric_limits<int32_t>::max() : static_cast<int32_t>(out[Y]);
  }
  dom.d = CellField::Zero(dom.size());
  dom.vertex_d2.assign(static_cast<std::size_t>(dom.nx + 1) * (dom.ny + 1), 0);
  for (int Y = 0; Y < H; ++Y) {
    for (int X = 0; X < W; ++X) {
      const int32_t gv = g[static_cast<std::size_t>(Y) * W + X];
      f[X] = gv == std::numeric_limits<int32_t>::max() ? kInf : double(gv);
    }
    dt1d(f.data(), W, out.data(), v, z);
    if (Y % 2 == 1) {
      const int j = (Y - 1) / 2;
      for (int i = 0; i < dom.nx; ++i) {
        const int c = dom.id(i, j);
        if (c >= 0) dom.d[c] = 0.5 * std::sqrt(out[2 * i + 1]) * dom.h;
      }
    } else {
      const int vj = Y / 2;
      for (int vi = 0; vi <= dom.nx; ++vi)
        dom.vertex_d2[static_cast<std::size_t>(vj) * (dom.nx + 1) + vi] =
            static_cast<int32_t>(std::llround(out[2 * vi]) / 4);
    }
  }
}

}  // namespace

GridDomain domain_from_mask(int L, int nx, int ny, const std::vector<uint8_t>& mask, bool require_connected) {
  if (nx <= 0 || ny <= 0 || mask.size() != static_cast<std::size_t>(nx) * ny)
    throw GeometryError("empty domain mask");
  GridDomain dom;
  dom.L = L;
  dom.h = std::ldexp(1.0, -L);
  dom.nx = nx;
  dom.ny = ny;
  dom.cell_at.assign(mask.size(), -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask[static_cast<std::size_t>(j) * nx + i]) {
        dom.cell_at[static_cast<std::size_t>(j) * nx + i] = static_cast<int32_t>(dom.ij.size());
        dom.ij.push_back({i, j});
      }
  if (dom.ij.empty()) throw GeometryError("empty domain mask");

  if (!require_connected) {
    compute_distances(dom);
    return dom;
  }
  std::vector<char> seen(dom.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    const int i = dom.ij[c][0], j = dom.ij[c][1];
    const int nb[4] = {dom.id(i - 1, j), dom.id(i + 1, j), dom.id(i, j - 1), dom.id(i, j + 1)};
    for (int n : nb)
      if (n >= 0 && !seen[n]) {
        seen[n] = 1;
        ++reached;
        stack.push_back(n);
      }
  }
  if (reached != dom.size()) throw GeometryError("domain not connected");
  compute_distances(dom);
  return dom;
}

std::vector<uint8_t> read_pgm_mask(const std::string& path, int& nx, int& ny) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GeometryError("cannot open mask file " + path);
  auto token = [&]() {
    std::string t;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(ch);
    }
    return t;
  };
  const std::string magic = token();
  if (magic != "P2" && magic != "P5") throw GeometryError("mask is not a P2/P5 PGM file");
  nx = std::stoi(token());
  ny = std::stoi(token());
  const int maxval = std::stoi(token());
  if (nx <= 0 || ny <= 0) throw GeometryError("empty domain mask");
  std::vector<uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
  for (int row = 0; row < ny; ++row)
    for (int col = 0; col < nx; ++col) {
      int value = 0;
      if (magic == "P2") {
        const std::string t = token();
        if (t.empty()) throw GeometryError("truncated PGM data");
        value = std::stoi(t);
      } else if (maxval < 256) {
        char ch;
        if (!in.get(ch)) throw GeometryError("truncated PGM data");
        value = static_cast<unsigned char>(ch);
      } else {
        char hi, lo;
        if (!in.get(hi) || !in.get(lo)) throw GeometryError("truncated PGM data");
        value = (static_cast<unsigned char>(hi) << 8) | static_cast<unsigned char>(lo);
      }
      // image rows run top to bottom, grid rows bottom to top
      mask[static_cast<std::size_t>(ny - 1 - row) * nx + col] = value != 0;
    }
  return mask;
}

DomainSpec parse_domain_spec(const std::string& text, int L) {
  DomainSpec s;
  s.L = L;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "unit-square" || kind == "L-shape") {
    s.kind = kind;
  } else if (kind == "rectangle") {
    s.kind = kind;
    const auto x = arg.find('x');
    if (arg.empty() || x == std::string::npos) throw GeometryError("rectangle needs WxH, e.g. rectangle:2x1");
    s.width = std::stod(arg.substr(0, x));
    s.height = std::stod(arg.substr(x + 1));
  } else if (kind == "disc") {
    s.kind = kind;
    s.width = arg.empty() ? 0.5 : std::stod(arg);
  } else if (kind == "mask") {
    s.kind = kind;
    s.mask_path = arg;
  } else {
    throw GeometryError("unknown domain '" + text + "'");
  }
  return s;
}

GridDomain build_domain(const DomainSpec& spec) {
  if (spec.L < 0 || spec.L > 14) throw GeometryError("resolution L must lie in [0, 14]");
  const int n = 1 << spec.L;
  if (spec.kind == "unit-square") return domain_from_mask(spec.L, n, n, std::vector<uint8_t>(std::size_t(n) * n, 1));
  if (spec.kind == "L-shape") {
    if (spec.L < 1) throw GeometryError("L-shape needs L >= 1");
    std::vector<uint8_t> m(std::size_t(n) * n, 1);
    for (int j = n / 2; j < n; ++j)
      for (int i = n / 2; i < n; ++i) m[std::size_t(j) * n + i] = 0;
    return domain_from_mask(spec.L, n, n, m);
  }
  if (spec.kind == "rectangle") {
    const double wx = spec.width * n, wy = spec.height * n;
    const int nx = static_cast<int>(std::lround(wx)), ny = static_cast<int>(std::lround(wy));
    if (std::abs(wx - nx) > 1e-9 || std::abs(wy - ny) > 1e-9 || nx <= 0 || ny <= 0)
      throw GeometryError("rectangle sides must be positive multiples of h");
    return domain_from_mask(spec.L, nx, ny, std::vector<uint8_t>(std::size_t(nx) * ny, 1));
  }
  if (spec.kind == "disc") {
    const double R = spec.width;
    const int m = static_cast<int>(std::ceil(2 * R * n));
    std::vector<uint8_t> mask(std::size_t(m) * m, 0);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) / n - R, y = (j + 0.5) / n - R;
        mask[std::size_t(j) * m + i] = x * x + y * y < R * R;
      }
    return domain_from_mask(spec.L, m, m, mask);
  }
  if (spec.kind == "mask") {
    int nx = 0, ny = 0;
    auto mask = read_pgm_mask(spec.mask_path, nx, ny);
    return domain_from_mask(spec.L, nx, ny, mask);
  }
  throw GeometryError("unknown domain kind '" + spec.kind + "'");
}

// ============================================================================
// Whitney decomposition
// ============================================================================

int64_t cube_side_cells(const GridDomain& dom, const DyadicCube& q) { return int64_t(1) << (dom.L - q.level); }

Rect cube_rect(const GridDomain& dom, const DyadicCube& q) {
  const int64_t S = cube_side_cells(dom, q) * kSub;
  return Rect{q.ax * S, q.ay * S, (q.ax + 1) * S, (q.ay + 1) * S};
}

Rect expanded_rect(const GridDomain& dom, const DyadicCube& q) {
  Rect r = cube_rect(dom, q);
  const int64_t e = cube_side_cells(dom, q) * kSub / 32;
  return Rect{r.x0 - e, r.y0 - e, r.x1 + e, r.y1 + e};
}

int64_t cube_dist2(const GridDomain& dom, const DyadicCube& q) {
  const int64_t s = cube_side_cells(dom, q);
  int64_t best = std::numeric_limits<int64_t>::max();
  for (int64_t vj = q.ay * s; vj <= (q.ay + 1) * s; ++vj)
    for (int64_t vi = q.ax * s; vi <= (q.ax + 1) * s; ++vi)
      best = std::min(best, dom.vd2(static_cast<int>(vi), static_cast<int>(vj)));
  return best;
}

bool face_adjacent(const GridDomain& dom, const DyadicCube& a, const DyadicCube& b) {
  const Rect A = cube_rect(dom, a), B = cube_rect(dom, b);
  const int64_t ox = std::min(A.x1, B.x1) - std::max(A.x0, B.x0);
  const int64_t oy = std::min(A.y1, B.y1) - std::max(A.y0, B.y0);
  return (ox == 0 && oy > 0) || (oy == 0 && ox > 0);
}

WhitneyResult whitney_decompose(const GridDomain& dom) {
  WhitneyResult res;
  res.truncation_level = dom.L;
  const int L = dom.L;
  // mins[l]: min over the lattice vertices of each level-l cube of the squared
  // distance to the complement (0 when the cube leaves the bounding box).
  std::vector<std::vector<int64_t>> mins(L + 1);
  std::vector<int> na(L + 1), nb(L + 1);
  for (int l = 0; l <= L; ++l) {
    const int s = 1 << (L - l);
    na[l] = (dom.nx + s - 1) / s;
    nb[l] = (dom.ny + s - 1) / s;
  }
  mins[L].resize(std::size_t(na[L]) * nb[L]);
  for (int j = 0; j < dom.ny; ++j)
    for (int i = 0; i < dom.nx; ++i)
      mins[L][std::size_t(j) * na[L] + i] =
          std::min({dom.vd2(i, j), dom.vd2(i + 1, j), dom.vd2(i, j + 1), dom.vd2(i + 1, j + 1)});
  for (int l = L - 1; l >= 0; --l) {
    mins[l].assign(std::size_t(na[l]) * nb[l], 0);
    for (int b = 0; b < nb[l]; ++b)
      for (int a = 0; a < na[l]; ++a) {
        int64_t m = std::numeric_limits<int64_t>::max();
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int ca = 2 * a + dx, cb = 2 * b + dy;
            m = std::min(m, (ca < na[l + 1] && cb < nb[l + 1]) ? mins[l + 1][std::size_t(cb) * na[l + 1] + ca] : 0);
          }
        mins[l][std::size_t(b) * na[l] + a] = m;
      }
  }
  std::vector<char> blocked(std::size_t(na[0]) * nb[0], 0), next;
  for (int l = 0; l <= L; ++l) {
    const int64_t s = int64_t(1) << (L - l);
    if (l > 0) {
      next.assign(std::size_t(na[l]) * nb[l], 0);
      for (int b = 0; b < nb[l]; ++b)
        for (int a = 0; a < na[l]; ++a) next[std::size_t(b) * na[l] + a] = blocked[std::size_t(b / 2) * na[l - 1] + a / 2];
      blocked.swap(next);
    }
    for (int b = 0; b < nb[l]; ++b)
      for (int a = 0; a < na[l]; ++a) {
        const std::size_t k = std::size_t(b) * na[l] + a;
        if (blocked[k]) continue;
        const int64_t D2 = mins[l][k];
        if (2 * s * s <= D2 && D2 <= 32 * s * s) {
          res.cubes.push_back({l, a, b});
          blocked[k] = 1;
        }
      }
  }
  std::vector<char> cov(dom.size(), 0);
  for (const auto& q : res.cubes) {
    const int s = 1 << (L - q.level);
    for (int j = q.ay * s; j < (q.ay + 1) * s; ++j)
      for (int i = q.ax * s; i < (q.ax + 1) * s; ++i) cov[dom.id(i, j)] = 1;
  }
  for (int c = 0; c < dom.size(); ++c)
    if (!cov[c]) res.uncovered.push_back(c);
  res.truncated = !res.uncovered.empty();
  return res;
}

// ============================================================================
// Tree covering
// ============================================================================

double cube_center_distance(const GridDomain& dom, const DyadicCube& q) {
  const int64_t s = cube_side_cells(dom, q);
  if (s == 1) return dom.d[dom.id(q.ax, q.ay)];
  const int64_t ci = q.ax * s + s / 2, cj = q.ay * s + s / 2;
  return std::sqrt(static_cast<double>(dom.vd2(static_cast<int>(ci), static_cast<int>(cj)))) * dom.h;
}

namespace {

// Squared centre distance in quarter cell units, exact.
int64_t center_key(const GridDomain& dom, const DyadicCube& q) {
  const int64_t s = cube_side_cells(dom, q);
  if (s == 1) {
    const double t = 2.0 * dom.d[dom.id(q.ax, q.ay)] / dom.h;
    return std::llround(t * t);
  }
  return 4 * dom.vd2(static_cast<int>(q.ax * s + s / 2), static_cast<int>(q.ay * s + s / 2));
}

struct Sub {
  int node;
  uint8_t x0, y0, x1, y1;
};

void build_shadow_index(TreeCovering& T, const GridDomain& dom) {
  const int N = dom.size();
  std::vector<int> start(N + 1, 0);
  auto for_cells = [&](const Rect& r, auto&& fn) {
    const int i0 = std::max<int64_t>(0, r.x0 / kSub - (r.x0 < 0 ? 1 : 0));
    const int i1 = std::min<int64_t>(dom.nx - 1, (r.x1 - 1) / kSub);
    const int j0 = std::max<int64_t>(0, r.y0 / kSub - (r.y0 < 0 ? 1 : 0));
    const int j1 = std::min<int64_t>(dom.ny - 1, (r.y1 - 1) / kSub);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const int c = dom.id(i, j);
        if (c < 0) continue;
        const Rect in = intersect(r, cell_rect(i, j));
        if (!in.empty()) fn(c, i, j, in);
      }
  };
  for (int t = 0; t < T.size(); ++t) for_cells(T.nodes[t].U, [&](int c, int, int, const Rect&) { ++start[c + 1]; });
  for (int c = 0; c < N; ++c) start[c + 1] += start[c];
  std::vector<Sub> subs(start[N]);
  std::vector<int> fill(start.begin(), start.end() - 1);
  for (int t = 0; t < T.size(); ++t)
    for_cells(T.nodes[t].U, [&](int c, int i, int j, const Rect& in) {
      subs[fill[c]++] = Sub{t, uint8_t(in.x0 - i * kSub), uint8_t(in.y0 - j * kSub), uint8_t(in.x1 - i * kSub),
                            uint8_t(in.y1 - j * kSub)};
    });

  ShadowIndex& S = T.shadow;
  S.pure_owner.assign(N, -1);
  struct Front {
    int node;
    uint32_t mask;
    double child_area;
  };
  std::vector<Front> front;
  std::vector<Rect> tmp;
  constexpr double inv = 1.0 / double(kSub * kSub);
  for (int c = 0; c < N; ++c) {
    const int a = start[c], b = start[c + 1];
    if (a == b) continue;
    if (b - a == 1 && subs[a].x0 == 0 && subs[a].y0 == 0 && subs[a].x1 == kSub && subs[a].y1 == kSub) {
      S.pure_owner[c] = subs[a].node;
      continue;
    }
    const int k = b - a;
    const uint32_t full = (k >= 32) ? 0xffffffffu : ((1u << k) - 1u);
    auto area = [&](uint32_t mask) {
      tmp.clear();
      for (int e = 0; e < k; ++e)
        if (mask & (1u << e)) tmp.push_back(Rect{subs[a + e].x0, subs[a + e].y0, subs[a + e].x1, subs[a + e].y1});
      return static_cast<double>(union_area(tmp)) * inv;
    };
    front.clear();
    for (int e = 0; e < k; ++e) {
      S.touch_node.push_back(subs[a + e].node);
      S.touch_cell.push_back(c);
      bool merged = false;
      for (auto& f : front)
        if (f.node == subs[a + e].node) {
          f.mask |= 1u << e;
          merged = true;
        }
      if (!merged) front.push_back({subs[a + e].node, 1u << e, 0.0});
    }
    while (true) {
      if (front.size() == 1 && front[0].mask == full) {
        const double dlt = area(full) - front[0].child_area;
        if (dlt != 0.0) {
          S.entry_node.push_back(front[0].node);
          S.entry_cell.push_back(c);
          S.entry_w.push_back(dlt);
        }
        break;
      }
      std::size_t m = 0;
      for (std::size_t q = 1; q < front.size(); ++q)
        if (T.nodes[front[q].node].depth > T.nodes[front[m].node].depth) m = q;
      Front f = front[m];
      front.erase(front.begin() + static_cast<std::ptrdiff_t>(m));
      const double am = area(f.mask);
      const double dlt = am - f.child_area;
      if (dlt != 0.0) {
        S.entry_node.push_back(f.node);
        S.entry_cell.push_back(c);
        S.entry_w.push_back(dlt);
      }
      const int p = T.nodes[f.node].parent;
      bool merged = false;
      for (auto& g : front)
        if (g.node == p) {
          g.mask |= f.mask;
          g.child_area += am;
          merged = true;
        }
      if (!merged) front.push_back({p, f.mask, am});
    }
  }
}

}  // namespace

bool TreeCovering::precedes(int t, int s) const {
  while (s >= 0 && nodes[s].depth > nodes[t].depth) s = nodes[s].parent;
  return s == t;
}

TreeCovering build_tree_covering(const std::vector<DyadicCube>& input, const GridDomain& dom) {
  if (input.empty()) throw GeometryError("tree covering needs at least one Whitney cube");
  std::vector<DyadicCube> cubes = input;
  std::sort(cubes.begin(), cubes.end());
  TreeCovering T;
  T.h = dom.h;
  const int n = static_cast<int>(cubes.size());
  T.nodes.resize(n);
  T.owner.assign(dom.size(), -1);
  for (int t = 0; t < n; ++t) {
    T.nodes[t].cube = cubes[t];
    T.nodes[t].Q = cube_rect(dom, cubes[t]);
    T.nodes[t].U = expanded_rect(dom, cubes[t]);
    const int s = 1 << (dom.L - cubes[t].level);
    for (int j = cubes[t].ay * s; j < (cubes[t].ay + 1) * s; ++j)
      for (int i = cubes[t].ax * s; i < (cubes[t].ax + 1) * s; ++i) {
        const int c = dom.id(i, j);
        if (c < 0 || T.owner[c] >= 0) throw GeometryError("Whitney cubes overlap or leave the domain");
        T.owner[c] = t;
      }
  }
  for (int c = 0; c < dom.size(); ++c) {
    if (T.owner[c] >= 0)
      T.covered.push_back(c);
    else
      ++T.n_uncovered;
  }

  // face adjacency through edge-neighbour cells
  std::vector<std::vector<int>> adj(n);
  for (int t = 0; t < n; ++t) {
    const auto& q = cubes[t];
    const int s = 1 << (dom.L - q.level);
    const int i0 = q.ax * s, j0 = q.ay * s;
    auto add = [&](int i, int j) {
      const int c = dom.id(i, j);
      if (c >= 0 && T.owner[c] >= 0 && T.owner[c] != t) adj[t].push_back(T.owner[c]);
    };
    for (int k = 0; k < s; ++k) {
      add(i0 - 1, j0 + k);
      add(i0 + s, j0 + k);
      add(i0 + k, j0 - 1);
      add(i0 + k, j0 + s);
    }
    std::sort(adj[t].begin(), adj[t].end());
    adj[t].erase(std::unique(adj[t].begin(), adj[t].end()), adj[t].end());
  }

  int root = 0;
  int64_t best = -1;
  for (int t = 0; t < n; ++t) {
    const int64_t key = center_key(dom, cubes[t]);
    const auto& a = cubes[t];
    const auto& r = cubes[root];
    const int64_t sa = cube_side_cells(dom, a), sr = cube_side_cells(dom, r);
    const bool lexless = std::pair(a.ax * sa, a.ay * sa) < std::pair(r.ax * sr, r.ay * sr);
    if (key > best || (key == best && lexless)) {
      best = key;
      root = t;
    }
  }
  T.root = root;
  std::vector<char> seen(n, 0);
  std::deque<int> queue{root};
  seen[root] = 1;
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    T.bfs.push_back(t);
    for (int s : adj[t])
      if (!seen[s]) {
        seen[s] = 1;
        T.nodes[s].parent = t;
        T.nodes[s].depth = T.nodes[t].depth + 1;
        T.nodes[t].children.push_back(s);
        queue.push_back(s);
      }
  }
  if (static_cast<int>(T.bfs.size()) != n) {
    for (int t = 0; t < n; ++t)
      if (!seen[t]) {
        std::ostringstream os;
        os << "Whitney adjacency graph is disconnected: orphan component contains cube (level " << cubes[t].level
           << ", anchor " << cubes[t].ax << "," << cubes[t].ay << ")";
        throw GeometryError(os.str());
      }
  }

  // B_t: the slab of U_parent that enters Q_t across the shared face
  for (int t = 0; t < n; ++t) {
    TreeNode& nd = T.nodes[t];
    if (nd.parent < 0) continue;
    const Rect& A = nd.Q;
    const Rect& P = T.nodes[nd.parent].Q;
    const int64_t e = (P.x1 - P.x0) / 32;
    Rect b;
    if (A.x1 == P.x0 || A.x0 == P.x1) {
      const int64_t y0 = std::max(A.y0, P.y0), y1 = std::min(A.y1, P.y1);
      b = (A.x1 == P.x0) ? Rect{A.x1 - e, y0, A.x1, y1} : Rect{A.x0, y0, A.x0 + e, y1};
    } else {
      const int64_t x0 = std::max(A.x0, P.x0), x1 = std::min(A.x1, P.x1);
      b = (A.y1 == P.y0) ? Rect{x0, A.y1 - e, x1, A.y1} : Rect{x0, A.y0, x1, A.y0 + e};
    }
    if (b.empty()) throw GeometryError("tree edge without a shared face");
    nd.B = b;
  }

  T.U.resize(n);
  T.B.resize(n);
  for (int t = 0; t < n; ++t) {
    T.U[t] = rect_region(dom, T.nodes[t].U);
    if (T.nodes[t].parent >= 0) T.B[t] = rect_region(dom, T.nodes[t].B);
  }

  std::vector<Rect> rects(n);
  for (int t = 0; t < n; ++t) rects[t] = T.nodes[t].U;
  const Pieces overlap = rect_sum(dom, rects, std::vector<double>(n, 1.0));
  double mx = 0.0;
  for (double v : overlap.v) mx = std::max(mx, v);
  T.C1 = static_cast<int>(std::lround(mx));
  T.C2 = 0.0;
  for (int t = 0; t < n; ++t)
    if (T.nodes[t].parent >= 0)
      T.C2 = std::max(T.C2, double(T.nodes[t].U.area()) / double(T.nodes[t].B.area()));

  build_shadow_index(T, dom);
  T.subtree_size.assign(n, 1);
  for (auto it = T.bfs.rbegin(); it != T.bfs.rend(); ++it)
    if (T.nodes[*it].parent >= 0) T.subtree_size[T.nodes[*it].parent] += T.subtree_size[*it];
  T.shadow_measure = shadow_integrals(T, CellField::Ones(dom.size()), dom.h);
  return T;
}

std::vector<double> shadow_integrals(const TreeCovering& T, const CellField& g, double h) {
  std::vector<double> acc(T.size(), 0.0);
  const auto& S = T.shadow;
  for (std::size_t c = 0; c < S.pure_owner.size(); ++c)
    if (S.pure_owner[c] >= 0) acc[S.pure_owner[c]] += g[static_cast<Eigen::Index>(c)];
  for (std::size_t k = 0; k < S.entry_node.size(); ++k) acc[S.entry_node[k]] += g[S.entry_cell[k]] * S.entry_w[k];
  for (auto it = T.bfs.rbegin(); it != T.bfs.rend(); ++it)
    if (T.nodes[*it].parent >= 0) acc[T.nodes[*it].parent] += acc[*it];
  for (double& a : acc) a *= h * h;
  return acc;
}

void shadow_minmax(const TreeCovering& T, const CellField& g, std::vector<double>& mn, std::vector<double>& mx) {
  mn.assign(T.size(), std::numeric_limits<double>::infinity());
  mx.assign(T.size(), -std::numeric_limits<double>::infinity());
  const auto& S = T.shadow;
  for (std::size_t c = 0; c < S.pure_owner.size(); ++c)
    if (S.pure_owner[c] >= 0) {
      const double v = g[static_cast<Eigen::Index>(c)];
      mn[S.pure_owner[c]] = std::min(mn[S.pure_owner[c]], v);
      mx[S.pure_owner[c]] = std::max(mx[S.pure_owner[c]], v);
    }
  for (std::size_t k = 0; k < S.touch_node.size(); ++k) {
    const double v = g[S.touch_cell[k]];
    mn[S.touch_node[k]] = std::min(mn[S.touch_node[k]], v);
    mx[S.touch_node[k]] = std::max(mx[S.touch_node[k]], v);
  }
  for (auto it = T.bfs.rbegin(); it != T.bfs.rend(); ++it) {
    const int p = T.nodes[*it].parent;
    if (p < 0) continue;
    mn[p] = std::min(mn[p], mn[*it]);
    mx[p] = std::max(mx[p], mx[*it]);
  }
}

// ============================================================================
// John constants
// ============================================================================

JohnReport estimate_john_constants(const TreeCovering& T, const GridDomain& dom) {
  const int n = T.size();
  JohnReport rep;
  rep.K_node.assign(n, 0.0);
  rep.tau_node.assign(n, 0.0);
  std::vector<Rect> box(n);
  for (int t = 0; t < n; ++t) box[t] = T.nodes[t].U;
  for (auto it = T.bfs.rbegin(); it != T.bfs.rend(); ++it) {
    const int p = T.nodes[*it].parent;
    if (p < 0) continue;
    Rect& b = box[p];
    const Rect& c = box[*it];
    b = Rect{std::min(b.x0, c.x0), std::min(b.y0, c.y0), std::max(b.x1, c.x1), std::max(b.y1, c.y1)};
  }
  std::vector<double> far2(n, 0.0);
  for (int s = 0; s < n; ++s) {
    const Rect& u = T.nodes[s].U;
    for (int t = s; t >= 0; t = T.nodes[t].parent) {
      const Rect& q = T.nodes[t].Q;
      const double cx = 0.5 * double(q.x0 + q.x1), cy = 0.5 * double(q.y0 + q.y1);
      const double dx = std::max(std::abs(u.x0 - cx), std::abs(u.x1 - cx));
      const double dy = std::max(std::abs(u.y0 - cy), std::abs(u.y1 - cy));
      far2[t] = std::max(far2[t], dx * dx + dy * dy);
    }
  }
  for (int t = 0; t < n; ++t) {
    const Rect& q = T.nodes[t].Q;
    const double cx = 0.5 * double(q.x0 + q.x1), cy = 0.5 * double(q.y0 + q.y1);
    const double half = 0.5 * double(q.x1 - q.x0);
    const Rect& b = box[t];
    const double ext = std::max({cx - b.x0, b.x1 - cx, cy - b.y0, b.y1 - cy});
    rep.K_node[t] = ext / half;
    const double dt = cube_center_distance(dom, T.nodes[t].cube);
    rep.tau_node[t] = std::sqrt(far2[t]) / double(kSub) * dom.h / dt;
    if (rep.worst_K_node < 0 || rep.K_node[t] > rep.K) {
      rep.K = rep.K_node[t];
      rep.worst_K_node = t;
    }
    if (rep.worst_tau_node < 0 || rep.tau_node[t] > rep.tau_K) {
      rep.tau_K = std::max(1.0, rep.tau_node[t]);
      rep.worst_tau_node = t;
    }
  }
  return rep;
}

std::string tree_csv(const TreeCovering& T, const GridDomain& dom) {
  (void)dom;
  std::ostringstream os;
  os << "node_id,level,anchor,parent_id,shadow_size,B_t_cell_count\n";
  for (int t : T.bfs) {
    const auto& nd = T.nodes[t];
    os << t << ',' << nd.cube.level << ',' << nd.cube.ax << ' ' << nd.cube.ay << ',' << nd.parent << ','
       << T.subtree_size[t] << ',' << T.B[t].size() << '\n';
  }
  return os.str();
}

}  // namespace vexlab
