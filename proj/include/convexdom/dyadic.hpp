#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "convexdom/util.hpp"

namespace convexdom {

// Dyadic cube of side 2^level: prod_i [anchor_i*2^level, (anchor_i+1)*2^level).
struct DyadicCube {
  int d = 1;
  int level = 0;
  std::array<std::int64_t, 2> anchor{0, 0};

  double side() const { return pow2(level); }
  double volume() const { return pow2(level * d); }
  double diam() const { return side() * std::sqrt(double(d)); }
  double lo(int axis) const { return double(anchor[axis]) * side(); }
  double hi(int axis) const { return double(anchor[axis] + 1) * side(); }

  DyadicCube parent() const {
    DyadicCube p{d, level + 1, anchor};
    for (int i = 0; i < d; ++i) p.anchor[i] = (anchor[i] >= 0) ? anchor[i] / 2 : (anchor[i] - 1) / 2;
    return p;
  }
  std::vector<DyadicCube> children() const {
    std::vector<DyadicCube> out;
    for (int c = 0; c < (1 << d); ++c) {
      DyadicCube ch{d, level - 1, anchor};
      for (int i = 0; i < d; ++i) ch.anchor[i] = 2 * anchor[i] + ((c >> i) & 1);
      out.push_back(ch);
    }
    return out;
  }
  bool contains(const DyadicCube& q) const {
    if (q.level > level) return false;
    DyadicCube a = q;
    while (a.level < level) a = a.parent();
    for (int i = 0; i < d; ++i)
      if (a.anchor[i] != anchor[i]) return false;
    return true;
  }
  bool operator==(const DyadicCube& o) const {
    return d == o.d && level == o.level && anchor[0] == o.anchor[0] && (d < 2 || anchor[1] == o.anchor[1]);
  }
  std::string str() const;
};

// Axis-aligned box in global cell coordinates, half-open [lo, hi).
struct CellBox {
  std::array<std::int64_t, 2> lo{0, 0}, hi{0, 0};
  bool empty(int d) const {
    for (int i = 0; i < d; ++i)
      if (hi[i] <= lo[i]) return true;
    return false;
  }
};

// Finite discretization: cells are the level-`cell_level` descendants of `root`.
struct GridSpec {
  int d = 1;
  int cell_level = 0;
  DyadicCube root{};

  int depth() const { return root.level - cell_level; }
  std::int64_t cells_per_side() const { return std::int64_t(1) << depth(); }
  std::int64_t cell_count() const {
    std::int64_t n = cells_per_side();
    return d == 1 ? n : n * n;
  }
  double cell_volume() const { return pow2(cell_level * d); }
  double cell_side() const { return pow2(cell_level); }
  std::int64_t base(int axis) const { return root.anchor[axis] << depth(); }

  // global cell coordinates <-> linear index
  std::int64_t index_of(std::int64_t cx, std::int64_t cy = 0) const {
    std::int64_t n = cells_per_side();
    std::int64_t ix = cx - base(0);
    if (ix < 0 || ix >= n) throw std::out_of_range("cell x outside root");
    if (d == 1) return ix;
    std::int64_t iy = cy - base(1);
    if (iy < 0 || iy >= n) throw std::out_of_range("cell y outside root");
    return iy * n + ix;
  }
  std::array<std::int64_t, 2> coords_of(std::int64_t idx) const {
    std::int64_t n = cells_per_side();
    if (d == 1) return {base(0) + idx, 0};
    return {base(0) + idx % n, base(1) + idx / n};
  }
  DyadicCube cell_cube(std::int64_t idx) const {
    auto c = coords_of(idx);
    return DyadicCube{d, cell_level, c};
  }
  std::array<double, 2> cell_center(std::int64_t idx) const {
    auto c = coords_of(idx);
    double s = cell_side();
    return {(double(c[0]) + 0.5) * s, d == 2 ? (double(c[1]) + 0.5) * s : 0.0};
  }
  // footprint of a dyadic cube (level >= cell_level) in cell coordinates
  CellBox cell_box(const DyadicCube& q) const {
    if (q.level < cell_level) throw std::invalid_argument("cube finer than cells");
    std::int64_t s = std::int64_t(1) << (q.level - cell_level);
    CellBox b;
    for (int i = 0; i < d; ++i) {
      b.lo[i] = q.anchor[i] * s;
      b.hi[i] = (q.anchor[i] + 1) * s;
    }
    return b;
  }
  CellBox root_box() const { return cell_box(root); }
  CellBox clip(CellBox b) const {
    CellBox r = root_box();
    for (int i = 0; i < d; ++i) {
      if (b.lo[i] < r.lo[i]) b.lo[i] = r.lo[i];
      if (b.hi[i] > r.hi[i]) b.hi[i] = r.hi[i];
    }
    return b;
  }
  bool contains_cube(const DyadicCube& q) const { return root.contains(q); }
  bool operator==(const GridSpec& o) const {
    return d == o.d && cell_level == o.cell_level && root == o.root;
  }
};

struct CellMask {
  GridSpec grid;
  std::vector<std::uint8_t> in;

  CellMask() = default;
  explicit CellMask(const GridSpec& g, bool fill = false)
      : grid(g), in(std::size_t(g.cell_count()), fill ? 1 : 0) {}

  bool get(std::int64_t idx) const { return in[std::size_t(idx)] != 0; }
  void set(std::int64_t idx, bool v = true) { in[std::size_t(idx)] = v ? 1 : 0; }
  std::int64_t count() const {
    std::int64_t c = 0;
    for (auto v : in) c += v;
    return c;
  }
  double measure() const { return double(count()) * grid.cell_volume(); }
  bool empty() const { return count() == 0; }
  CellMask complement() const {
    CellMask m = *this;
    for (auto& v : m.in) v = v ? 0 : 1;
    return m;
  }
  CellMask operator&(const CellMask& o) const {
    CellMask m = *this;
    for (size_t i = 0; i < in.size(); ++i) m.in[i] = in[i] & o.in[i];
    return m;
  }
  CellMask operator|(const CellMask& o) const {
    CellMask m = *this;
    for (size_t i = 0; i < in.size(); ++i) m.in[i] = in[i] | o.in[i];
    return m;
  }
  CellMask setminus(const CellMask& o) const {
    CellMask m = *this;
    for (size_t i = 0; i < in.size(); ++i) m.in[i] = in[i] & (o.in[i] ? 0 : 1);
    return m;
  }
  bool disjoint_from(const CellMask& o) const {
    for (size_t i = 0; i < in.size(); ++i)
      if (in[i] && o.in[i]) return false;
    return true;
  }
  bool subset_of(const CellMask& o) const {
    for (size_t i = 0; i < in.size(); ++i)
      if (in[i] && !o.in[i]) return false;
    return true;
  }
  void fill_box(const CellBox& b, bool v = true) {
    CellBox c = grid.clip(b);
    if (c.empty(grid.d)) return;
    if (grid.d == 1) {
      for (std::int64_t x = c.lo[0]; x < c.hi[0]; ++x) set(grid.index_of(x), v);
    } else {
      for (std::int64_t y = c.lo[1]; y < c.hi[1]; ++y)
        for (std::int64_t x = c.lo[0]; x < c.hi[0]; ++x) set(grid.index_of(x, y), v);
    }
  }
  static CellMask from_cube(const GridSpec& g, const DyadicCube& q) {
    CellMask m(g);
    m.fill_box(g.cell_box(q));
    return m;
  }
};

struct TripleMask {
  CellMask mask;
  bool clipped = false;   // 3Q stuck out of the root and was cut
  bool outside = false;   // 3Q misses the root entirely
};

// Concentric triple 3Q, intersected with the root cube.
TripleMask cube_triple(const DyadicCube& Q, const GridSpec& grid);

struct WhitneyEntry {
  DyadicCube cube;
  bool upper_ok = true;  // dist(P, complement) <= 12 diam(P)
  bool lower_ok = true;  // 5 diam(P) <= dist(P, complement)
};

struct WhitneyDecomposition {
  CellMask omega;
  std::vector<WhitneyEntry> cubes;
};

// Disjoint dyadic cubes covering omega with dist(P, omega^c) comparable to
// diam(P); constants 5 (lower, flagged at cell scale) and 12 (upper, exact).
WhitneyDecomposition whitney_decompose(const CellMask& omega);

struct SparseEntry {
  DyadicCube cube;
  CellMask witness;
};

struct SparseFamily {
  double gamma = 0.5;
  std::vector<SparseEntry> entries;
};

struct SparseReport {
  bool disjoint = true;
  bool contained = true;
  bool measure_ok = true;
  double min_ratio = kInf;
  std::vector<std::string> violations;
  bool valid() const { return disjoint && contained && measure_ok; }
};

SparseReport verify_sparse(const SparseFamily& family);

// squared Euclidean distance (in cell units) from each cell to the complement
// of `omega` in R^d (complement cells inside the root plus the root exterior)
std::vector<std::int64_t> distance_sq_to_complement(const CellMask& omega);

}  // namespace convexdom
