#include "convexdom/dyadic.hpp"

#include <algorithm>
#include <sstream>

namespace convexdom {

std::string DyadicCube::str() const {
  std::ostringstream os;
  os << "Q(level=" << level << ", anchor=" << anchor[0];
  if (d == 2) os << "," << anchor[1];
  os << ")";
  return os.str();
}

TripleMask cube_triple(const DyadicCube& Q, const GridSpec& grid) {
  if (Q.level < grid.cell_level) throw std::invalid_argument("cube_triple: cube finer than cells");
  CellBox b = grid.cell_box(Q);
  std::int64_t s = std::int64_t(1) << (Q.level - grid.cell_level);
  CellBox t = b;
  for (int i = 0; i < grid.d; ++i) {
    t.lo[i] -= s;
    t.hi[i] += s;
  }
  TripleMask out;
  out.mask = CellMask(grid);
  CellBox clipped = grid.clip(t);
  if (clipped.empty(grid.d)) {
    out.outside = true;
    return out;
  }
  out.mask.fill_box(t);
  for (int i = 0; i < grid.d; ++i)
    if (clipped.lo[i] != t.lo[i] || clipped.hi[i] != t.hi[i]) out.clipped = true;
  return out;
}

namespace {

std::int64_t box_dist_sq(const CellBox& a, const CellBox& b, int d) {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) {
    std::int64_t g = std::max<std::int64_t>({0, a.lo[i] - b.hi[i], b.lo[i] - a.hi[i]});
    s += g * g;
  }
  return s;
}

}  // namespace

std::vector<std::int64_t> distance_sq_to_complement(const CellMask& omega) {
  const GridSpec& g = omega.grid;
  const std::int64_t n = g.cell_count();
  CellBox rb = g.root_box();
  std::vector<std::int64_t> comp;
  for (std::int64_t i = 0; i < n; ++i)
    if (!omega.get(i)) comp.push_back(i);

  std::vector<std::int64_t> dist(std::size_t(n), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!omega.get(i)) continue;
    auto c = g.coords_of(i);
    CellBox cb;
    for (int ax = 0; ax < g.d; ++ax) {
      cb.lo[ax] = c[ax];
      cb.hi[ax] = c[ax] + 1;
    }
    // distance to the root exterior: a single-axis gap to the nearest face
    std::int64_t ext = std::numeric_limits<std::int64_t>::max();
    for (int ax = 0; ax < g.d; ++ax)
      ext = std::min({ext, cb.lo[ax] - rb.lo[ax], rb.hi[ax] - cb.hi[ax]});
    std::int64_t best = ext * ext;
    for (std::int64_t j : comp) {
      auto cj = g.coords_of(j);
      CellBox bj;
      for (int ax = 0; ax < g.d; ++ax) {
        bj.lo[ax] = cj[ax];
        bj.hi[ax] = cj[ax] + 1;
      }
      best = std::min(best, box_dist_sq(cb, bj, g.d));
      if (best == 0) break;
    }
    dist[std::size_t(i)] = best;
  }
  return dist;
}

namespace {

struct WhitneyCtx {
  const CellMask& omega;
  const std::vector<std::int64_t>& dist_sq;
  std::vector<WhitneyEntry>& out;

  // min over the cube's cells of the cell-to-complement distance (squared)
  std::int64_t cube_dist_sq(const DyadicCube& q) const {
    const GridSpec& g = omega.grid;
    CellBox b = g.cell_box(q);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    if (g.d == 1) {
      for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x)
        best = std::min(best, dist_sq[std::size_t(g.index_of(x))]);
    } else {
      for (std::int64_t y = b.lo[1]; y < b.hi[1]; ++y)
        for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x)
          best = std::min(best, dist_sq[std::size_t(g.index_of(x, y))]);
    }
    return best;
  }

  enum class Cover { None, Partial, Full };
  Cover coverage(const DyadicCube& q) const {
    const GridSpec& g = omega.grid;
    CellBox b = g.cell_box(q);
    std::int64_t total = 1, inside = 0;
    for (int i = 0; i < g.d; ++i) total *= (b.hi[i] - b.lo[i]);
    if (g.d == 1) {
      for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x) inside += omega.get(g.index_of(x));
    } else {
      for (std::int64_t y = b.lo[1]; y < b.hi[1]; ++y)
        for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x) inside += omega.get(g.index_of(x, y));
    }
    if (inside == 0) return Cover::None;
    return inside == total ? Cover::Full : Cover::Partial;
  }

  void process(const DyadicCube& q) {
    const GridSpec& g = omega.grid;
    Cover cov = coverage(q);
    if (cov == Cover::None) return;
    // side in cell units; the Whitney tests compare squared quantities so all
    // arithmetic stays in exact integers: dist^2 vs 25*d*side^2 / 144*d*side^2
    std::int64_t side = std::int64_t(1) << (q.level - g.cell_level);
    std::int64_t diam2 = std::int64_t(g.d) * side * side;
    if (cov == Cover::Full) {
      std::int64_t ds = cube_dist_sq(q);
      if (ds >= 25 * diam2) {
        out.push_back({q, ds <= 144 * diam2, true});
        return;
      }
      if (q.level == g.cell_level) {
        out.push_back({q, ds <= 144 * diam2, false});
        return;
      }
    } else if (q.level == g.cell_level) {
      return;  // partial coverage impossible at cell scale
    }
    for (const auto& ch : q.children()) process(ch);
  }
};

}  // namespace

WhitneyDecomposition whitney_decompose(const CellMask& omega) {
  WhitneyDecomposition w;
  w.omega = omega;
  if (omega.empty()) return w;
  auto dist_sq = distance_sq_to_complement(omega);
  WhitneyCtx ctx{omega, dist_sq, w.cubes};
  ctx.process(omega.grid.root);
  std::sort(w.cubes.begin(), w.cubes.end(), [](const WhitneyEntry& a, const WhitneyEntry& b) {
    if (a.cube.level != b.cube.level) return a.cube.level < b.cube.level;
    if (a.cube.anchor[0] != b.cube.anchor[0]) return a.cube.anchor[0] < b.cube.anchor[0];
    return a.cube.anchor[1] < b.cube.anchor[1];
  });
  return w;
}

SparseReport verify_sparse(const SparseFamily& family) {
  SparseReport rep;
  const auto& es = family.entries;
  for (size_t i = 0; i < es.size(); ++i) {
    const GridSpec& g = es[i].witness.grid;
    CellMask cube_mask = CellMask::from_cube(g, es[i].cube);
    if (!es[i].witness.subset_of(cube_mask)) {
      rep.contained = false;
      rep.violations.push_back("witness not inside " + es[i].cube.str());
    }
    double ratio = es[i].witness.measure() / es[i].cube.volume();
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (ratio < family.gamma) {
      rep.measure_ok = false;
      rep.violations.push_back("witness measure below gamma for " + es[i].cube.str());
    }
    for (size_t j = i + 1; j < es.size(); ++j) {
      if (es[i].witness.grid == es[j].witness.grid && !es[i].witness.disjoint_from(es[j].witness)) {
        rep.disjoint = false;
        rep.violations.push_back("witness overlap: " + es[i].cube.str() + " vs " + es[j].cube.str());
      }
    }
  }
  return rep;
}

}  // namespace convexdom
