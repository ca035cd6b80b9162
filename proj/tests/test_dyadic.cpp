#include <doctest.h>

#include "convexdom/dyadic.hpp"

using namespace convexdom;

namespace {

GridSpec grid1(int root_level, int cell_level) {
  return GridSpec{1, cell_level, DyadicCube{1, root_level, {0, 0}}};
}

GridSpec grid2(int root_level, int cell_level) {
  return GridSpec{2, cell_level, DyadicCube{2, root_level, {0, 0}}};
}

// brute-force squared box distance from a cell to the complement of omega
// (complement cells inside the root, plus the root exterior), in cell units
std::int64_t oracle_dist_sq(const CellMask& omega, std::int64_t cell) {
  const GridSpec& g = omega.grid;
  auto c = g.coords_of(cell);
  CellBox rb = g.root_box();
  // exterior: single-axis gap between the cell box and the nearest root face
  std::int64_t gap = std::min(c[0] - rb.lo[0], rb.hi[0] - (c[0] + 1));
  if (g.d == 2) gap = std::min({gap, c[1] - rb.lo[1], rb.hi[1] - (c[1] + 1)});
  std::int64_t best = gap * gap;
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    if (!omega.get(i)) {
      auto xy = g.coords_of(i);
      std::int64_t gx = std::max<std::int64_t>(std::llabs(xy[0] - c[0]) - 1, 0);
      std::int64_t gy = g.d == 2 ? std::max<std::int64_t>(std::llabs(xy[1] - c[1]) - 1, 0) : 0;
      best = std::min(best, gx * gx + gy * gy);
    }
  return best;
}

}  // namespace

TEST_CASE("cube geometry round trips") {
  DyadicCube q{2, -3, {5, -2}};
  CHECK(q.side() == doctest::Approx(0.125));
  CHECK(q.volume() == doctest::Approx(0.015625));
  for (const auto& ch : q.children()) {
    CHECK(ch.parent() == q);
    CHECK(q.contains(ch));
    CHECK_FALSE(ch.contains(q));
  }
  DyadicCube neg{1, 0, {-1, 0}};
  CHECK(neg.parent().anchor[0] == -1);  // [-1,0) sits inside [-2,0)
  CHECK(neg.parent().contains(neg));
}

TEST_CASE("grid indexing is a bijection") {
  for (const GridSpec& g : {grid1(1, -3), grid2(0, -2)}) {
    for (std::int64_t i = 0; i < g.cell_count(); ++i) {
      auto c = g.coords_of(i);
      CHECK(g.index_of(c[0], c[1]) == i);
      CHECK(g.cell_cube(i).level == g.cell_level);
    }
  }
}

TEST_CASE("cell_box footprint matches containment") {
  GridSpec g = grid2(0, -3);
  DyadicCube q{2, -1, {1, 0}};
  CellBox b = g.cell_box(q);
  CHECK(b.hi[0] - b.lo[0] == 4);
  for (std::int64_t i = 0; i < g.cell_count(); ++i) {
    auto c = g.coords_of(i);
    bool inside = c[0] >= b.lo[0] && c[0] < b.hi[0] && c[1] >= b.lo[1] && c[1] < b.hi[1];
    CHECK(inside == q.contains(g.cell_cube(i)));
  }
}

TEST_CASE("triple of a cube clips to the root") {
  GridSpec g = grid1(0, -4);
  DyadicCube q{1, -2, {0, 0}};  // [0, 1/4): 3Q = [-1/4, 1/2) clips to [0, 1/2)
  auto t = cube_triple(q, g);
  CHECK(t.clipped);
  CHECK(t.mask.measure() == doctest::Approx(0.5));
  DyadicCube mid{1, -2, {1, 0}};  // [1/4, 1/2): 3Q = [0, 3/4) fits
  auto tm = cube_triple(mid, g);
  CHECK_FALSE(tm.clipped);
  CHECK(tm.mask.measure() == doctest::Approx(0.75));
}

TEST_CASE("whitney cubes tile omega with oracle-checked distances") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    GridSpec g = trial % 2 ? grid2(0, -4) : grid1(0, -6);
    CellMask omega(g);
    // random union of boxes, kept strictly inside the root so distances bite
    for (int b = 0; b < 3; ++b) {
      CellBox box;
      std::int64_t n = g.cells_per_side();
      for (int ax = 0; ax < g.d; ++ax) {
        std::int64_t lo = rng.uniform_int(1, int(n) - 2);
        std::int64_t hi = lo + rng.uniform_int(1, int(n) / 2);
        box.lo[ax] = lo;
        box.hi[ax] = std::min(hi, n - 1);
      }
      omega.fill_box(box);
    }
    if (omega.empty()) continue;
    auto wd = whitney_decompose(omega);

    CellMask covered(g);
    for (const auto& e : wd.cubes) {
      CellMask pm = CellMask::from_cube(g, e.cube);
      CHECK(pm.subset_of(omega));
      CHECK(pm.disjoint_from(covered));
      covered = covered | pm;
      // oracle: min distance from the cube's cells to the complement
      std::int64_t best = -1;
      for (std::int64_t i = 0; i < g.cell_count(); ++i)
        if (pm.get(i)) {
          std::int64_t d2 = oracle_dist_sq(omega, i);
          if (best < 0 || d2 < best) best = d2;
        }
      double dist = std::sqrt(double(best)) * g.cell_side();
      if (e.upper_ok) CHECK(dist <= 12.0 * e.cube.diam() + 1e-12);
      if (e.lower_ok) CHECK(5.0 * e.cube.diam() <= dist + 1e-12);
    }
    CHECK(covered.count() == omega.count());
  }
}

TEST_CASE("sparse family verification flags each defect") {
  GridSpec g = grid1(0, -3);
  DyadicCube Q{1, 0, {0, 0}};
  DyadicCube L{1, -1, {0, 0}}, R{1, -1, {1, 0}};

  SparseFamily good;
  good.gamma = 0.5;
  good.entries.push_back({Q, CellMask::from_cube(g, L)});
  good.entries.push_back({R, CellMask::from_cube(g, R)});
  CHECK(verify_sparse(good).valid());

  SparseFamily overlap = good;
  overlap.entries[1].witness = CellMask::from_cube(g, L);  // collides and escapes R
  auto rep = verify_sparse(overlap);
  CHECK_FALSE(rep.valid());

  SparseFamily thin = good;
  thin.gamma = 0.9;  // half of Q no longer meets the 0.9 quota
  CHECK_FALSE(verify_sparse(thin).valid());
}

TEST_CASE("distance transform agrees with the brute-force oracle") {
  Rng rng(11);
  GridSpec g = grid2(0, -3);
  CellMask omega(g);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    if (rng.uniform() < 0.6) omega.set(i);
  auto dist = distance_sq_to_complement(omega);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    if (omega.get(i)) CHECK(dist[std::size_t(i)] == oracle_dist_sq(omega, i));
}
