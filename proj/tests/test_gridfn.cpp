#include <doctest.h>

#include "convexdom/gridfn.hpp"

using namespace convexdom;

namespace {

GridSpec grid1(int root_level, int cell_level) {
  return GridSpec{1, cell_level, DyadicCube{1, root_level, {0, 0}}};
}

GridFunction randfn(const GridSpec& g, int n, int m, Rng& rng) {
  GridFunction f(g, n, m);
  for (auto& v : f.values) v = rng.normal();
  return f;
}

}  // namespace

TEST_CASE("vector norms and norming functionals are dual") {
  Rng rng(1);
  for (NormTag t : {NormTag::Euclidean, NormTag::Sum, NormTag::Max}) {
    for (int trial = 0; trial < 20; ++trial) {
      int m = 3;
      std::vector<double> v(m), psi(m);
      for (auto& x : v) x = rng.normal();
      norming_vector(v.data(), m, t, psi.data());
      double dot = 0;
      for (int j = 0; j < m; ++j) dot += v[j] * psi[j];
      CHECK(dot == doctest::Approx(vec_norm(v.data(), m, t)).epsilon(1e-12));
      CHECK(vec_norm(psi.data(), m, dual_tag(t)) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("lp_average matches a direct sum") {
  Rng rng(2);
  GridSpec g = grid1(0, -4);
  GridFunction f = randfn(g, 1, 2, rng);
  CellMask region(g);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    if (rng.uniform() < 0.7) region.set(i);
  double p = 2.7;
  double s = 0;
  std::int64_t cnt = 0;
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    if (region.get(i)) {
      s += std::pow(std::hypot(f.at(i, 0, 0), f.at(i, 0, 1)), p);
      ++cnt;
    }
  CHECK(lp_average(f, region, p) == doctest::Approx(std::pow(s / double(cnt), 1 / p)));
  double full = 0;
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    full += std::pow(std::hypot(f.at(i, 0, 0), f.at(i, 0, 1)), p);
  CHECK(lp_norm(f, p) ==
        doctest::Approx(std::pow(full * g.cell_volume(), 1 / p)).epsilon(1e-9));
}

TEST_CASE("weak and Lorentz norms are exact on indicators") {
  GridSpec g = grid1(0, -5);
  GridFunction f(g, 1, 1);
  for (std::int64_t i = 0; i < 12; ++i) f.at(i) = 3.0;
  double meas = 12.0 * g.cell_volume();
  CHECK(weak_lp_norm(f, 1.5) == doctest::Approx(3.0 * std::pow(meas, 1 / 1.5)));
  CHECK(lorentz_q1_norm(f, 2.5) == doctest::Approx(3.0 * std::pow(meas, 1 / 2.5)));
  // two-level staircase: weak norm is the best of the two level products
  GridFunction h = f;
  for (std::int64_t i = 0; i < 4; ++i) h.at(i) = 7.0;
  double lvl7 = 7.0 * std::pow(4 * g.cell_volume(), 0.5);
  double lvl3 = 3.0 * std::pow(meas, 0.5);
  CHECK(weak_lp_norm(h, 2.0) == doctest::Approx(std::max(lvl3, lvl7)));
}

TEST_CASE("finite differences and shifts vanish outside the root") {
  Rng rng(4);
  GridSpec g = grid1(0, -3);
  GridFunction f = randfn(g, 2, 1, rng);
  auto d = finite_difference(f, {3, 0});
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    for (int k = 0; k < 2; ++k) {
      double expect = (i + 3 < g.cell_count() ? f.at(i + 3, k) : 0.0) - f.at(i, k);
      CHECK(d.at(i, k) == doctest::Approx(expect));
    }
}

TEST_CASE("convolution matches the double loop") {
  Rng rng(5);
  GridSpec g = grid1(0, -3);
  GridFunction f = randfn(g, 1, 1, rng);
  GridFunction k = randfn(g, 1, 1, rng);
  GridFunction out = convolve(f, k);
  for (std::int64_t x = 0; x < g.cell_count(); ++x) {
    double s = 0;
    for (std::int64_t y = 0; y < g.cell_count(); ++y)
      if (x - y >= 0 && x - y < g.cell_count()) s += k.at(y) * f.at(x - y) * g.cell_volume();
    CHECK(out.at(x) == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("conditional expectation is an averaging projection") {
  Rng rng(6);
  GridSpec g = grid1(0, -4);
  GridFunction f = randfn(g, 1, 1, rng);
  GridFunction e2 = conditional_expectation(f, 2);  // blocks of side 2^-2 = 4 cells
  for (std::int64_t b = 0; b < 4; ++b) {
    double avg = 0;
    for (std::int64_t i = 0; i < 4; ++i) avg += f.at(4 * b + i) / 4.0;
    for (std::int64_t i = 0; i < 4; ++i) CHECK(e2.at(4 * b + i) == doctest::Approx(avg));
  }
  GridFunction again = conditional_expectation(e2, 2);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    CHECK(again.at(i) == doctest::Approx(e2.at(i)));
  // coarser projection absorbs finer
  GridFunction e1 = conditional_expectation(f, 1);
  GridFunction e12 = conditional_expectation(e2, 1);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    CHECK(e12.at(i) == doctest::Approx(e1.at(i)));
}

TEST_CASE("dyadic maximal function agrees with brute force over ancestors") {
  Rng rng(7);
  GridSpec g = grid1(0, -5);
  GridFunction f = randfn(g, 1, 1, rng);
  double p = 1.8;
  GridFunction M = maximal_function(f, p, MaximalMode::Dyadic);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    double best = 0;
    DyadicCube q = g.cell_cube(c);
    while (true) {
      CellMask mask = CellMask::from_cube(g, q);
      best = std::max(best, lp_average(f, mask, p));
      if (q.level >= g.root.level) break;
      q = q.parent();
    }
    CHECK(M.at(c) == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("all-cubes maximal dominates dyadic and windowed averages") {
  Rng rng(8);
  GridSpec g = grid1(0, -4);
  GridFunction f = randfn(g, 1, 1, rng);
  GridFunction Md = maximal_function(f, 2, MaximalMode::Dyadic);
  GridFunction Ma = maximal_function(f, 2, MaximalMode::AllGridCubes);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) CHECK(Ma.at(c) >= Md.at(c) - 1e-12);
  // oracle: every aligned window of cells containing c is dominated
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    for (std::int64_t lo = 0; lo <= c; ++lo)
      for (std::int64_t hi = c + 1; hi <= g.cell_count(); ++hi) {
        double s = 0;
        for (std::int64_t i = lo; i < hi; ++i) s += f.at(i) * f.at(i);
        double avg = std::sqrt(s / double(hi - lo));
        // cube windows have dyadic side; only compare those
        std::int64_t len = hi - lo;
        if ((len & (len - 1)) == 0) CHECK(Ma.at(c) >= avg - 1e-10);
      }
}

TEST_CASE("dilation re-indexes exactly") {
  Rng rng(9);
  GridSpec g = grid1(0, -4);
  GridFunction f = randfn(g, 1, 1, rng);
  GridFunction d = dilate(f, -1);  // x -> f(x/2) on the level-1 root
  CHECK(d.grid.root.level == g.root.level + 1);
  CHECK(lp_norm(d, 2.0) == doctest::Approx(std::sqrt(2.0) * lp_norm(f, 2.0)));
}

TEST_CASE("combine and matrix_apply are linear-algebra exact") {
  Rng rng(10);
  GridSpec g = grid1(0, -3);
  GridFunction f = randfn(g, 3, 2, rng);
  Eigen::VectorXd u = rng.normal_vector(3);
  GridFunction c = combine(f, u);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += u(k) * f.at(i, k, j);
      CHECK(c.at(i, 0, j) == doctest::Approx(s));
    }
  Eigen::MatrixXd R = rng.spd(3);
  GridFunction rf = matrix_apply(R, f);
  for (std::int64_t i = 0; i < g.cell_count(); ++i)
    for (int a = 0; a < 3; ++a)
      for (int j = 0; j < 2; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += R(a, k) * f.at(i, k, j);
        CHECK(rf.at(i, a, j) == doctest::Approx(s));
      }
}
