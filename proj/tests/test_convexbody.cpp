#include <doctest.h>

#include "convexdom/convexbody.hpp"

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

// direct-loop evaluation of ||sum_i u_i f_i||_{avg-L^p(region)}
double oracle_support(const GridFunction& f, const CellMask& region, double p,
                      const Eigen::VectorXd& u) {
  double s = 0;
  std::int64_t cnt = 0;
  for (std::int64_t c = 0; c < f.grid.cell_count(); ++c) {
    if (!region.get(c)) continue;
    std::vector<double> v(static_cast<std::size_t>(f.m), 0.0);
    for (int i = 0; i < f.n; ++i)
      for (int j = 0; j < f.m; ++j) v[std::size_t(j)] += u(i) * f.at(c, i, j);
    s += std::pow(vec_norm(v.data(), f.m, f.norm), p);
    ++cnt;
  }
  return std::pow(s / double(cnt), 1.0 / p);
}

}  // namespace

TEST_CASE("support function matches the direct loop and the Gram fast path") {
  Rng rng(1);
  GridSpec g = grid1(0, -4);
  for (double p : {1.5, 2.0, 3.0}) {
    GridFunction f = randfn(g, 3, 2, rng);
    CellMask region(g, true);
    BodyOracle body(f, region, p);
    for (int t = 0; t < 25; ++t) {
      Eigen::VectorXd u = rng.sphere(3);
      CHECK(body.support(u) == doctest::Approx(oracle_support(f, region, p, u)).epsilon(1e-10));
    }
    if (p == 2.0) {
      CHECK(body.gram_exact());
      Eigen::MatrixXd M = body.gram();
      for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd u = rng.sphere(3);
        CHECK(body.support(u) == doctest::Approx(std::sqrt(u.dot(M * u))).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("norming points are boundary maximizers") {
  Rng rng(2);
  GridSpec g = grid1(0, -4);
  GridFunction f = randfn(g, 3, 1, rng);
  CellMask region(g, true);
  for (double p : {1.5, 2.0, 3.0}) {
    BodyOracle body(f, region, p);
    for (int t = 0; t < 15; ++t) {
      Eigen::VectorXd u = rng.sphere(3);
      Eigen::VectorXd a = body.norming_point(u);
      CHECK(a.dot(u) == doctest::Approx(body.support(u)).epsilon(1e-8));
      // membership: a stays under every other support value
      for (int s = 0; s < 20; ++s) {
        Eigen::VectorXd v = rng.sphere(3);
        CHECK(a.dot(v) <= body.support(v) + 1e-8);
      }
    }
  }
}

TEST_CASE("inscribed ellipsoid of an ellipsoid is itself") {
  Rng rng(3);
  for (int n : {2, 3}) {
    Eigen::MatrixXd A = rng.spd(n, 20.0);
    auto h = [&](const Eigen::VectorXd& u) { return (A * u).norm(); };
    auto [E, cert] = john_ellipsoid(h, n, JohnOptions{0.02, 2048, 5, 60});
    CHECK(cert.passed);
    for (int t = 0; t < 40; ++t) {
      Eigen::VectorXd u = rng.sphere(n);
      CHECK(E.support(u) / h(u) == doctest::Approx(1.0).epsilon(0.05));
    }
  }
}

TEST_CASE("unit ball body yields the identity ellipsoid") {
  auto h = [](const Eigen::VectorXd& u) { return u.norm(); };
  auto [E, cert] = john_ellipsoid(h, 3, JohnOptions{0.02, 2048, 7, 60});
  CHECK(cert.passed);
  CHECK((E.shape - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-6);
}

TEST_CASE("sandwich certificate holds for a cross-polytope support") {
  // h(u) = max_i |u_i|: inscribed ellipsoid must fit within the sandwich
  auto h = [](const Eigen::VectorXd& u) { return u.cwiseAbs().maxCoeff(); };
  auto [E, cert] = john_ellipsoid(h, 3, JohnOptions{0.02, 4096, 9, 60});
  CHECK(cert.passed);
  CHECK(cert.max_inner_ratio <= 1.0 + 0.02 + 1e-9);
  CHECK(cert.max_outer_ratio <= (1.0 + 0.02) + 1e-9);
}

TEST_CASE("body_dot ascent agrees with the Gram-exact value at p = 2") {
  Rng rng(4);
  GridSpec g = grid1(0, -4);
  for (int trial = 0; trial < 5; ++trial) {
    GridFunction f = randfn(g, 2, 1, rng), gg = randfn(g, 2, 1, rng);
    CellMask region(g, true);
    BodyOracle F(f, region, 2.0), G(gg, region, 2.0);
    auto exact = body_dot(F, G, BodyDotMethod::GramExact, 5);
    auto ascent = body_dot(F, G, BodyDotMethod::Ascent, 5);
    CHECK(ascent.value == doctest::Approx(exact.value).epsilon(0.02));
    CHECK(ascent.value <= exact.value * (1 + 1e-9));  // ascent is a lower bound
  }
}

TEST_CASE("reducing transform isotropizes the body") {
  Rng rng(5);
  GridSpec g = grid1(0, -4);
  for (double p : {1.5, 2.0}) {
    GridFunction f = randfn(g, 3, 1, rng);
    // skew the components so the raw body is far from round
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
      f.at(c, 1) *= 40.0;
      f.at(c, 2) *= 0.1;
    }
    CellMask region(g, true);
    auto map = reducing_transform(f, region, p);
    CHECK(map.rank == 3);
    GridFunction rf = matrix_apply(map.R, f);
    BodyOracle body(rf, region, p);
    for (int t = 0; t < 30; ++t) {
      Eigen::VectorXd u = rng.sphere(3);
      double h = body.support(u);
      CHECK(h >= 1.0 / 1.1);
      CHECK(h <= std::sqrt(3.0) * 1.1);
    }
  }
}

TEST_CASE("transform duality bound holds on random fixtures") {
  Rng rng(6);
  GridSpec g = grid1(0, -4);
  for (int trial = 0; trial < 4; ++trial) {
    GridFunction f = randfn(g, 2, 1, rng), h = randfn(g, 2, 1, rng);
    CellMask region(g, true);
    auto rep = lemma_th1_check(f, h, region, region, 2.0, 2.0);
    CHECK(rep.ok);
    CHECK(rep.lhs <= rep.bound * (1 + 1e-9));
  }
}
