#include <doctest.h>

#include "convexdom/weights.hpp"

using namespace convexdom;

namespace {

GridSpec grid1(int root_level, int cell_level) {
  return GridSpec{1, cell_level, DyadicCube{1, root_level, {0, 0}}};
}

// brute-force scalar Muckenhoupt constant over the dyadic cubes
double oracle_scalar_a_r(const std::vector<double>& w, const GridSpec& g, double r) {
  double rr = conjugate(r);
  double best = 0;
  for (const auto& q : all_dyadic_subcubes(g)) {
    CellBox b = g.cell_box(q);
    double s1 = 0, s2 = 0;
    std::int64_t cnt = b.hi[0] - b.lo[0];
    for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x) {
      double v = w[std::size_t(g.index_of(x))];
      s1 += v;
      s2 += std::pow(v, -rr / r);
    }
    best = std::max(best, (s1 / double(cnt)) * std::pow(s2 / double(cnt), r / rr));
  }
  return best;
}

}  // namespace

TEST_CASE("identity weight has all constants equal to one") {
  GridSpec g = grid1(0, -4);
  MatrixWeight W(g, 3);
  CHECK(a_r_constant(W, 2.5) == doctest::Approx(1.0));
  CHECK(scalar_sup_a_r(W, 2.5).value == doctest::Approx(1.0));
  CHECK(rh_ts_constant(W, 2.0, 2.0) == doctest::Approx(1.0));
  auto dual = duality_report(W, 2.5);
  CHECK(dual.lhs == doctest::Approx(dual.rhs));
}

TEST_CASE("one-dimensional weights reduce to the scalar constant") {
  Rng rng(2);
  GridSpec g = grid1(0, -4);
  for (int trial = 0; trial < 5; ++trial) {
    MatrixWeight W(g, 1);
    std::vector<double> w(static_cast<std::size_t>(g.cell_count()));
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
      w[std::size_t(c)] = std::exp(rng.uniform(-1.5, 1.5));
      W.at(c)(0, 0) = w[std::size_t(c)];
    }
    double r = 2.0 + trial * 0.3;
    CHECK(a_r_constant(W, r) == doctest::Approx(oracle_scalar_a_r(w, g, r)).epsilon(1e-10));
  }
}

TEST_CASE("matrix powers are spectral") {
  Rng rng(3);
  GridSpec g = grid1(0, -2);
  MatrixWeight W(g, 3);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) W.at(c) = rng.spd(3);
  MatrixWeight half = W.power(0.5);
  MatrixWeight inv = W.power(-1.0);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    CHECK((half.at(c) * half.at(c) - W.at(c)).norm() <= 1e-10);
    CHECK((inv.at(c) * W.at(c) - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-10);
  }
}

TEST_CASE("matrix power inequality for exponents in (0,1)") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    int n = 2 + int(rng.next() % 4);
    auto rep = cordes_check(rng.spd(n, 50.0), rng.spd(n, 50.0), rng.uniform(0.05, 0.95));
    CHECK(rep.ok);
    CHECK(rep.lhs <= rep.rhs * (1 + 1e-10));
  }
}

TEST_CASE("power weights respect the admissible exponent range") {
  GridSpec g = grid1(0, -5);
  WeightParams params;
  params.r = 2.0;
  params.alpha = 0.6;  // inside (-d, d(r-1)) = (-1, 1)
  MatrixWeight W = weight_generator(g, 2, WeightKind::ScalarPower, params, 1);
  W.check_spd();
  double a_small = a_r_constant(W, 2.0);
  params.alpha = 0.9;
  MatrixWeight W2 = weight_generator(g, 2, WeightKind::ScalarPower, params, 1);
  CHECK(a_r_constant(W2, 2.0) > a_small);  // constant blows up toward the endpoint
  params.alpha = 1.5;  // outside the class
  CHECK_THROWS(weight_generator(g, 2, WeightKind::ScalarPower, params, 1));
}

TEST_CASE("dual weight duality is exact for commuting weights") {
  Rng rng(5);
  GridSpec g = grid1(0, -4);
  // diagonal weights: [W]_{A_r}^{1/r} = [Sigma]_{A_{r'}}^{1/r'} classically
  MatrixWeight W(g, 1);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) W.at(c)(0, 0) = std::exp(rng.uniform(-1, 1));
  auto rep = duality_report(W, 2.4);
  CHECK(rep.lhs == doctest::Approx(rep.rhs).epsilon(1e-10));
}

TEST_CASE("reducing matrices sandwich the averaged weight norms") {
  Rng rng(6);
  GridSpec g = grid1(0, -4);
  WeightParams params;
  params.amplitude = 0.8;
  MatrixWeight W = weight_generator(g, 2, WeightKind::RandomLogSpd, params, 3);
  auto mats = reducing_matrices(W, g.root, 2.0);
  CHECK(mats.cert_lower_a >= 1.0 / (std::sqrt(2.0) * 1.1));
  CHECK(mats.cert_upper_a <= std::sqrt(2.0) * 1.1);
  CHECK(mats.cert_lower_b >= 1.0 / (std::sqrt(2.0) * 1.1));
  CHECK(mats.cert_upper_b <= std::sqrt(2.0) * 1.1);
}

TEST_CASE("conjugate-exponent arithmetic") {
  CHECK(conjugate(2.0) == doctest::Approx(2.0));
  CHECK(conjugate(4.0) == doctest::Approx(4.0 / 3.0));
  CHECK(std::isinf(conjugate(1.0)));
  // lambda = alpha * (beta'(1+eta))': beta' = 2, x = 3, x' = 3/2
  CHECK(lambda_exponent(2.0, 2.0, 0.5) == doctest::Approx(3.0));
  CHECK_THROWS(lambda_exponent(2.0, 2.0, 0.0));
}

TEST_CASE("delta and sigma are positive for in-class weights") {
  GridSpec g = grid1(0, -4);
  WeightParams params;
  params.alpha = 0.4;
  params.r = 2.0;
  MatrixWeight W = weight_generator(g, 2, WeightKind::ScalarPower, params, 1);
  auto ds = delta_sigma(W, 2.0);
  CHECK(ds.delta > 0);
  CHECK(ds.sigma > 0);
}
