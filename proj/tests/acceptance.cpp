// Acceptance battery: one pass/fail line per criterion, nonzero exit on any
// failure.  Every tolerance below is part of the project contract.
#include <chrono>
#include <cstdio>
#include <vector>

#include "convexdom/domination.hpp"

using namespace convexdom;

namespace {

int failures = 0;

void report(int idx, bool ok, const char* what, double witness = 0, double elapsed = -1) {
  if (!ok) ++failures;
  std::printf("criterion %2d: %s - %s (witness %.6g", idx, ok ? "pass" : "FAIL", what, witness);
  if (elapsed >= 0) std::printf(", %.2fs", elapsed);
  std::printf(")\n");
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridSpec grid1(int root_level, int cell_level) {
  return GridSpec{1, cell_level, DyadicCube{1, root_level, {0, 0}}};
}

GridFunction randfn(const GridSpec& g, int n, int m, Rng& rng) {
  GridFunction f(g, n, m);
  for (auto& v : f.values) v = rng.normal();
  return f;
}

// 1: operator-ordering inequality for fractional powers, 1000 pairs under 5s
void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = -kInf;
  bool ok = true;
  const double alphas[] = {0.25, 0.5, 0.75};
  for (int t = 0; t < 1000; ++t) {
    int n = 2 + int(rng.next() % 4);
    auto rep = cordes_check(rng.spd(n, 30.0), rng.spd(n, 30.0), alphas[t % 3]);
    worst = std::max(worst, rep.lhs - rep.rhs);
    ok = ok && rep.lhs <= rep.rhs + 1e-9;
  }
  double el = seconds_since(t0);
  report(1, ok && el < 5.0, "fractional power inequality, 1000 SPD pairs", worst, el);
}

// 2: inscribed-ellipsoid sandwich over random norms plus the identity ball
void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(102);
  bool ok = true;
  double worst = 0;
  for (int n : {2, 3, 4}) {
    for (int t = 0; t < 50; ++t) {
      Eigen::MatrixXd A(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
      double pe = 1.0 + rng.uniform(0.2, 2.0);
      double pc = conjugate(pe);
      auto h = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd v = A.transpose() * u;
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += std::pow(std::abs(v(i)), pc);
        return std::pow(acc, 1.0 / pc);
      };
      auto [E, cert] = john_ellipsoid(h, n, JohnOptions{0.02, 4096, 1000 + std::uint64_t(t), 60});
      ok = ok && cert.passed;
      worst = std::max(worst, std::max(cert.max_inner_ratio, cert.max_outer_ratio));
    }
  }
  auto [E, cert] = john_ellipsoid([](const Eigen::VectorXd& u) { return u.norm(); }, 3,
                                  JohnOptions{0.02, 4096, 5, 60});
  double iderr = (E.shape - Eigen::MatrixXd::Identity(3, 3)).norm();
  ok = ok && cert.passed && iderr <= 1e-6;
  double el = seconds_since(t0);
  report(2, ok && el < 60.0, "ellipsoid sandwich, 150 norms + identity ball", worst, el);
}

// 3: support function vs a test-side dual-ball witness, 2% band
void criterion3() {
  Rng rng(103);
  GridSpec g = grid1(0, -6);  // 64 cells
  bool ok = true;
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    double p = (t % 3 == 0) ? 1.5 : (t % 3 == 1 ? 2.0 : 3.0);
    GridFunction f = randfn(g, 2, 1, rng);
    CellMask region(g, true);
    BodyOracle body(f, region, p);
    Eigen::VectorXd u = rng.sphere(2);
    // dual witness, built here from scratch: the optimal functional for
    // h(u) = ||g_u||_{avg-p} is phi = |g_u|^{p-1} sgn(g_u) / ||g_u||^{p-1};
    // the attained value is the Holder pairing avg <g_u, phi>
    const std::int64_t N = g.cell_count();
    std::vector<double> gu(static_cast<std::size_t>(N));
    double normp = 0;
    for (std::int64_t c = 0; c < N; ++c) {
      gu[std::size_t(c)] = u(0) * f.at(c, 0) + u(1) * f.at(c, 1);
      normp += std::pow(std::abs(gu[std::size_t(c)]), p);
    }
    normp = std::pow(normp / double(N), 1.0 / p);
    double attained = 0;
    if (normp > 0) {
      for (std::int64_t c = 0; c < N; ++c) {
        double phi = std::pow(std::abs(gu[std::size_t(c)]), p - 1.0) *
                     (gu[std::size_t(c)] >= 0 ? 1.0 : -1.0) / std::pow(normp, p - 1.0);
        attained += gu[std::size_t(c)] * phi;
      }
      attained /= double(N);
    }
    double h = body.support(u);
    double rel = std::abs(h - attained) / std::max(1e-12, std::abs(h));
    worst = std::max(worst, rel);
    ok = ok && rel <= 0.02;
  }
  report(3, ok, "support function vs dual-ball witness, 100 cases", worst);
}

// 4: bilinear bound through the reducing transforms, 200 fixtures
void criterion4() {
  Rng rng(104);
  GridSpec g = grid1(0, -5);
  bool ok = true;
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    int n = 2 + (t % 2);
    double p = (t % 2 == 0) ? 2.0 : 1.5;
    GridFunction f = randfn(g, n, 1, rng), h = randfn(g, n, 1, rng);
    CellMask region(g, true);
    auto rep = lemma_th1_check(f, h, region, region, p, conjugate(p), 0.05);
    ok = ok && rep.ok;
    if (rep.bound > 0) worst = std::max(worst, rep.lhs / rep.bound);
  }
  report(4, ok, "bilinear bound vs n^{3/2}(1.05) body product, 200 fixtures", worst);
}

// 5: single-scale domination with the exact operator constant, 100 cases
void criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(105);
  GridSpec g = grid1(0, -5);
  bool ok = true;
  double worst = 0;
  Kernel kernels[] = {smooth_bump_kernel(1, -2), random_kernel(1, -2, 1, 1, 9)};
  double a_circ[2];
  for (int ki = 0; ki < 2; ++ki) {
    SingleScaleOp op{-2, kernels[ki]};
    a_circ[ki] = operator_norm_l2(
        g, 1, 1, [&](const GridFunction& x) { return op.apply(x); },
        [&](const GridFunction& x) { return op.adjoint_apply(x); }, 3);
  }
  for (int t = 0; t < 100; ++t) {
    int ki = t % 2;
    SingleScaleOp op{-2, kernels[ki]};
    GridFunction f = randfn(g, 2, 1, rng), h = randfn(g, 2, 1, rng);
    auto cert = single_scale_dominate(op, a_circ[ki], f, h, 2.0, 2.0);
    ok = ok && cert.passed;
    worst = std::max(worst, cert.ratio);
  }
  double el = seconds_since(t0);
  report(5, ok && el < 120.0, "single-scale domination, 100 cases, exact constant", worst, el);
}

// 6 + 7: sparse validity and splitting invariants over a 20-seed battery
void criteria6and7() {
  GridSpec g = grid1(0, -6);
  Kernel k = smooth_bump_kernel(1, -2);
  BRSFamily fam = make_family(k, -4, -2);
  certify(fam, g, 2.0, 2.0, 1.0, 1);
  bool ok6 = true, ok7 = true;
  double min_witness = kInf, worst_recon = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(1000 + seed);
    GridFunction f = randfn(g, 2, 1, rng), h = randfn(g, 2, 1, rng);
    DominationOptions opts;
    opts.seed = seed;
    try {
      auto cert = multiscale_dominate(fam, f, h, g.root, 2.0, 2.0, opts);
      ok6 = ok6 && verify_sparse(cert.family).valid() && cert.min_witness_ratio >= 0.5 - 1e-12;
      min_witness = std::min(min_witness, cert.min_witness_ratio);
    } catch (const std::exception&) {
      ok6 = false;
    }
    // splitting invariants on the same data
    auto om = build_omega(f, h, g.root, 2.0, 2.0, 0.5);
    ok7 = ok7 && om.ok;
    if (om.ok && !om.omega.empty()) {
      auto wd = whitney_decompose(om.omega);
      CellMask rootmask = CellMask::from_cube(g, g.root);
      std::vector<double> thr;
      for (int i = 0; i < 2; ++i)
        thr.push_back(om.tau_f * lp_average(f.component(i), rootmask, 2.0));
      auto cz = cz_decompose(f, om.omega, wd, g.root, 2.0, thr);
      ok7 = ok7 && cz.reconstruction_error <= 1e-12 && cz.mean_zero_error <= 1e-12 && cz.sup_ok;
      worst_recon = std::max(worst_recon, cz.reconstruction_error);
    }
  }
  report(6, ok6, "sparse families valid over 20 seeds, gamma 1/2", min_witness);
  report(7, ok7, "splitting reconstruction/mean-zero/dilate bounds", worst_recon);
}

// 8: stability of the ratio in family width and grid refinement
void criterion8() {
  Kernel k = smooth_bump_kernel(1, -1);
  double ratio_w0 = 0, ratio_w5 = 0, ratio_coarse = 0, ratio_fine = 0;
  bool ok = true;
  auto max_ratio = [&](const GridSpec& g, int n1, int n2) {
    BRSFamily fam = make_family(k, n1, n2);
    certify(fam, g, 2.0, 2.0, 1.0, 1);
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      // positive probes: indicators of dyadic blocks matching the finest
      // family scale, so each added coarser scale spreads the same mass over
      // twice the width and the per-scale contributions decay geometrically
      Rng rng(2000 + seed);
      std::int64_t side = g.cell_count() / 128;
      std::int64_t b = std::int64_t(rng.uniform(0.0, double(g.cell_count() / side)));
      GridFunction f(g, 2, 1), h(g, 2, 1);
      for (std::int64_t c = b * side; c < (b + 1) * side; ++c)
        for (int i = 0; i < 2; ++i) {
          f.at(c, i) = 1.0;
          h.at(c, i) = 1.0;
        }
      DominationOptions opts;
      opts.seed = seed;
      auto cert = multiscale_dominate(fam, f, h, g.root, 2.0, 2.0, opts);
      ok = ok && cert.passed;
      worst = std::max(worst, cert.ratio);
    }
    return worst;
  };
  GridSpec coarse = grid1(0, -9);
  // widen by adding coarser scales above a fixed finest scale: the added
  // operators average over ever larger regions, so their contributions shrink
  ratio_w0 = max_ratio(coarse, -6, -6);
  ratio_w5 = max_ratio(coarse, -6, -1);
  ok = ok && std::isfinite(ratio_w5) && ratio_w5 <= 2.0 * ratio_w0;
  ratio_coarse = max_ratio(coarse, -3, -1);
  ratio_fine = max_ratio(grid1(0, -10), -3, -1);
  std::printf("    [info] width 0 -> 5 ratio: %.6g -> %.6g; refinement %.6g -> %.6g\n",
              ratio_w0, ratio_w5, ratio_coarse, ratio_fine);
  report(8, ok, "ratio growth factor <= 2 from width 0 to 5", ratio_w5 / ratio_w0);
}

// 9: matrix Muckenhoupt constant on identity and scalar embeddings
void criterion9() {
  GridSpec g = grid1(0, -5);
  bool ok = true;
  double worst = 0;
  {
    MatrixWeight I(g, 3);
    ok = ok && std::abs(a_r_constant(I, 2.0) - 1.0) == 0.0;
  }
  Rng rng(109);
  for (int t = 0; t < 20; ++t) {
    double r = 2.0 + 0.1 * (t % 5);
    std::vector<double> w(static_cast<std::size_t>(g.cell_count()));
    MatrixWeight W(g, 2);
    GridFunction wf(g, 1, 1);
    for (std::int64_t c = 0; c < g.cell_count(); ++c) {
      w[std::size_t(c)] = std::exp(rng.uniform(-1.2, 1.2));
      W.at(c) = w[std::size_t(c)] * Eigen::MatrixXd::Identity(2, 2);
      wf.at(c) = w[std::size_t(c)];
    }
    double matrix = a_r_constant(W, r);
    double scalar = scalar_a_r(wf, r, all_dyadic_subcubes(g));
    double err = std::abs(matrix - scalar);
    worst = std::max(worst, err);
    ok = ok && err <= 1e-10;
  }
  report(9, ok, "identity weight exact, 20 scalar embeddings to 1e-10", worst);
}

// 10: power-weight sweep of the positive sparse operator at r = 2
void criterion10() {
  GridSpec g = grid1(0, -7);
  SparseFamily fam;
  fam.gamma = 0.5;
  DyadicCube Q = g.root;
  while (Q.level > g.cell_level) {
    DyadicCube child = Q.children()[0];
    fam.entries.push_back({Q, CellMask::from_cube(g, Q).setminus(CellMask::from_cube(g, child))});
    Q = child;
  }
  fam.entries.push_back({Q, CellMask::from_cube(g, Q)});
  bool ok = verify_sparse(fam).valid();
  std::vector<double> xs, ys;
  for (int i = 0; i < 8; ++i) {
    WeightParams wp;
    wp.alpha = 0.1 + 0.8 * double(i) / 7.0;
    wp.r = 2.0;
    MatrixWeight W = weight_generator(g, 1, WeightKind::ScalarPower, wp, 1);
    double at = a_r_constant(W, 2.0);
    double nrm = sparse_operator_norm(fam, W, 2.0, 5);
    xs.push_back(std::log(at));
    ys.push_back(std::log(nrm));
  }
  double slope = fit_slope(xs, ys);
  ok = ok && slope <= 1.5 + 0.1;
  report(10, ok, "power sweep slope <= 1.6 at r = 2, 8 points", slope);
}

// 11: commutator zero case and the exponent bookkeeping lemma
void criterion11() {
  Rng rng(111);
  GridSpec g = grid1(0, -6);
  Kernel k = smooth_bump_kernel(1, -2);
  BRSFamily fam = make_family(k, -4, -2);
  MatrixWeight B(g, 2);  // constant symbol
  double worst = 0;
  bool ok = true;
  for (int t = 0; t < 5; ++t) {
    GridFunction f = randfn(g, 2, 1, rng);
    worst = std::max(worst, commutator_apply(B, fam, f).max_abs());
  }
  ok = ok && worst <= 1e-12;
  ok = ok && c_qr(4.0, 2.0) == 0.2;
  auto rep = com_numbers_check(4.0, 2.0, 100);
  ok = ok && rep.ok && rep.min_constant > 0;
  report(11, ok, "constant-symbol commutator, c_qr(4,2), positive grid constant", worst);
}

// 12: frequency decomposition demo
void criterion12() {
  MultiplierSpec spec;
  auto rep = decompose_multiplier(spec, 21);
  bool ok = rep.telescoping_error <= 1e-12 && rep.partition_residual <= 1e-3 &&
            rep.reconstruction_error <= 1e-2;
  report(12, ok, "telescoping exact, partition 1e-3, identity rebuild 1e-2",
         rep.reconstruction_error);
}

// 13: regularity decay slope
void criterion13() {
  GridSpec g = grid1(0, -8);
  Kernel k = smooth_bump_kernel(1, -3);
  BRSFamily fam = make_family(k, -3, -2);
  certify(fam, g, 2.0, 2.0, 1.0, 1);
  // the asserted slope threshold is -min(kappa, 1/2) + 0.1; the probe theta
  // fed to the checker must sit strictly below min(1/p, kappa)
  double kappa = 1.0, target = std::min(kappa, 0.5);
  auto rep = regularity_decay_check(fam, g, 2.0, 2.0, 0.45, 5, 1);
  report(13, rep.ok && rep.slope <= -target + 0.1, "decay slope <= -min(kappa,0.5)+0.1, k=1..5",
         rep.slope);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criteria6and7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  criterion13();
  std::printf("%s (%d failed)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
              failures);
  return failures == 0 ? 0 : 1;
}
