#include "convexdom/convexbody.hpp"

#include <algorithm>
#include <cmath>

namespace convexdom {

double BodyOracle::support(const Eigen::VectorXd& u) const {
  return lp_average(combine(*f, u), region, p);
}

Eigen::VectorXd BodyOracle::norming_point(const Eigen::VectorXd& u) const {
  const GridFunction& fn = *f;
  const GridSpec& g = fn.grid;
  GridFunction Fu = combine(fn, u);
  double h = lp_average(Fu, region, p);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(fn.n);
  if (h == 0.0) return a;
  const std::int64_t N = g.cell_count();
  const std::int64_t cnt = region.count();
  std::vector<double> psi(std::size_t(fn.m));
  if (std::isinf(p)) {
    std::int64_t cstar = -1;
    double best = -1;
    for (std::int64_t c = 0; c < N; ++c)
      if (region.get(c) && Fu.magnitude(c) > best) {
        best = Fu.magnitude(c);
        cstar = c;
      }
    norming_vector(Fu.cell_ptr(cstar), fn.m, fn.norm, psi.data());
    for (int i = 0; i < fn.n; ++i)
      for (int j = 0; j < fn.m; ++j) a(i) += fn.at(cstar, i, j) * psi[std::size_t(j)];
    return a;
  }
  for (std::int64_t c = 0; c < N; ++c) {
    if (!region.get(c)) continue;
    double mag = Fu.magnitude(c);
    if (mag == 0.0) continue;
    norming_vector(Fu.cell_ptr(c), fn.m, fn.norm, psi.data());
    double w = std::pow(mag / h, p - 1.0) / double(cnt);
    for (int i = 0; i < fn.n; ++i)
      for (int j = 0; j < fn.m; ++j) a(i) += fn.at(c, i, j) * psi[std::size_t(j)] * w;
  }
  return a;
}

Eigen::MatrixXd BodyOracle::gram() const {
  const GridFunction& fn = *f;
  const std::int64_t N = fn.grid.cell_count();
  const std::int64_t cnt = region.count();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(fn.n, fn.n);
  for (std::int64_t c = 0; c < N; ++c) {
    if (!region.get(c)) continue;
    for (int i = 0; i < fn.n; ++i)
      for (int k = i; k < fn.n; ++k) {
        double s = 0;
        for (int j = 0; j < fn.m; ++j) s += fn.at(c, i, j) * fn.at(c, k, j);
        M(i, k) += s;
      }
  }
  M /= double(cnt);
  return M.selfadjointView<Eigen::Upper>();
}

namespace {

// symmetric PSD square root tolerating zero eigenvalues
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd numeric_grad(const SupportFn& h, const Eigen::VectorXd& u, double delta) {
  Eigen::VectorXd g(u.size());
  Eigen::VectorXd v = u;
  for (int i = 0; i < u.size(); ++i) {
    v(i) = u(i) + delta;
    double hp = h(v);
    v(i) = u(i) - delta;
    double hm = h(v);
    v(i) = u(i);
    g(i) = (hp - hm) / (2 * delta);
  }
  return g;
}

// maximize u^T G u / h(u)^2 over the unit sphere by projected gradient ascent
Eigen::VectorXd ascend_ratio(const Eigen::MatrixXd& G, const SupportFn& h, Eigen::VectorXd u,
                             int iters = 80) {
  u.normalize();
  auto val = [&](const Eigen::VectorXd& x) {
    double hv = h(x);
    return hv > 0 ? x.dot(G * x) / (hv * hv) : 0.0;
  };
  double cur = val(u), step = 0.25;
  for (int it = 0; it < iters; ++it) {
    double hv = h(u);
    if (hv <= 0) break;
    Eigen::VectorXd grad = 2.0 * (G * u) / (hv * hv) -
                           2.0 * u.dot(G * u) / (hv * hv * hv) * numeric_grad(h, u, 1e-6);
    grad -= grad.dot(u) * u;
    if (grad.norm() < 1e-14) break;
    Eigen::VectorXd trial = (u + step * grad).normalized();
    double tv = val(trial);
    if (tv > cur) {
      u = trial;
      cur = tv;
      step *= 1.4;
    } else {
      step *= 0.4;
      if (step < 1e-10) break;
    }
  }
  return u;
}

// minimize h on the unit sphere (degeneracy probing)
Eigen::VectorXd descend_support(const SupportFn& h, Eigen::VectorXd u, int iters = 120) {
  u.normalize();
  double cur = h(u), step = 0.3;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd grad = numeric_grad(h, u, 1e-7);
    grad -= grad.dot(u) * u;
    if (grad.norm() < 1e-15) break;
    Eigen::VectorXd trial = (u - step * grad).normalized();
    double tv = h(trial);
    if (tv < cur) {
      u = trial;
      cur = tv;
      step *= 1.3;
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }
  return u;
}

std::pair<Ellipsoid, JohnCertificate> john_full_rank(const SupportFn& h, int n,
                                                    const JohnOptions& opts,
                                                    const std::vector<Eigen::VectorXd>& dirs,
                                                    const std::vector<double>& hv) {
  const int M = int(dirs.size());
  std::vector<Eigen::VectorXd> pts;
  int warm = std::min(2 * n * n + 8, M);
  for (int k = 0; k < warm; ++k) pts.push_back(dirs[std::size_t(k)] / hv[std::size_t(k)]);

  Eigen::MatrixXd G;
  int rounds = 0;
  for (; rounds < opts.max_rounds; ++rounds) {
    Eigen::MatrixXd P(n, int(pts.size()));
    for (int k = 0; k < int(pts.size()); ++k) P.col(k) = pts[std::size_t(k)];
    G = mvee_symmetric(P, 1e-8);

    // worst sampled inner violations h_E(u) > h(u)
    std::vector<int> order(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) order[std::size_t(k)] = k;
    auto ratio = [&](int k) {
      return dirs[std::size_t(k)].dot(G * dirs[std::size_t(k)]) / (hv[std::size_t(k)] * hv[std::size_t(k)]);
    };
    std::partial_sort(order.begin(), order.begin() + std::min(3, M), order.end(),
                      [&](int a, int b) { return ratio(a) > ratio(b); });
    bool improved = false;
    for (int t = 0; t < std::min(3, M); ++t) {
      Eigen::VectorXd u = ascend_ratio(G, h, dirs[std::size_t(order[std::size_t(t)])]);
      double hu = h(u);
      if (hu <= 0) continue;
      if (u.dot(G * u) / (hu * hu) > 1.0 + 5e-8) {
        pts.push_back(u / hu);
        improved = true;
      }
    }
    if (!improved) break;
  }

  JohnCertificate cert;
  cert.directions = M;
  cert.rounds = rounds;
  double inner2 = 0, outer = 0;
  for (int k = 0; k < M; ++k) {
    double q = dirs[std::size_t(k)].dot(G * dirs[std::size_t(k)]);
    inner2 = std::max(inner2, q / (hv[std::size_t(k)] * hv[std::size_t(k)]));
    outer = std::max(outer, hv[std::size_t(k)] / (std::sqrt(double(n)) * std::sqrt(q)));
  }
  cert.max_inner_ratio = std::sqrt(inner2);
  cert.max_outer_ratio = outer;
  cert.passed = cert.max_inner_ratio <= 1.0 + opts.tol && cert.max_outer_ratio <= 1.0 + opts.tol;

  Ellipsoid E;
  E.shape = psd_sqrt(G);
  E.rank = n;
  return {E, cert};
}

}  // namespace

std::pair<Ellipsoid, JohnCertificate> john_ellipsoid(const SupportFn& h, int n,
                                                    const JohnOptions& opts) {
  auto dirs = sphere_directions(n, opts.directions, opts.seed);
  std::vector<double> hv(dirs.size());
  double scale = 0, hmin = kInf;
  int kmin = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    hv[k] = h(dirs[k]);
    scale = std::max(scale, hv[k]);
    if (hv[k] < hmin) {
      hmin = hv[k];
      kmin = int(k);
    }
  }
  if (scale <= 0) throw std::domain_error("john_ellipsoid: zero body");

  // oracle axioms: even, homogeneous, subadditive (up to tolerance)
  Rng rng(opts.seed ^ 0x9e3779b9ull);
  for (int t = 0; t < 12; ++t) {
    Eigen::VectorXd u = rng.sphere(n), v = rng.sphere(n);
    if (std::abs(h(u) - h(-u)) > 1e-6 * scale)
      throw std::invalid_argument("john_ellipsoid: oracle not even");
    if (std::abs(h(2 * u) - 2 * h(u)) > 1e-6 * scale)
      throw std::invalid_argument("john_ellipsoid: oracle not homogeneous");
    if (h(u + v) > h(u) + h(v) + 1e-6 * scale)
      throw std::invalid_argument("john_ellipsoid: oracle not subadditive");
  }

  // degeneracy: peel off null directions of the support function one by one,
  // each time restricting the descent to the orthogonal complement found so far
  std::vector<Eigen::VectorXd> kernel;
  auto complement_basis = [&]() {
    int r = n - int(kernel.size());
    if (kernel.empty()) return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd Kmat(n, int(kernel.size()));
    for (int i = 0; i < int(kernel.size()); ++i) Kmat.col(i) = kernel[std::size_t(i)];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Kmat);
    return Eigen::MatrixXd(Eigen::MatrixXd(qr.householderQ()).rightCols(r));
  };
  while (int(kernel.size()) < n) {
    int r = n - int(kernel.size());
    Eigen::MatrixXd B = complement_basis();
    SupportFn hres = [&h, B](const Eigen::VectorXd& v) { return h(B * v); };
    Eigen::VectorXd vbest = kernel.empty() ? Eigen::VectorXd(dirs[std::size_t(kmin)]) : rng.sphere(r);
    double m = hres(vbest);
    for (int t = 0; t < 96; ++t) {
      Eigen::VectorXd v = rng.sphere(r);
      double val = hres(v);
      if (val < m) {
        m = val;
        vbest = v;
      }
    }
    Eigen::VectorXd v = descend_support(hres, vbest);
    if (hres(v) >= 1e-8 * scale) break;
    kernel.push_back((B * v).normalized());
  }
  int r = n - int(kernel.size());
  if (r <= 0) throw std::domain_error("john_ellipsoid: zero body");
  if (kernel.empty()) return john_full_rank(h, n, opts, dirs, hv);

  Eigen::MatrixXd B = complement_basis();
  SupportFn hred = [&h, B](const Eigen::VectorXd& v) { return h(B * v); };
  JohnOptions ropts = opts;
  auto rdirs = sphere_directions(r, opts.directions, opts.seed + 1);
  std::vector<double> rhv(rdirs.size());
  for (std::size_t k = 0; k < rdirs.size(); ++k) rhv[k] = hred(rdirs[k]);
  auto [Ered, cert] = john_full_rank(hred, r, ropts, rdirs, rhv);
  Ellipsoid E;
  E.shape = B * Ered.shape * B.transpose();
  E.rank = r;
  return {E, cert};
}

BodyDotResult body_dot(const BodyOracle& F, const BodyOracle& G, BodyDotMethod method,
                       std::uint64_t seed) {
  const int n = F.dim();
  if (G.dim() != n) throw std::invalid_argument("body_dot: dimension mismatch");
  BodyDotResult res;

  if ((method == BodyDotMethod::Auto || method == BodyDotMethod::GramExact) && F.gram_exact() &&
      G.gram_exact()) {
    Eigen::MatrixXd Sf = psd_sqrt(F.gram()), Sg = psd_sqrt(G.gram());
    res.value = op_norm(Sf * Sg);
    res.method = "gram-exact";
    res.certified = true;
    return res;
  }
  if (method == BodyDotMethod::GramExact)
    throw std::invalid_argument("body_dot: gram method needs p = 2 bodies");

  // alternating ascent over boundary points
  Rng rng(seed);
  double ascent = 0;
  for (int s = 0; s < 8; ++s) {
    Eigen::VectorXd u = rng.sphere(n);
    for (int it = 0; it < 40; ++it) {
      Eigen::VectorXd a = F.norming_point(u);
      if (a.norm() < 1e-300) break;
      Eigen::VectorXd b = G.norming_point(a);
      double v = a.dot(b);
      if (v <= ascent + 1e-15 && it > 2) {
        ascent = std::max(ascent, v);
        break;
      }
      ascent = std::max(ascent, v);
      u = b;
      if (u.norm() < 1e-300) break;
    }
  }
  res.ascent_value = ascent;

  bool want_grid = (method == BodyDotMethod::GridCertified) ||
                   (method == BodyDotMethod::Auto && n <= 3);
  if (want_grid) {
    double best = 0;
    if (n == 2) {
      for (int k = 0; k < 1024; ++k) {
        double th = 3.14159265358979323846 * k / 1024.0;
        Eigen::VectorXd u(2);
        u << std::cos(th), std::sin(th);
        best = std::max(best, G.support(F.norming_point(u)));
        best = std::max(best, F.support(G.norming_point(u)));
      }
    } else {
      for (const auto& u : sphere_directions(n, 2048, seed + 11)) {
        best = std::max(best, G.support(F.norming_point(u)));
        best = std::max(best, F.support(G.norming_point(u)));
      }
    }
    res.grid_value = best;
    res.value = std::max(ascent, best);
    res.method = "ascent+grid";
    res.certified = true;
  } else {
    res.value = ascent;
    res.method = "ascent";
    res.certified = false;
  }
  return res;
}

ReducingMap reducing_transform(const GridFunction& f, const CellMask& region, double p,
                               const JohnOptions& opts) {
  const GridSpec& g = f.grid;
  const std::int64_t N = g.cell_count();
  std::vector<std::int64_t> cells;
  for (std::int64_t c = 0; c < N; ++c)
    if (region.get(c)) cells.push_back(c);
  if (cells.empty()) throw std::invalid_argument("reducing_transform: empty region");

  Eigen::MatrixXd A(std::int64_t(cells.size()) * f.m, f.n);
  for (std::size_t r = 0; r < cells.size(); ++r)
    for (int j = 0; j < f.m; ++j)
      for (int i = 0; i < f.n; ++i) A(std::int64_t(r) * f.m + j, i) = f.at(cells[r], i, j);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  if (smax <= 0) throw std::domain_error("reducing_transform: zero tuple");
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-10 * smax) ++rank;
  Eigen::MatrixXd Q = svd.matrixV().leftCols(rank);

  BodyOracle body(f, region, p);
  Eigen::MatrixXd Gred;  // reduced body covariance: h(Qv)^2 ~ v^T Gred v
  if (body.gram_exact()) {
    Gred = Q.transpose() * body.gram() * Q;
  } else {
    SupportFn hred = [&body, Q](const Eigen::VectorXd& v) {
      return body.support(Q * v);
    };
    auto [E, cert] = john_ellipsoid(hred, rank, opts);
    Gred = E.shape * E.shape;
  }
  Eigen::MatrixXd Rp = spd_power(Gred, -0.5);
  Eigen::MatrixXd Rpi = spd_power(Gred, 0.5);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(f.n, f.n);
  ReducingMap map;
  map.R = Q * Rp * Q.transpose() + (I - Q * Q.transpose());
  map.Rinvt = Q * Rpi * Q.transpose() + (I - Q * Q.transpose());
  map.basis = Q;
  map.rank = rank;
  return map;
}

TH1Report lemma_th1_check(const GridFunction& f, const GridFunction& g, const CellMask& region_f,
                          const CellMask& region_g, double p, double qprime, double tol) {
  ReducingMap rm = reducing_transform(f, region_f, p);
  GridFunction fr = matrix_apply(rm.R, f);
  GridFunction gr = matrix_apply(rm.Rinvt, g);
  TH1Report rep;
  rep.rank = rm.rank;
  for (int i = 0; i < f.n; ++i)
    rep.lhs += lp_average(fr.component(i), region_f, p) * lp_average(gr.component(i), region_g, qprime);
  BodyOracle F(fr, region_f, p), G(gr, region_g, qprime);
  rep.rhs = body_dot(F, G).value;
  rep.bound = std::pow(double(f.n), 1.5) * (1.0 + tol) * rep.rhs;
  rep.ok = rep.lhs <= rep.bound * (1.0 + 1e-9);
  return rep;
}

}  // namespace convexdom
