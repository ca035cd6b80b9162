#include "convexdom/weights.hpp"

#include <cmath>

namespace convexdom {

MatrixWeight MatrixWeight::power(double beta) const {
  MatrixWeight out = *this;
  for (auto& M : out.cells) M = spd_power(M, beta);
  return out;
}

void MatrixWeight::check_spd() const {
  for (const auto& M : cells) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.eigenvalues().minCoeff() <= 0) throw std::domain_error("weight cell not SPD");
  }
}

std::vector<DyadicCube> all_dyadic_subcubes(const GridSpec& grid) {
  std::vector<DyadicCube> out;
  for (int lvl = grid.root.level; lvl >= grid.cell_level; --lvl) {
    std::int64_t per = std::int64_t(1) << (grid.root.level - lvl);
    for (std::int64_t by = 0; by < (grid.d == 2 ? per : 1); ++by)
      for (std::int64_t bx = 0; bx < per; ++bx) {
        DyadicCube q{grid.d, lvl, {grid.root.anchor[0] * per + bx, grid.root.anchor[1] * per + by}};
        out.push_back(q);
      }
  }
  return out;
}

namespace {

std::vector<std::int64_t> cube_cells(const GridSpec& g, const DyadicCube& Q) {
  CellBox b = g.clip(g.cell_box(Q));
  std::vector<std::int64_t> cells;
  if (b.empty(g.d)) return cells;
  if (g.d == 1) {
    for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x) cells.push_back(g.index_of(x));
  } else {
    for (std::int64_t y = b.lo[1]; y < b.hi[1]; ++y)
      for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x) cells.push_back(g.index_of(x, y));
  }
  return cells;
}

}  // namespace

double a_r_constant(const MatrixWeight& W, double r, const std::vector<DyadicCube>& cubes) {
  if (r <= 1 || std::isinf(r)) throw std::invalid_argument("a_r_constant: r in (1,inf)");
  double rp = conjugate(r);
  MatrixWeight P = W.power(1.0 / r);
  MatrixWeight M = W.power(-1.0 / r);
  double best = 0;
  for (const auto& Q : cubes) {
    auto cells = cube_cells(W.grid, Q);
    if (cells.empty()) continue;
    double outer = 0;
    for (auto x : cells) {
      double inner = 0;
      for (auto y : cells) inner += std::pow(op_norm(P.at(x) * M.at(y)), rp);
      inner /= double(cells.size());
      outer += std::pow(inner, r / rp);
    }
    best = std::max(best, outer / double(cells.size()));
  }
  return best;
}

double a_r_constant(const MatrixWeight& W, double r) {
  return a_r_constant(W, r, all_dyadic_subcubes(W.grid));
}

GridFunction scalar_weight(const MatrixWeight& W, double r, const Eigen::VectorXd& y) {
  if (y.norm() == 0) throw std::invalid_argument("scalar_weight: y must be nonzero");
  MatrixWeight P = W.power(1.0 / r);
  GridFunction w(W.grid, 1, 1);
  for (std::int64_t c = 0; c < W.grid.cell_count(); ++c)
    w.at(c) = std::pow((P.at(c) * y).norm(), r);
  return w;
}

double scalar_a_r(const GridFunction& w, double r, const std::vector<DyadicCube>& cubes) {
  double best = 0;
  for (const auto& Q : cubes) {
    auto cells = cube_cells(w.grid, Q);
    if (cells.empty()) continue;
    double m = 0, minv = 0;
    for (auto c : cells) {
      m += w.at(c);
      minv += std::pow(w.at(c), -1.0 / (r - 1.0));
    }
    m /= double(cells.size());
    minv /= double(cells.size());
    best = std::max(best, m * std::pow(minv, r - 1.0));
  }
  return best;
}

ScalarSupResult scalar_sup_a_r(const MatrixWeight& W, double r, int directions,
                               std::uint64_t seed) {
  if (directions <= 0) directions = W.n == 2 ? 64 : 256;
  auto cubes = all_dyadic_subcubes(W.grid);
  ScalarSupResult res;
  for (const auto& y : sphere_directions(W.n, directions, seed)) {
    double v = scalar_a_r(scalar_weight(W, r, y), r, cubes);
    if (v > res.value) {
      res.value = v;
      res.best_direction = y;
    }
  }
  return res;
}

double rh_ts_constant(const MatrixWeight& W, double t, double s,
                      const std::vector<DyadicCube>& cubes, int directions, std::uint64_t seed) {
  if (t < 1 || s <= 1) throw std::invalid_argument("rh_ts_constant: need t >= 1, s > 1");
  if (directions <= 0) directions = W.n == 2 ? 64 : 256;
  double best = 0;
  for (const auto& y : sphere_directions(W.n, directions, seed)) {
    GridFunction w = scalar_weight(W, t, y);
    for (const auto& Q : cubes) {
      auto cells = cube_cells(W.grid, Q);
      if (cells.empty()) continue;
      double ms = 0, m = 0;
      for (auto c : cells) {
        ms += std::pow(w.at(c), s);
        m += w.at(c);
      }
      ms /= double(cells.size());
      m /= double(cells.size());
      best = std::max(best, std::pow(ms, 1.0 / s) / m);
    }
  }
  return best;
}

double rh_ts_constant(const MatrixWeight& W, double t, double s) {
  return rh_ts_constant(W, t, s, all_dyadic_subcubes(W.grid));
}

namespace {

struct NormField {
  std::vector<Eigen::MatrixXd> P;   // per-cell factor
  std::vector<Eigen::MatrixXd> P2;  // its square
  double r;

  double rho(const Eigen::VectorXd& x) const {
    double s = 0;
    for (const auto& M : P) s += std::pow((M * x).norm(), r);
    return std::pow(s / double(P.size()), 1.0 / r);
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
    double rv = rho(x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t k = 0; k < P.size(); ++k) {
      double nv = (P[k] * x).norm();
      if (nv > 0) g += std::pow(nv, r - 2.0) * (P2[k] * x);
    }
    return std::pow(rv, 1.0 - r) * g / double(P.size());
  }
};

// matrix A with rho(x) <= |Ax| <= sqrt(n)(1+tol) rho(x): gauge of the maximal
// inscribed ellipsoid of {rho <= 1}, via the enclosing ellipsoid of the polar
// body sampled at the gradient boundary points
Eigen::MatrixXd reduce_norm_field(const NormField& nf, int n, const JohnOptions& opts,
                                  double* lo, double* hi) {
  auto dirs = sphere_directions(n, std::max(2 * n * n + 64, 128), opts.seed);
  std::vector<Eigen::VectorXd> pts;
  for (const auto& u : dirs) pts.push_back(nf.grad(u));

  Eigen::MatrixXd G, A;
  for (int round = 0; round < 30; ++round) {
    Eigen::MatrixXd P(n, int(pts.size()));
    for (int k = 0; k < int(pts.size()); ++k) P.col(k) = pts[std::size_t(k)];
    G = mvee_symmetric(P, 1e-9);
    A = spd_power(G, -0.5);
    // worst gauge violation rho(x) > |Ax|
    double worst = 0;
    Eigen::VectorXd uworst;
    for (const auto& u : dirs) {
      double ratio = nf.rho(u) / (A * u).norm();
      if (ratio > worst) {
        worst = ratio;
        uworst = u;
      }
    }
    if (worst <= 1.0 + 1e-8) break;
    // refine locally: maximize rho(x)^2 / x^T G^{-1} x
    Eigen::VectorXd u = uworst;
    Eigen::MatrixXd H = A * A;  // G^{-1}
    double cur = std::pow(nf.rho(u), 2) / u.dot(H * u), step = 0.2;
    for (int it = 0; it < 60; ++it) {
      double rv = nf.rho(u);
      Eigen::VectorXd grad = 2 * rv * nf.grad(u) / u.dot(H * u) -
                             2 * rv * rv * (H * u) / std::pow(u.dot(H * u), 2);
      grad -= grad.dot(u) * u;
      Eigen::VectorXd trial = (u + step * grad).normalized();
      double tv = std::pow(nf.rho(trial), 2) / trial.dot(H * trial);
      if (tv > cur) {
        u = trial;
        cur = tv;
        step *= 1.3;
      } else {
        step *= 0.4;
        if (step < 1e-10) break;
      }
    }
    pts.push_back(nf.grad(u));
  }
  *lo = kInf;
  *hi = 0;
  for (const auto& u : dirs) {
    double ratio = (A * u).norm() / nf.rho(u);
    *lo = std::min(*lo, ratio);
    *hi = std::max(*hi, ratio);
  }
  return A;
}

}  // namespace

ReducingMatrices reducing_matrices(const MatrixWeight& W, const DyadicCube& Q, double r,
                                   const JohnOptions& opts) {
  if (r <= 1 || std::isinf(r)) throw std::invalid_argument("reducing_matrices: r in (1,inf)");
  auto cells = cube_cells(W.grid, Q);
  if (cells.empty()) throw std::invalid_argument("reducing_matrices: cube outside grid");
  double rp = conjugate(r);
  NormField na, nb;
  na.r = r;
  nb.r = rp;
  MatrixWeight Pw = W.power(1.0 / r);
  MatrixWeight Mw = W.power(-1.0 / r);
  for (auto c : cells) {
    na.P.push_back(Pw.at(c));
    na.P2.push_back(Pw.at(c) * Pw.at(c));
    nb.P.push_back(Mw.at(c));
    nb.P2.push_back(Mw.at(c) * Mw.at(c));
  }
  ReducingMatrices out;
  out.A = reduce_norm_field(na, W.n, opts, &out.cert_lower_a, &out.cert_upper_a);
  out.B = reduce_norm_field(nb, W.n, opts, &out.cert_lower_b, &out.cert_upper_b);
  return out;
}

MatrixWeight dual_weight(const MatrixWeight& W, double r) {
  return W.power(-conjugate(r) / r);
}

DualityReport duality_report(const MatrixWeight& W, double r) {
  DualityReport rep;
  double rp = conjugate(r);
  rep.lhs = std::pow(a_r_constant(W, r), 1.0 / r);
  rep.rhs = std::pow(a_r_constant(dual_weight(W, r), rp), 1.0 / rp);
  rep.ratio = rep.lhs / rep.rhs;
  return rep;
}

CordesReport cordes_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double alpha) {
  if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("cordes_check: alpha in (0,1)");
  CordesReport rep;
  rep.lhs = op_norm(spd_power(A, alpha) * spd_power(B, alpha));
  rep.rhs = std::pow(op_norm(A * B), alpha);
  rep.ok = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

namespace {

Eigen::MatrixXd spectral_exp(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd ev = es.eigenvalues().array().exp();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double center_norm(const GridSpec& g, std::int64_t c, const std::array<double, 2>& x0) {
  auto ctr = g.cell_center(c);
  double dx = ctr[0] - x0[0], dy = g.d == 2 ? ctr[1] - x0[1] : 0;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

MatrixWeight weight_generator(const GridSpec& grid, int n, WeightKind kind,
                              const WeightParams& params, std::uint64_t seed) {
  MatrixWeight W(grid, n);
  const std::int64_t N = grid.cell_count();
  const double d = double(grid.d);
  auto check_power = [&](double a) {
    double lo = -d, hi = d * (params.r - 1.0);
    if (a <= lo || a >= hi)
      throw std::invalid_argument("weight_generator: power exponent outside (" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + ")");
  };
  switch (kind) {
    case WeightKind::Identity:
      break;
    case WeightKind::ScalarPower: {
      check_power(params.alpha);
      for (std::int64_t c = 0; c < N; ++c)
        W.at(c) = std::pow(center_norm(grid, c, params.x0), params.alpha) *
                  Eigen::MatrixXd::Identity(n, n);
      break;
    }
    case WeightKind::RotatedDiagonal: {
      check_power(params.alpha);
      check_power(-params.beta);
      if (n < 2) throw std::invalid_argument("weight_generator: rotated diagonal needs n >= 2");
      Eigen::MatrixXd U = Eigen::MatrixXd::Identity(n, n);
      double th = params.rotation;
      U(0, 0) = std::cos(th);
      U(0, 1) = -std::sin(th);
      U(1, 0) = std::sin(th);
      U(1, 1) = std::cos(th);
      for (std::int64_t c = 0; c < N; ++c) {
        double t = center_norm(grid, c, params.x0);
        Eigen::VectorXd diag = Eigen::VectorXd::Ones(n);
        diag(0) = std::pow(t, params.alpha);
        diag(1) = std::pow(t, -params.beta);
        W.at(c) = U * diag.asDiagonal() * U.transpose();
      }
      break;
    }
    case WeightKind::RandomLogSpd: {
      Rng rng(seed);
      int entries = n * (n + 1) / 2;
      std::vector<std::vector<double>> noise(static_cast<std::size_t>(entries),
                                             std::vector<double>(static_cast<std::size_t>(N)));
      for (auto& ch : noise)
        for (auto& v : ch) v = rng.normal();
      // crude moving-average smoothing along the linear cell order
      int rad = std::max(0, params.smoothness);
      for (auto& ch : noise) {
        std::vector<double> sm(ch.size());
        for (std::int64_t c = 0; c < N; ++c) {
          double s = 0;
          int cnt = 0;
          for (std::int64_t o = -rad; o <= rad; ++o) {
            std::int64_t j = c + o;
            if (j < 0 || j >= N) continue;
            s += ch[std::size_t(j)];
            ++cnt;
          }
          sm[std::size_t(c)] = s / cnt;
        }
        ch = sm;
      }
      for (std::int64_t c = 0; c < N; ++c) {
        Eigen::MatrixXd S(n, n);
        int e = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            S(i, j) = S(j, i) = params.amplitude * noise[std::size_t(e)][std::size_t(c)];
            ++e;
          }
        W.at(c) = spectral_exp(S);
      }
      break;
    }
  }
  return W;
}

double lambda_exponent(double alpha, double beta, double eta) {
  if (alpha < 1 || beta < 1 || eta <= 0 || eta >= 1 + 1e-12)
    throw std::invalid_argument("lambda_exponent: need alpha,beta >= 1, eta in (0,1]");
  double bp = conjugate(beta);
  if (std::isinf(bp)) return alpha;  // conjugate of +inf is 1
  double x = bp * (1.0 + eta);
  return alpha * (x / (x - 1.0));
}

DeltaSigma delta_sigma(const MatrixWeight& W, double r) {
  DeltaSigma ds;
  double d1 = double(W.grid.d);
  double sc = scalar_sup_a_r(W, r).value;
  ds.delta = 1.0 / (std::pow(2.0, d1 + 1.0) * sc - 1.0);
  double rp = conjugate(r);
  double scs = scalar_sup_a_r(dual_weight(W, r), rp).value;
  ds.sigma = 1.0 / (std::pow(2.0, d1 + 1.0) * scs - 1.0);
  return ds;
}

}  // namespace convexdom
