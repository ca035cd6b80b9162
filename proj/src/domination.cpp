#include "convexdom/domination.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace convexdom {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// Euclidean magnitude of the whole value block at a cell
double cell_mag(const GridFunction& f, std::int64_t c) {
  double acc = 0;
  const double* v = f.cell_ptr(c);
  for (int t = 0; t < f.n * f.m; ++t) acc += v[t] * v[t];
  return std::sqrt(acc);
}

// (int |f|_2^r)^{1/r} over all components
double full_lr_norm(const GridFunction& f, double r) {
  double acc = 0;
  for (std::int64_t c = 0; c < f.grid.cell_count(); ++c) acc += std::pow(cell_mag(f, c), r);
  return std::pow(acc * f.grid.cell_volume(), 1.0 / r);
}

std::vector<std::int64_t> mask_cells(const CellMask& m) {
  std::vector<std::int64_t> out;
  for (std::int64_t c = 0; c < m.grid.cell_count(); ++c)
    if (m.get(c)) out.push_back(c);
  return out;
}

}  // namespace

DominationCertificate single_scale_dominate(const SingleScaleOp& op, double a_circ,
                                            const GridFunction& f, const GridFunction& g,
                                            double p, double q, const DominationOptions& opts) {
  const GridSpec& grid = f.grid;
  if (!(g.grid == grid)) throw std::invalid_argument("single_scale_dominate: grid mismatch");
  if (op.j > grid.root.level)
    throw std::invalid_argument("single_scale_dominate: scale above the root cube");
  (void)op.block(grid);  // validates scale vs cell resolution
  double qp = conjugate(q);
  int n = f.n, d = grid.d;

  DominationCertificate cert;
  cert.family.gamma = 1.0;  // tiles own themselves

  // side-2^j tiles meeting supp f
  std::int64_t span = std::int64_t(1) << (op.j - grid.cell_level);
  std::set<std::array<std::int64_t, 2>> anchors;
  CellMask supp = f.support();
  for (std::int64_t c = 0; c < grid.cell_count(); ++c) {
    if (!supp.get(c)) continue;
    auto xy = grid.coords_of(c);
    anchors.insert({floor_div(xy[0], span), d == 2 ? floor_div(xy[1], span) : 0});
  }

  GridFunction Tf = op.apply(f);
  cert.lhs = std::abs(pairing(Tf, g));

  for (const auto& a : anchors) {
    DyadicCube Q{d, op.j, {a[0], a[1]}};
    SparseEntry e;
    e.cube = Q;
    e.witness = CellMask::from_cube(grid, Q);
    cert.family.entries.push_back(std::move(e));
    TripleMask trip = cube_triple(Q, grid);
    if (trip.mask.empty()) continue;
    BodyOracle F(f, trip.mask, p), G(g, trip.mask, qp);
    double bd = body_dot(F, G, BodyDotMethod::Auto, opts.seed).value;
    cert.rhs += trip.mask.measure() * bd;
    BodyOracle Fq(f, CellMask::from_cube(grid, Q), p), Gq(g, CellMask::from_cube(grid, Q), qp);
    cert.rhs_plain += Q.volume() * body_dot(Fq, Gq, BodyDotMethod::Auto, opts.seed).value;
  }
  double C = std::pow(3.0, double(d) * (1.0 / qp - 1.0 / conjugate(p))) * a_circ *
             std::pow(double(n), 1.5);
  cert.constant_budget = C * (1.0 + opts.tol_body);
  cert.ratio = cert.rhs > 0 ? cert.lhs / cert.rhs : 0.0;
  cert.passed = cert.lhs <= cert.constant_budget * cert.rhs + 1e-12 * (1.0 + cert.lhs);
  cert.min_witness_ratio = 1.0;
  return cert;
}

OmegaResult build_omega(const GridFunction& f, const GridFunction& g, const DyadicCube& Q0,
                        double p, double q, double gamma) {
  const GridSpec& grid = f.grid;
  double qp = conjugate(q);
  int n = f.n, d = grid.d;
  OmegaResult res;
  double base = std::pow(100.0, double(d)) * double(n) / (1.0 - gamma);
  res.tau_f = std::pow(base, 1.0 / p);
  res.tau_g = std::pow(base, 1.0 / qp);

  CellMask q0mask = CellMask::from_cube(grid, Q0);
  TripleMask trip = cube_triple(Q0, grid);
  CellMask omega(grid);
  double worst_measure = 0;
  int worst_comp = 0;
  const char* worst_side = "f";
  for (int i = 0; i < n; ++i) {
    GridFunction fi = f.component(i);
    double nf = lp_average(fi, q0mask, p);
    GridFunction Mf = maximal_function(fi, p, MaximalMode::AllGridCubes);
    CellMask lf(grid);
    for (std::int64_t c = 0; c < grid.cell_count(); ++c)
      if (Mf.at(c) > res.tau_f * nf) lf.set(c);
    GridFunction gi = g.component(i);
    double ng = lp_average(gi, trip.mask, qp);
    GridFunction Mg = maximal_function(gi, qp, MaximalMode::AllGridCubes);
    CellMask lg(grid);
    for (std::int64_t c = 0; c < grid.cell_count(); ++c)
      if (Mg.at(c) > res.tau_g * ng) lg.set(c);
    if (lf.measure() > worst_measure) {
      worst_measure = lf.measure();
      worst_comp = i;
      worst_side = "f";
    }
    if (lg.measure() > worst_measure) {
      worst_measure = lg.measure();
      worst_comp = i;
      worst_side = "g";
    }
    omega = omega | lf | lg;
  }
  omega = omega & trip.mask;  // level sets restricted to 3Q0
  res.omega = omega;
  res.eq = q0mask.setminus(omega);
  double q0m = q0mask.measure();
  res.ok = res.eq.measure() >= gamma * q0m - 1e-12 * q0m;
  if (!res.ok) {
    std::ostringstream os;
    os << "omega too large: |E| = " << res.eq.measure() << " < gamma|Q0| = " << gamma * q0m
       << " (worst component: " << worst_side << "_" << worst_comp << ")";
    res.diagnostic = os.str();
  }
  return res;
}

namespace {

// smallest grid-aligned square containing `box` that meets omega^c; scan is
// deterministic: increasing side, then position
CellBox smallest_dilate(const CellMask& omega, const CellBox& box) {
  const GridSpec& g = omega.grid;
  CellBox rb = g.root_box();
  std::int64_t N = g.cells_per_side();
  std::int64_t w0 = std::max(box.hi[0] - box.lo[0], g.d == 2 ? box.hi[1] - box.lo[1] : 0);
  auto has_complement = [&](const CellBox& b) {
    for (std::int64_t y = (g.d == 2 ? b.lo[1] : 0); y < (g.d == 2 ? b.hi[1] : 1); ++y)
      for (std::int64_t x = b.lo[0]; x < b.hi[0]; ++x)
        if (!omega.get(g.index_of(x, g.d == 2 ? y : 0))) return true;
    return false;
  };
  for (std::int64_t w = w0; w <= N; ++w) {
    std::int64_t xlo = std::max(rb.lo[0], box.hi[0] - w), xhi = std::min(box.lo[0], rb.hi[0] - w);
    std::int64_t ylo = g.d == 2 ? std::max(rb.lo[1], box.hi[1] - w) : 0;
    std::int64_t yhi = g.d == 2 ? std::min(box.lo[1], rb.hi[1] - w) : 0;
    for (std::int64_t y = ylo; y <= yhi; ++y)
      for (std::int64_t x = xlo; x <= xhi; ++x) {
        CellBox b{{x, y}, {x + w, g.d == 2 ? y + w : 1}};
        if (g.d == 1) {
          b.lo[1] = 0;
          b.hi[1] = 0;
        }
        if (has_complement(b)) return b;
      }
  }
  return rb;  // omega covers the root: fall back to the whole grid
}

double box_cells(const CellBox& b, int d) {
  return double(b.hi[0] - b.lo[0]) * (d == 2 ? double(b.hi[1] - b.lo[1]) : 1.0);
}

}  // namespace

CZSplit cz_decompose(const GridFunction& f, const CellMask& omega,
                     const WhitneyDecomposition& wd, const DyadicCube& Q0, double p,
                     const std::vector<double>& component_thresholds) {
  const GridSpec& grid = f.grid;
  if (int(component_thresholds.size()) != f.n)
    throw std::invalid_argument("cz_decompose: one threshold per component");
  CZSplit out;
  out.omega = omega;
  out.good = f.restricted(omega.complement());
  GridFunction sum_bad(grid, f.n, f.m, f.norm);
  for (const auto& entry : wd.cubes) {
    const DyadicCube& P = entry.cube;
    if (!grid.contains_cube(P))
      throw std::invalid_argument("cz_decompose: Whitney cube escapes the base cube");
    CellMask pm = CellMask::from_cube(grid, P);
    auto cells = mask_cells(pm);
    if (cells.empty()) continue;
    // component-wise cell average over P
    std::vector<double> avg(std::size_t(f.n) * f.m, 0.0);
    for (auto c : cells)
      for (int t = 0; t < f.n * f.m; ++t) avg[std::size_t(t)] += f.cell_ptr(c)[t];
    for (auto& a : avg) a /= double(cells.size());
    GridFunction b(grid, f.n, f.m, f.norm);
    for (auto c : cells)
      for (int t = 0; t < f.n * f.m; ++t) b.cell_ptr(c)[t] = f.cell_ptr(c)[t] - avg[std::size_t(t)];
    for (auto c : cells)
      for (int t = 0; t < f.n * f.m; ++t) out.good.cell_ptr(c)[t] += avg[std::size_t(t)];
    sum_bad += b;

    CellBox pd = smallest_dilate(omega, grid.cell_box(P));
    double ratio = box_cells(pd, grid.d) / double(cells.size());
    for (int i = 0; i < f.n; ++i) {
      double lhs = vec_norm(avg.data() + std::size_t(i) * f.m, f.m, f.norm);
      double rhs = std::pow(ratio, 1.0 / p) * component_thresholds[std::size_t(i)];
      if (rhs > 0) out.sup_bound_worst = std::max(out.sup_bound_worst, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12)) out.sup_ok = false;
    }
    out.cubes.push_back(P);
    out.bad.push_back(std::move(b));
    out.dilates.push_back(pd);
  }
  // reconstruction and mean-zero diagnostics
  GridFunction recon = out.good;
  recon += sum_bad;
  recon -= f;
  out.reconstruction_error = recon.max_abs();
  for (size_t k = 0; k < out.bad.size(); ++k) {
    auto cells = mask_cells(CellMask::from_cube(grid, out.cubes[k]));
    for (int t = 0; t < f.n * f.m; ++t) {
      double acc = 0;
      for (auto c : cells) acc += out.bad[k].cell_ptr(c)[t];
      out.mean_zero_error = std::max(out.mean_zero_error, std::abs(acc / double(cells.size())));
    }
  }
  (void)Q0;
  return out;
}

namespace {

struct MultiscaleCtx {
  const BRSFamily* fam;
  const GridFunction* g;
  double p, q, qp;
  DominationOptions opts;
  DominationCertificate* cert;
  int depth_limit;

  void recurse(const DyadicCube& Q0, const GridFunction& fcur, int depth) {
    const GridSpec& grid = fcur.grid;
    if (depth > depth_limit) throw std::logic_error("multiscale: recursion depth exceeded");
    if (Q0.level <= fam->n1 || Q0.level <= grid.cell_level) {
      // base case: the cube dominates itself at the bottom scale
      SparseEntry e;
      e.cube = Q0;
      e.witness = CellMask::from_cube(grid, Q0);
      cert->family.entries.push_back(std::move(e));
      return;
    }
    // reducing transforms for the f-body on Q0 and the g-body on 3Q0
    CellMask q0mask = CellMask::from_cube(grid, Q0);
    TripleMask trip = cube_triple(Q0, grid);
    JohnOptions jopts{.tol = 0.02, .directions = 256, .seed = opts.seed, .max_rounds = 40};
    ReducingMap Rf = reducing_transform(fcur, q0mask, p, jopts);
    GridFunction ft = matrix_apply(Rf.R, fcur);
    GridFunction gt = matrix_apply(Rf.Rinvt, *g);
    ReducingMap Rg = reducing_transform(gt, trip.mask, qp, jopts);
    GridFunction gtt = matrix_apply(Rg.R, gt);
    GridFunction ftt = matrix_apply(Rg.Rinvt, ft);
    {
      GridFunction Tf0 = apply(*fam, fcur, fam->n1, std::min(Q0.level, fam->n2));
      GridFunction Tft = apply(*fam, ftt, fam->n1, std::min(Q0.level, fam->n2));
      double p0 = pairing(Tf0, *g), pt = pairing(Tft, gtt);
      double drift = std::abs(p0 - pt) / std::max(1.0, std::abs(p0));
      cert->pairing_drift = std::max(cert->pairing_drift, drift);
    }

    OmegaResult om = build_omega(ftt, gtt, Q0, p, q, opts.gamma);
    if (!om.ok) throw std::runtime_error("multiscale_dominate: " + om.diagnostic);
    double wr = om.eq.measure() / q0mask.measure();
    cert->min_witness_ratio = std::min(cert->min_witness_ratio, wr);
    SparseEntry e;
    e.cube = Q0;
    e.witness = om.eq;
    cert->family.entries.push_back(std::move(e));

    WhitneyDecomposition wd = whitney_decompose(om.omega);
    std::vector<double> thr;
    for (int i = 0; i < ftt.n; ++i)
      thr.push_back(om.tau_f * lp_average(ftt.component(i), q0mask, p));
    CZSplit cz = cz_decompose(ftt, om.omega, wd, Q0, p, thr);
    if (int(cert->trace.size()) < opts.max_trace) {
      std::ostringstream os;
      os << "level " << Q0.level << " " << Q0.str() << ": |omega| = " << om.omega.measure()
         << ", witness ratio " << wr << ", whitney " << wd.cubes.size() << ", cz residual "
         << cz.reconstruction_error;
      cert->trace.push_back(os.str());
    }
    for (const auto& entry : wd.cubes) {
      const DyadicCube& P = entry.cube;
      if (!(Q0.contains(P)) || P == Q0) continue;
      if (P.level < fam->n1) {
        if (int(cert->trace.size()) < opts.max_trace)
          cert->trace.push_back("floor: whitney cube " + P.str() + " below the scale range");
        continue;
      }
      recurse(P, fcur.restricted(CellMask::from_cube(grid, P)), depth + 1);
    }
  }
};

}  // namespace

DominationCertificate multiscale_dominate(const BRSFamily& fam, const GridFunction& f,
                                          const GridFunction& g, const DyadicCube& Q0, double p,
                                          double q, const DominationOptions& opts) {
  const GridSpec& grid = f.grid;
  if (!(g.grid == grid)) throw std::invalid_argument("multiscale_dominate: grid mismatch");
  if (Q0.level < fam.n1) throw std::invalid_argument("multiscale_dominate: cube below scale range");
  if (!f.support().subset_of(CellMask::from_cube(grid, Q0)))
    throw std::invalid_argument("multiscale_dominate: f not supported in Q0");
  double qp = conjugate(q);
  DominationCertificate cert;
  cert.family.gamma = opts.gamma;
  MultiscaleCtx ctx{&fam, &g, p, q, qp, opts, &cert, Q0.level - fam.n1 + 1};
  ctx.recurse(Q0, f, 0);

  GridFunction Tf = apply(fam, f, fam.n1, std::min(Q0.level, fam.n2));
  cert.lhs = std::abs(pairing(Tf, g));
  for (const auto& e : cert.family.entries) {
    TripleMask trip = cube_triple(e.cube, grid);
    if (!trip.mask.empty()) {
      BodyOracle F(f, trip.mask, p), G(g, trip.mask, qp);
      cert.rhs += trip.mask.measure() * body_dot(F, G, BodyDotMethod::Auto, opts.seed).value;
    }
    CellMask qm = CellMask::from_cube(grid, e.cube);
    if (!qm.empty()) {
      BodyOracle F(f, qm, p), G(g, qm, qp);
      cert.rhs_plain += e.cube.volume() * body_dot(F, G, BodyDotMethod::Auto, opts.seed).value;
    }
  }
  cert.ratio = cert.rhs > 0 ? cert.lhs / cert.rhs : 0.0;
  cert.constant_budget = fam.constants.cost() *
                         std::pow(double(f.n), 1.5 + 1.0 / p + 1.0 / qp);
  cert.passed = verify_sparse(cert.family).valid();
  return cert;
}

double sparse_form(const SparseFamily& family, const GridFunction& f, const GridFunction& g,
                   double p, double qprime, std::uint64_t seed) {
  double acc = 0;
  for (const auto& e : family.entries) {
    CellMask qm = CellMask::from_cube(f.grid, e.cube);
    if (qm.empty()) continue;
    BodyOracle F(f, qm, p), G(g, qm, qprime);
    acc += e.cube.volume() * body_dot(F, G, BodyDotMethod::Auto, seed).value;
  }
  return acc;
}

namespace {

// dense positive kernel of the sparse averaging operator
Eigen::MatrixXd sparse_kernel_matrix(const SparseFamily& family, const MatrixWeight& W,
                                     double r) {
  const GridSpec& grid = W.grid;
  std::int64_t N = grid.cell_count();
  MatrixWeight Wp = W.power(1.0 / r), Wm = W.power(-1.0 / r);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (const auto& e : family.entries) {
    CellMask qm = CellMask::from_cube(grid, e.cube);
    auto cells = mask_cells(qm);
    if (cells.empty()) continue;
    double w = grid.cell_volume() / qm.measure();
    for (auto y : cells)
      for (auto x : cells) K(y, x) += w * op_norm(Wm.at(x) * Wp.at(y));
  }
  return K;
}

}  // namespace

GridFunction sparse_operator_apply(const SparseFamily& family, const MatrixWeight& W, double r,
                                   const GridFunction& f) {
  if (f.n != 1 || f.m != 1) throw std::invalid_argument("sparse operator: scalar input only");
  Eigen::MatrixXd K = sparse_kernel_matrix(family, W, r);
  std::int64_t N = f.grid.cell_count();
  Eigen::VectorXd v(N);
  for (std::int64_t c = 0; c < N; ++c) v(c) = std::abs(f.at(c));
  Eigen::VectorXd out = K * v;
  GridFunction res(f.grid, 1, 1);
  for (std::int64_t c = 0; c < N; ++c) res.at(c) = out(c);
  return res;
}

double sparse_operator_norm(const SparseFamily& family, const MatrixWeight& W, double r,
                            std::uint64_t seed) {
  if (r <= 1.0 || std::isinf(r)) throw std::invalid_argument("sparse operator: r in (1, inf)");
  Eigen::MatrixXd K = sparse_kernel_matrix(family, W, r);
  if (r == 2.0) return op_norm(K);  // exact: positive kernel, L^2 norm
  // empirical battery on nonnegative inputs
  const GridSpec& grid = W.grid;
  std::int64_t N = grid.cell_count();
  Rng rng(seed);
  double vol = grid.cell_volume();
  double best = 0;
  for (int t = 0; t < 16; ++t) {
    Eigen::VectorXd v(N);
    for (std::int64_t c = 0; c < N; ++c) v(c) = std::abs(rng.normal());
    for (int it = 0; it < 8; ++it) {  // nonlinear power steps sharpen the ratio
      Eigen::VectorXd u = K * v;
      double nu = 0, nv = 0;
      for (std::int64_t c = 0; c < N; ++c) {
        nu += std::pow(u(c), r) * vol;
        nv += std::pow(v(c), r) * vol;
      }
      best = std::max(best, std::pow(nu, 1.0 / r) / std::pow(nv, 1.0 / r));
      Eigen::VectorXd w = K.transpose() * u.array().pow(r - 1.0).matrix();
      double nw = w.lpNorm<Eigen::Infinity>();
      if (nw <= 0) break;
      v = w.array().pow(1.0 / (r - 1.0)).matrix();
      v /= v.lpNorm<Eigen::Infinity>();
    }
  }
  return best;
}

GridFunction weight_apply(const MatrixWeight& W, double beta, const GridFunction& f) {
  if (f.n != W.n) throw std::invalid_argument("weight_apply: component count mismatch");
  MatrixWeight Wb = W.power(beta);
  GridFunction out(f.grid, f.n, f.m, f.norm);
  for (std::int64_t c = 0; c < f.grid.cell_count(); ++c) {
    const Eigen::MatrixXd& M = Wb.at(c);
    for (int j = 0; j < f.m; ++j)
      for (int i = 0; i < f.n; ++i) {
        double acc = 0;
        for (int k = 0; k < f.n; ++k) acc += M(i, k) * f.at(c, k, j);
        out.at(c, i, j) = acc;
      }
  }
  return out;
}

double weighted_norm(const GridFunction& f, const MatrixWeight& W, double r) {
  return full_lr_norm(weight_apply(W, 1.0 / r, f), r);
}

WeightedReport weighted_experiment(const BRSFamily& fam, const MatrixWeight& W, double p,
                                   double q, double r, int battery, std::uint64_t seed) {
  if (!(1.0 <= p && p < r && r < q)) throw std::invalid_argument("weighted: need 1 <= p < r < q");
  WeightedReport rep;
  rep.t = r / p;
  rep.s = conjugate(q / r);
  auto cubes = all_dyadic_subcubes(W.grid);
  rep.a_t = a_r_constant(W, rep.t, cubes);
  rep.rh_ts = rh_ts_constant(W, rep.t, rep.s, cubes);
  double rp = conjugate(r);
  rep.budget = std::pow(rep.a_t, conjugate(rep.t) / r + rep.s / rp) *
               std::pow(rep.rh_ts, 1.0 / r + rep.s / rp);

  Rng rng(seed);
  const GridSpec& grid = W.grid;
  int n = W.n;
  for (int trial = 0; trial < battery; ++trial) {
    GridFunction f(grid, n, 1);
    for (auto& v : f.values) v = rng.normal();
    double nf = weighted_norm(f, W, r);
    if (nf <= 0) continue;
    GridFunction Tf = apply(fam, f);
    rep.max_ratio = std::max(rep.max_ratio, weighted_norm(Tf, W, r) / (rep.budget * nf));
  }

  // per-cube majorant for the body product of the conjugated pair
  double qp = conjugate(q);
  GridFunction f(grid, n, 1), g(grid, n, 1);
  for (auto& v : f.values) v = rng.normal();
  for (auto& v : g.values) v = rng.normal();
  GridFunction fW = weight_apply(W, -1.0 / r, f);
  GridFunction gW = weight_apply(W, 1.0 / r, g);
  MatrixWeight Wp = W.power(1.0 / r), Wm = W.power(-1.0 / r);
  rep.majorant_ok = true;
  for (const auto& Q : cubes) {
    CellMask qm = CellMask::from_cube(grid, Q);
    auto cells = mask_cells(qm);
    if (cells.size() < 2) continue;
    BodyOracle F(fW, qm, p), G(gW, qm, qp);
    double lhs = body_dot(F, G, BodyDotMethod::Auto, seed).value;
    double outer = 0;
    for (auto y : cells) {
      double inner = 0;
      for (auto x : cells)
        inner += std::pow(op_norm(Wm.at(x) * Wp.at(y)), p) * std::pow(cell_mag(f, x), p);
      inner /= double(cells.size());
      outer += std::pow(cell_mag(g, y), qp) * std::pow(inner, qp / p);
    }
    double rhs = std::pow(outer / double(cells.size()), 1.0 / qp);
    if (rhs > 0) rep.majorant_worst = std::max(rep.majorant_worst, lhs / rhs);
    if (lhs > rhs * 1.05 + 1e-12) rep.majorant_ok = false;
  }
  rep.ok = rep.majorant_ok && std::isfinite(rep.max_ratio);
  return rep;
}

GridFunction commutator_apply(const MatrixWeight& B, const BRSFamily& fam,
                              const GridFunction& f) {
  const Kernel& k = fam.ops.front().kernel;
  if (k.m1 != 1 || k.m2 != 1)
    throw std::invalid_argument("commutator: componentwise scalar kernel required");
  if (f.n != B.n || f.m != 1) throw std::invalid_argument("commutator: dimension mismatch");
  auto matmul = [&](const GridFunction& h) {
    GridFunction out(h.grid, h.n, 1, h.norm);
    for (std::int64_t c = 0; c < h.grid.cell_count(); ++c) {
      const Eigen::MatrixXd& M = B.at(c);
      for (int i = 0; i < h.n; ++i) {
        double acc = 0;
        for (int j = 0; j < h.n; ++j) acc += M(i, j) * h.at(c, j, 0);
        out.at(c, i, 0) = acc;
      }
    }
    return out;
  };
  GridFunction first = matmul(apply(fam, f));
  GridFunction second = apply(fam, matmul(f));
  first -= second;
  return first;
}

std::pair<double, double> commutator_forms(const SparseFamily& family, const MatrixWeight& B,
                                           const GridFunction& f, const GridFunction& g,
                                           double p, double qprime) {
  const GridSpec& grid = f.grid;
  double A = 0, Astar = 0;
  for (const auto& e : family.entries) {
    CellMask qm = CellMask::from_cube(grid, e.cube);
    auto cells = mask_cells(qm);
    if (cells.empty()) continue;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(B.n, B.n);
    for (auto c : cells) avg += B.at(c);
    avg /= double(cells.size());
    double oscf = 0, oscg = 0, fp = 0, gq = 0;
    for (auto c : cells) {
      double osc = op_norm(B.at(c) - avg);
      oscf += std::pow(osc, p) * std::pow(cell_mag(f, c), p);
      oscg += std::pow(osc, qprime) * std::pow(cell_mag(g, c), qprime);
      fp += std::pow(cell_mag(f, c), p);
      gq += std::pow(cell_mag(g, c), qprime);
    }
    double cn = double(cells.size());
    double vol = e.cube.volume();
    A += vol * std::pow(oscf / cn, 1.0 / p) * std::pow(gq / cn, 1.0 / qprime);
    Astar += vol * std::pow(fp / cn, 1.0 / p) * std::pow(oscg / cn, 1.0 / qprime);
  }
  return {A, Astar};
}

double bmo_norm(const GridFunction& b) {
  if (b.n != 1 || b.m != 1) throw std::invalid_argument("bmo_norm: scalar field only");
  double best = 0;
  for (const auto& Q : all_dyadic_subcubes(b.grid)) {
    auto cells = mask_cells(CellMask::from_cube(b.grid, Q));
    double avg = 0;
    for (auto c : cells) avg += b.at(c);
    avg /= double(cells.size());
    double osc = 0;
    for (auto c : cells) osc += std::abs(b.at(c) - avg);
    best = std::max(best, osc / double(cells.size()));
  }
  return best;
}

JNReport jn_check(const GridFunction& b, const std::vector<double>& exponents) {
  JNReport rep;
  double bmo = bmo_norm(b);
  for (double a : exponents) {
    double worst = 0;
    for (const auto& Q : all_dyadic_subcubes(b.grid)) {
      auto cells = mask_cells(CellMask::from_cube(b.grid, Q));
      double avg = 0;
      for (auto c : cells) avg += b.at(c);
      avg /= double(cells.size());
      double acc = 0;
      for (auto c : cells) acc += std::pow(std::abs(b.at(c) - avg), a);
      worst = std::max(worst, std::pow(acc / double(cells.size()), 1.0 / a));
    }
    rep.exponents.push_back(a);
    rep.constants.push_back(bmo > 0 ? worst / (a * bmo) : 0.0);
  }
  for (double c : rep.constants) rep.max_constant = std::max(rep.max_constant, c);
  rep.ok = std::isfinite(rep.max_constant);
  return rep;
}

double c_qr(double q, double r) {
  if (!(1.0 < r && r < q)) throw std::invalid_argument("c_qr: need 1 < r < q");
  return (q - r) / (r * (q - 1.0) + q * (r - 1.0));
}

ComNumbersReport com_numbers_check(double q, double r, int gridpoints) {
  ComNumbersReport rep;
  double rp = conjugate(r), qprime = conjugate(q), s = conjugate(q / r), C = c_qr(q, r);
  rep.ok = true;
  for (int i = 1; i <= gridpoints; ++i) {
    double theta = 0.5 * double(i) / double(gridpoints + 1);
    double u = 1.0 + C * theta;
    double arg = r * s * (1.0 + theta) / (qprime * u);
    if (arg <= 1.0) {
      rep.ok = false;
      continue;
    }
    double value = rp - qprime * u * conjugate(arg);
    rep.min_constant = std::min(rep.min_constant, value / theta);
  }
  rep.ok = rep.ok && rep.min_constant > 0;
  return rep;
}

CommutatorWeightedReport commutator_weighted_experiment(const BRSFamily& fam,
                                                        const MatrixWeight& W,
                                                        const MatrixWeight& B, double p, double q,
                                                        double r, int battery,
                                                        std::uint64_t seed) {
  if (!(1.0 <= p && p < r && r < q))
    throw std::invalid_argument("commutator weighted: need 1 <= p < r < q");
  CommutatorWeightedReport rep;
  rep.t = r / p;
  rep.s = conjugate(q / r);
  auto cubes = all_dyadic_subcubes(W.grid);
  rep.a_t = a_r_constant(W, rep.t, cubes);
  rep.rh_ts = rh_ts_constant(W, rep.t, rep.s, cubes);
  rep.budget = std::pow(rep.a_t * rep.rh_ts, rep.s) + std::pow(rep.a_t, 1.0 / (rep.t - 1.0));
  for (int i = 0; i < B.n; ++i)
    for (int j = 0; j < B.n; ++j) {
      GridFunction bij(B.grid, 1, 1);
      for (std::int64_t c = 0; c < B.grid.cell_count(); ++c) bij.at(c) = B.at(c)(i, j);
      rep.bmo = std::max(rep.bmo, bmo_norm(bij));
    }
  Rng rng(seed);
  for (int trial = 0; trial < battery; ++trial) {
    GridFunction f(W.grid, W.n, 1);
    for (auto& v : f.values) v = rng.normal();
    double nf = weighted_norm(f, W, r);
    if (nf <= 0 || rep.bmo <= 0) continue;
    GridFunction cf = commutator_apply(B, fam, f);
    rep.max_ratio =
        std::max(rep.max_ratio, weighted_norm(cf, W, r) / (rep.budget * rep.bmo * nf));
  }
  rep.ok = std::isfinite(rep.max_ratio);
  return rep;
}

}  // namespace convexdom
