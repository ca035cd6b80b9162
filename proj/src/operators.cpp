#include "convexdom/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace convexdom {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

double sample_op_norm(const double* v, int m1, int m2) {
  if (m1 == 1 && m2 == 1) return std::abs(v[0]);
  Eigen::MatrixXd M(m2, m1);
  for (int r = 0; r < m2; ++r)
    for (int c = 0; c < m1; ++c) M(r, c) = v[std::size_t(r) * m1 + c];
  return op_norm(M);
}

}  // namespace

double Kernel::max_op_norm() const {
  double best = 0;
  for (std::int64_t o = 0; o < count(); ++o)
    best = std::max(best, sample_op_norm(values.data() + std::size_t(o) * m1 * m2, m1, m2));
  return best;
}

double Kernel::lp_norm(double s) const {
  if (std::isinf(s)) return max_op_norm();
  double acc = 0;
  for (std::int64_t o = 0; o < count(); ++o)
    acc += std::pow(sample_op_norm(values.data() + std::size_t(o) * m1 * m2, m1, m2), s);
  return std::pow(acc * sample_volume(), 1.0 / s);
}

void Kernel::validate() const {
  if (level > 0) throw std::invalid_argument("kernel: sample level must be <= 0");
  if (d != 1 && d != 2) throw std::invalid_argument("kernel: dimension must be 1 or 2");
  std::int64_t r = std::int64_t(1) << (-level);
  for (int i = 0; i < d; ++i)
    if (box.lo[i] < -r || box.hi[i] > r)
      throw std::invalid_argument("kernel: support leaves the unit ball");
  if (std::int64_t(values.size()) != count() * m1 * m2)
    throw std::invalid_argument("kernel: value buffer size mismatch");
}

Kernel delta_kernel(int d, int level, double mass) {
  Kernel k;
  k.d = d;
  k.level = level;
  k.box.lo = {0, 0};
  k.box.hi = {1, d == 2 ? 1 : 0};
  if (d == 1) k.box.hi[1] = 0;
  k.values.assign(1, mass / k.sample_volume());
  k.validate();
  return k;
}

Kernel smooth_bump_kernel(int d, int level, double mass) {
  Kernel k;
  k.d = d;
  k.level = level;
  std::int64_t r = std::int64_t(1) << (-level);
  k.box.lo = {-r, d == 2 ? -r : 0};
  k.box.hi = {r, d == 2 ? r : 0};
  k.values.assign(std::size_t(k.count()), 0.0);
  double h = pow2(level);
  double total = 0;
  for (std::int64_t oy = (d == 2 ? k.box.lo[1] : 0); oy < (d == 2 ? k.box.hi[1] : 1); ++oy)
    for (std::int64_t ox = k.box.lo[0]; ox < k.box.hi[0]; ++ox) {
      double x = (double(ox) + 0.5) * h, y = d == 2 ? (double(oy) + 0.5) * h : 0.0;
      double r2 = x * x + y * y;
      double v = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      *k.at(ox, oy) = v;
      total += v * k.sample_volume();
    }
  for (auto& v : k.values) v *= mass / total;
  k.validate();
  return k;
}

Kernel random_kernel(int d, int level, int m1, int m2, std::uint64_t seed) {
  Kernel k;
  k.d = d;
  k.level = level;
  k.m1 = m1;
  k.m2 = m2;
  std::int64_t r = std::int64_t(1) << (-level);
  k.box.lo = {-r, d == 2 ? -r : 0};
  k.box.hi = {r, d == 2 ? r : 0};
  k.values.assign(std::size_t(k.count()) * m1 * m2, 0.0);
  Rng rng(seed);
  double h = pow2(level);
  for (std::int64_t oy = (d == 2 ? k.box.lo[1] : 0); oy < (d == 2 ? k.box.hi[1] : 1); ++oy)
    for (std::int64_t ox = k.box.lo[0]; ox < k.box.hi[0]; ++ox) {
      double x = (double(ox) + 0.5) * h, y = d == 2 ? (double(oy) + 0.5) * h : 0.0;
      double r2 = x * x + y * y;
      double env = r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
      double* v = k.at(ox, oy);
      for (int t = 0; t < m1 * m2; ++t) v[t] = env * rng.normal();
    }
  k.validate();
  return k;
}

std::int64_t SingleScaleOp::block(const GridSpec& grid) const {
  int e = kernel.level + j - grid.cell_level;
  if (e < 0) throw std::invalid_argument("single-scale operator: scale finer than cells");
  return std::int64_t(1) << e;
}

GridFunction SingleScaleOp::apply(const GridFunction& f) const {
  const GridSpec& g = f.grid;
  if (g.d != kernel.d) throw std::invalid_argument("apply: dimension mismatch");
  bool scalar = kernel.m1 == 1 && kernel.m2 == 1;
  if (!scalar && f.m != kernel.m1) throw std::invalid_argument("apply: value dimension mismatch");
  std::int64_t B = block(g);
  double scale = pow2(-j * g.d) * g.cell_volume();
  GridFunction out(g, f.n, scalar ? f.m : kernel.m2, f.norm);
  CellBox rb = g.root_box();
  std::int64_t dlo0 = kernel.box.lo[0] * B, dhi0 = kernel.box.hi[0] * B;
  std::int64_t dlo1 = g.d == 2 ? kernel.box.lo[1] * B : 0;
  std::int64_t dhi1 = g.d == 2 ? kernel.box.hi[1] * B : 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    auto a = g.coords_of(c);
    double* dst = out.cell_ptr(c);
    for (std::int64_t dy = dlo1; dy < dhi1; ++dy)
      for (std::int64_t dx = dlo0; dx < dhi0; ++dx) {
        std::int64_t bx = a[0] - dx, by = a[1] - dy;
        if (bx < rb.lo[0] || bx >= rb.hi[0]) continue;
        if (g.d == 2 && (by < rb.lo[1] || by >= rb.hi[1])) continue;
        const double* kv = kernel.at(floor_div(dx, B), g.d == 2 ? floor_div(dy, B) : 0);
        const double* src = f.cell_ptr(g.index_of(bx, g.d == 2 ? by : 0));
        if (scalar) {
          double w = kv[0] * scale;
          if (w == 0.0) continue;
          for (int t = 0; t < f.n * f.m; ++t) dst[t] += w * src[t];
        } else {
          for (int i = 0; i < f.n; ++i)
            for (int r = 0; r < kernel.m2; ++r) {
              double acc = 0;
              for (int s = 0; s < kernel.m1; ++s) acc += kv[r * kernel.m1 + s] * src[i * f.m + s];
              dst[i * kernel.m2 + r] += acc * scale;
            }
        }
      }
  }
  return out;
}

GridFunction SingleScaleOp::adjoint_apply(const GridFunction& gfun) const {
  const GridSpec& g = gfun.grid;
  if (g.d != kernel.d) throw std::invalid_argument("adjoint_apply: dimension mismatch");
  bool scalar = kernel.m1 == 1 && kernel.m2 == 1;
  if (!scalar && gfun.m != kernel.m2)
    throw std::invalid_argument("adjoint_apply: value dimension mismatch");
  std::int64_t B = block(g);
  double scale = pow2(-j * g.d) * g.cell_volume();
  GridFunction out(g, gfun.n, scalar ? gfun.m : kernel.m1, gfun.norm);
  CellBox rb = g.root_box();
  std::int64_t dlo0 = kernel.box.lo[0] * B, dhi0 = kernel.box.hi[0] * B;
  std::int64_t dlo1 = g.d == 2 ? kernel.box.lo[1] * B : 0;
  std::int64_t dhi1 = g.d == 2 ? kernel.box.hi[1] * B : 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    auto b = g.coords_of(c);
    double* dst = out.cell_ptr(c);
    for (std::int64_t dy = dlo1; dy < dhi1; ++dy)
      for (std::int64_t dx = dlo0; dx < dhi0; ++dx) {
        std::int64_t ax = b[0] + dx, ay = b[1] + dy;
        if (ax < rb.lo[0] || ax >= rb.hi[0]) continue;
        if (g.d == 2 && (ay < rb.lo[1] || ay >= rb.hi[1])) continue;
        const double* kv = kernel.at(floor_div(dx, B), g.d == 2 ? floor_div(dy, B) : 0);
        const double* src = gfun.cell_ptr(g.index_of(ax, g.d == 2 ? ay : 0));
        if (scalar) {
          double w = kv[0] * scale;
          if (w == 0.0) continue;
          for (int t = 0; t < gfun.n * gfun.m; ++t) dst[t] += w * src[t];
        } else {
          for (int i = 0; i < gfun.n; ++i)
            for (int s = 0; s < kernel.m1; ++s) {
              double acc = 0;
              for (int r = 0; r < kernel.m2; ++r) acc += kv[r * kernel.m1 + s] * src[i * gfun.m + r];
              dst[i * kernel.m1 + s] += acc * scale;
            }
        }
      }
  }
  return out;
}

const char* const_tag_name(ConstTag t) {
  switch (t) {
    case ConstTag::Exact: return "exact";
    case ConstTag::UpperBound: return "upper-bound";
    default: return "empirical";
  }
}

double ConstantsRecord::cost(bool empirical_endpoints) const {
  double ap = empirical_endpoints ? a_p : a_p_upper;
  double aq = empirical_endpoints ? a_q : a_q_upper;
  if (a_circ <= 0) return ap + aq;
  return ap + aq + a_circ * std::log(2.0 + b / a_circ);
}

BRSFamily make_family(const Kernel& k, int n1, int n2) {
  if (n1 > n2) throw std::invalid_argument("make_family: empty scale range");
  k.validate();
  BRSFamily fam;
  fam.n1 = n1;
  fam.n2 = n2;
  for (int j = n1; j <= n2; ++j) fam.ops.push_back(SingleScaleOp{j, k});
  return fam;
}

GridFunction apply(const BRSFamily& fam, const GridFunction& f, int lo, int hi) {
  GridFunction out;
  bool first = true;
  for (const auto& op : fam.ops) {
    if (op.j < lo || op.j > hi) continue;
    GridFunction t = op.apply(f);
    if (first) {
      out = std::move(t);
      first = false;
    } else {
      out += t;
    }
  }
  if (first) {
    out = GridFunction(f.grid, f.n, f.m, f.norm);
    out *= 0.0;
  }
  return out;
}

GridFunction apply(const BRSFamily& fam, const GridFunction& f) {
  return apply(fam, f, fam.n1, fam.n2);
}

GridFunction adjoint_apply(const BRSFamily& fam, const GridFunction& g, int lo, int hi) {
  GridFunction out;
  bool first = true;
  for (const auto& op : fam.ops) {
    if (op.j < lo || op.j > hi) continue;
    GridFunction t = op.adjoint_apply(g);
    if (first) {
      out = std::move(t);
      first = false;
    } else {
      out += t;
    }
  }
  if (first) {
    out = GridFunction(g.grid, g.n, g.m, g.norm);
    out *= 0.0;
  }
  return out;
}

GridFunction adjoint_apply(const BRSFamily& fam, const GridFunction& g) {
  return adjoint_apply(fam, g, fam.n1, fam.n2);
}

GridFunction partial_sum(const BRSFamily& fam, const GridFunction& f, const DyadicCube& Q) {
  GridFunction fq = f.restricted(CellMask::from_cube(f.grid, Q));
  return apply(fam, fq, fam.n1, std::min(Q.level, fam.n2));
}

double operator_norm_l2(const GridSpec& grid, int n, int m_in,
                        const std::function<GridFunction(const GridFunction&)>& forward,
                        const std::function<GridFunction(const GridFunction&)>& adjoint,
                        std::uint64_t seed) {
  double best = 0;
  for (int restart = 0; restart < 2; ++restart) {
    Rng rng(seed + std::uint64_t(restart) * 7919);
    GridFunction v(grid, n, m_in);
    for (auto& x : v.values) x = rng.normal();
    double nv = std::sqrt(pairing(v, v));
    if (nv == 0) continue;
    v *= 1.0 / nv;
    double sigma = 0;
    for (int it = 0; it < 500; ++it) {
      GridFunction w = forward(v);
      GridFunction u = adjoint(w);
      double nu = std::sqrt(pairing(u, u));
      double est = std::sqrt(std::max(0.0, pairing(u, v)));
      if (nu < 1e-300) {
        sigma = 0;
        break;
      }
      u *= 1.0 / nu;
      v = std::move(u);
      if (it > 4 && std::abs(est - sigma) <= 1e-13 * std::max(1.0, est)) {
        sigma = est;
        break;
      }
      sigma = est;
    }
    best = std::max(best, sigma);
  }
  return best;
}

namespace {

// offsets h (in kernel sample units) with 0 < |h| <= 1
std::vector<std::array<std::int64_t, 2>> unit_offsets(int d, int level) {
  std::int64_t r = std::int64_t(1) << (-level);
  std::vector<std::array<std::int64_t, 2>> out;
  double h = pow2(level);
  for (std::int64_t oy = (d == 2 ? -r : 0); oy <= (d == 2 ? r : 0); ++oy)
    for (std::int64_t ox = -r; ox <= r; ++ox) {
      if (ox == 0 && oy == 0) continue;
      double hx = double(ox) * h, hy = double(oy) * h;
      if (hx * hx + hy * hy > 1.0 + 1e-12) continue;
      out.push_back({ox, oy});
    }
  return out;
}

// L^s norm of k(.) - k(. - eta) over the sample lattice
double young_difference(const Kernel& k, const std::array<std::int64_t, 2>& eta, double s) {
  CellBox wide = k.box;
  for (int i = 0; i < k.d; ++i) {
    wide.lo[i] = std::min(wide.lo[i], k.box.lo[i] + eta[std::size_t(i)]);
    wide.hi[i] = std::max(wide.hi[i], k.box.hi[i] + eta[std::size_t(i)]);
  }
  double acc = 0, sup = 0;
  int mm = k.m1 * k.m2;
  std::vector<double> diff(static_cast<std::size_t>(mm));
  for (std::int64_t oy = (k.d == 2 ? wide.lo[1] : 0); oy < (k.d == 2 ? wide.hi[1] : 1); ++oy)
    for (std::int64_t ox = wide.lo[0]; ox < wide.hi[0]; ++ox) {
      const double* a = k.in_box(ox, oy) ? k.at(ox, oy) : nullptr;
      std::int64_t sx = ox - eta[0], sy = oy - eta[1];
      const double* b = k.in_box(sx, sy) ? k.at(sx, sy) : nullptr;
      for (int t = 0; t < mm; ++t) diff[std::size_t(t)] = (a ? a[t] : 0.0) - (b ? b[t] : 0.0);
      double nrm = sample_op_norm(diff.data(), k.m1, k.m2);
      sup = std::max(sup, nrm);
      if (!std::isinf(s)) acc += std::pow(nrm, s);
    }
  if (std::isinf(s)) return sup;
  return std::pow(acc * k.sample_volume(), 1.0 / s);
}

}  // namespace

ConstantsRecord certify(BRSFamily& fam, const GridSpec& grid, double p, double q, double kappa,
                        std::uint64_t seed, int battery) {
  if (kappa <= 0) throw std::invalid_argument("certify: kappa must be positive");
  if (p < 1 || q < 1 || p > q) throw std::invalid_argument("certify: need 1 <= p <= q");
  const Kernel& k = fam.ops.front().kernel;
  ConstantsRecord rec;
  rec.p = p;
  rec.q = q;
  rec.kappa = kappa;
  bool exact22 = (p == 2.0 && q == 2.0);
  int d = grid.d;
  auto rescale = [&](int j) { return pow2(0) * std::pow(2.0, -double(j * d) * (1.0 / p - 1.0 / q)); };

  if (exact22) {
    double best = 0;
    for (const auto& op : fam.ops) {
      double nrm = operator_norm_l2(
          grid, 1, k.m1, [&](const GridFunction& f) { return op.apply(f); },
          [&](const GridFunction& g) { return op.adjoint_apply(g); }, seed);
      best = std::max(best, nrm / rescale(op.j));
    }
    rec.a_circ = best;
    rec.a_circ_tag = ConstTag::Exact;
  } else {
    double inv_s = 1.0 + 1.0 / q - 1.0 / p;
    double s = inv_s <= 0 ? kInf : 1.0 / inv_s;
    rec.a_circ = k.lp_norm(s);
    rec.a_circ_tag = ConstTag::UpperBound;
  }

  // regularity constant over unit-scale offsets
  auto offsets = unit_offsets(k.d, k.level);
  double bbest = 0;
  if (exact22) {
    for (const auto& op : fam.ops) {
      std::int64_t B = op.block(grid);
      for (const auto& eta : offsets) {
        std::array<std::int64_t, 2> hc{eta[0] * B, eta[1] * B};
        double hnorm = std::hypot(double(eta[0]), d == 2 ? double(eta[1]) : 0.0) * pow2(k.level);
        double nrm = operator_norm_l2(
            grid, 1, k.m1,
            [&](const GridFunction& f) { return op.apply(finite_difference(f, hc)); },
            [&](const GridFunction& g) {
              std::array<std::int64_t, 2> mh{-hc[0], -hc[1]};
              return finite_difference(op.adjoint_apply(g), mh);
            },
            seed);
        bbest = std::max(bbest, nrm / (rescale(op.j) * std::pow(hnorm, kappa)));
      }
    }
    rec.b_tag = ConstTag::Exact;
  } else {
    double inv_s = 1.0 + 1.0 / q - 1.0 / p;
    double s = inv_s <= 0 ? kInf : 1.0 / inv_s;
    for (const auto& eta : offsets) {
      double hnorm = std::hypot(double(eta[0]), d == 2 ? double(eta[1]) : 0.0) * pow2(k.level);
      bbest = std::max(bbest, young_difference(k, eta, s) / std::pow(hnorm, kappa));
    }
    rec.b_tag = ConstTag::UpperBound;
  }
  rec.b = bbest;

  // endpoint constants: empirical battery maxima plus triangle upper bounds
  double l1 = k.lp_norm(1.0);
  rec.a_p_upper = double(fam.n2 - fam.n1 + 1) * l1;
  rec.a_q_upper = rec.a_p_upper;
  Rng rng(seed + 101);
  double ap = 0, aq = 0;
  for (int t = 0; t < battery; ++t) {
    GridFunction f(grid, 1, k.m1);
    if (t == 0) {
      f.at(0, 0, 0) = 1.0 / grid.cell_volume();  // spike
    } else if (t == 1) {
      f.at(grid.cell_count() / 2, 0, 0) = 1.0 / grid.cell_volume();
    } else {
      for (auto& x : f.values) x = rng.normal();
    }
    GridFunction Tf = apply(fam, f);
    double fp = lp_norm(f, p), fq1 = lorentz_q1_norm(f, q);
    if (fp > 0) ap = std::max(ap, weak_lp_norm(Tf, p) / fp);
    if (fq1 > 0) aq = std::max(aq, lp_norm(Tf, q) / fq1);
  }
  rec.a_p = ap;
  rec.a_q = aq;
  fam.constants = rec;
  return rec;
}

DecayReport regularity_decay_check(const BRSFamily& fam, const GridSpec& grid, double p, double q,
                                   double theta, int kmax, std::uint64_t seed) {
  if (theta <= 0 || theta >= std::min(1.0 / p, fam.constants.kappa > 0 ? fam.constants.kappa : kInf))
    throw std::invalid_argument("regularity_decay_check: need 0 < theta < min(1/p, kappa)");
  if (!(p == 2.0 && q == 2.0))
    throw std::invalid_argument("regularity_decay_check: exact norms only at p = q = 2");
  const Kernel& ker = fam.ops.front().kernel;
  DecayReport rep;
  rep.bound = -theta + 0.1;
  for (int k = 1; k <= kmax; ++k) {
    double mk = 0;
    for (const auto& op : fam.ops) {
      int block_level = op.j - k;  // averaging cubes of side 2^{j-k}
      if (block_level < grid.cell_level) {
        rep.resolution_floor = true;
        continue;
      }
      int ek = -block_level;
      double nrm = operator_norm_l2(
          grid, 1, ker.m1,
          [&](const GridFunction& f) {
            GridFunction r = f;
            r -= conditional_expectation(f, ek);
            return op.apply(r);
          },
          [&](const GridFunction& g) {
            GridFunction r = op.adjoint_apply(g);
            r -= conditional_expectation(r, ek);
            return r;
          },
          seed);
      mk = std::max(mk, nrm * std::pow(2.0, double(op.j * grid.d) * (1.0 / p - 1.0 / q)));
    }
    rep.ks.push_back(k);
    rep.norms.push_back(mk);
  }
  std::vector<double> xs, ys;
  for (size_t i = 0; i < rep.norms.size(); ++i)
    if (rep.norms[i] > 1e-300) {
      xs.push_back(double(rep.ks[i]));
      ys.push_back(std::log2(rep.norms[i]));
    }
  if (xs.size() >= 2) {
    rep.slope = fit_slope(xs, ys);
    rep.ok = rep.slope <= rep.bound;
  } else {
    rep.slope = -kInf;  // decayed below resolution: vacuously fast
    rep.ok = true;
  }
  return rep;
}

namespace {

using cvec = std::vector<std::complex<double>>;

cvec dft(const cvec& a, int sign) {
  std::int64_t N = std::int64_t(a.size());
  cvec out(a.size());
  for (std::int64_t t = 0; t < N; ++t) {
    std::complex<double> acc = 0;
    for (std::int64_t x = 0; x < N; ++x) {
      double ang = double(sign) * 2.0 * M_PI * double(t * x % N) / double(N);
      acc += a[std::size_t(x)] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[std::size_t(t)] = acc;
  }
  return out;
}

double smoothstep(double u) {  // 0 below 0, 1 above 1, C^inf
  auto g = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  double a = g(u), b = g(1.0 - u);
  return a / (a + b);
}

double psi0(double x) {  // 1 on |x|<1/4, 0 on |x|>=1/2
  return 1.0 - smoothstep((std::abs(x) - 0.25) * 4.0);
}

double psi_ell(int ell, double x) {
  if (ell == 0) return psi0(x);
  return psi0(std::ldexp(x, -ell)) - psi0(std::ldexp(x, -ell + 1));
}

double lp_cutoff(double r) {  // 1 on [0,1], 0 on [2,inf)
  return 1.0 - smoothstep(std::abs(r) - 1.0);
}

double annulus(double xi) {  // supported in 1/2 < |xi| < 2, dyadic dilates sum to 1
  return lp_cutoff(std::abs(xi)) - lp_cutoff(2.0 * std::abs(xi));
}

// oscillating profile with 6 vanishing continuous moments: 6th finite
// difference of a narrow smooth bump
double theta_profile(double y) {
  const double h0 = 1.0 / 24.0, w = 1.0 / 24.0;
  static const double binom[7] = {1, 6, 15, 20, 15, 6, 1};
  auto bump = [](double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
  double acc = 0;
  for (int i = 0; i <= 6; ++i) {
    double s = (i % 2 == 0) ? 1.0 : -1.0;
    acc += s * binom[i] * bump((y - (double(i) - 3.0) * h0) / w);
  }
  return acc * 4e4;  // scale to order-one values
}

}  // namespace

std::vector<double> smooth_symbol(int levels, int k_min, int k_max, std::uint64_t seed) {
  std::int64_t N = std::int64_t(1) << levels;
  Rng rng(seed);
  double a = rng.uniform(0.2, 0.6), ph = rng.uniform(0, 6.28), fr = rng.uniform(0.5, 2.0);
  std::vector<double> m(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t t = 0; t < N; ++t) {
    double xi = t <= N / 2 ? double(t) : double(t - N);
    if (xi == 0) continue;
    m[std::size_t(t)] = 1.0 + a * std::sin(ph + fr * std::log2(std::abs(xi)));
  }
  (void)k_min;
  (void)k_max;
  return m;
}

MultiplierReport decompose_multiplier(const MultiplierSpec& spec, std::uint64_t seed) {
  if (spec.levels < 3 || spec.levels > 12)
    throw std::invalid_argument("multiplier: levels out of range");
  std::int64_t N = std::int64_t(1) << spec.levels;
  if (std::int64_t(1) << spec.k_max >= N / 2)
    throw std::invalid_argument("multiplier: top octave beyond the frequency grid");
  if (spec.ell_max < spec.k_max + 2)
    throw std::invalid_argument("multiplier: ell_max must cover the torus (>= k_max + 2)");
  MultiplierReport rep;

  // telescoping identity for the radial cutoffs
  {
    double worst = 0;
    int L = spec.ell_max;
    for (int i = 0; i < 2000; ++i) {
      double z = -8.0 + 16.0 * double(i) / 1999.0;
      double acc = 0;
      for (int ell = 1; ell <= L; ++ell) acc += psi_ell(ell, z);
      worst = std::max(worst, std::abs(acc - (psi0(std::ldexp(z, -L)) - psi0(z))));
    }
    rep.telescoping_error = worst;
  }

  std::vector<double> m = spec.symbol;
  if (m.empty()) m.assign(static_cast<std::size_t>(N), 1.0);
  if (std::int64_t(m.size()) != N) throw std::invalid_argument("multiplier: symbol size mismatch");

  auto xi_of = [&](std::int64_t t) { return t <= N / 2 ? double(t) : double(t - N); };
  auto ywrap = [&](std::int64_t c) {
    double x = double(c) / double(N);
    return x < 0.5 ? x : x - 1.0;
  };

  // unit-scale oscillating profile moments (reported)
  for (int deg = 0; deg <= 6; ++deg) {
    double acc = 0;
    for (std::int64_t c = 0; c < N; ++c) {
      double y = ywrap(c);
      acc += theta_profile(y) * std::pow(y, deg) / double(N);
    }
    rep.theta_moments.push_back(acc);
  }

  // per-octave oscillating factors and their discrete transforms
  int nk = spec.k_max - spec.k_min + 1;
  std::vector<cvec> theta_hat(static_cast<std::size_t>(nk));
  std::vector<std::vector<double>> theta_vals(static_cast<std::size_t>(nk));
  for (int ik = 0; ik < nk; ++ik) {
    int kk = spec.k_min + ik;
    std::vector<double>& tv = theta_vals[std::size_t(ik)];
    tv.assign(static_cast<std::size_t>(N), 0.0);
    cvec tc(static_cast<std::size_t>(N));
    for (std::int64_t c = 0; c < N; ++c) {
      tv[std::size_t(c)] = std::ldexp(theta_profile(std::ldexp(ywrap(c), kk)), kk);
      tc[std::size_t(c)] = tv[std::size_t(c)];
    }
    theta_hat[std::size_t(ik)] = dft(tc, -1);
    for (auto& v : theta_hat[std::size_t(ik)]) v /= double(N);
  }

  // partition factors: annulus profile divided by the measured transform
  std::vector<cvec> phi(std::size_t(nk), cvec(static_cast<std::size_t>(N), 0.0));
  double worst_res = 0;
  double worst_xi = 0;
  for (std::int64_t t = 0; t < N; ++t) {
    double xi = xi_of(t);
    std::complex<double> total = 0;
    bool active = std::abs(xi) >= std::ldexp(1.0, spec.k_min) - 1e-12 &&
                  std::abs(xi) <= std::ldexp(1.0, spec.k_max) + 1e-12;
    for (int ik = 0; ik < nk; ++ik) {
      int kk = spec.k_min + ik;
      double rho = annulus(std::ldexp(xi, -kk));
      if (rho == 0.0) continue;
      std::complex<double> th = theta_hat[std::size_t(ik)][std::size_t(t)];
      if (std::abs(th) < 1e-9) {
        std::ostringstream os;
        os << "multiplier: partition check fails, transform vanishes at xi = " << xi;
        throw std::runtime_error(os.str());
      }
      phi[std::size_t(ik)][std::size_t(t)] = rho / th;
      total += rho;
    }
    if (active && std::abs(total - 1.0) > worst_res) {
      worst_res = std::abs(total - 1.0);
      worst_xi = xi;
    }
  }
  if (worst_res > 1e-3) {
    std::ostringstream os;
    os << "multiplier: partition check fails, residual " << worst_res << " at xi = " << worst_xi;
    throw std::runtime_error(os.str());
  }
  rep.partition_residual = worst_res;

  // kernels per (ell, k) and their exact torus symbols
  int nell = spec.ell_max + 1;
  std::vector<std::vector<cvec>> symbol(static_cast<std::size_t>(nell),
                                        std::vector<cvec>(static_cast<std::size_t>(nk)));
  rep.a_circ_ell.assign(static_cast<std::size_t>(nell), 0.0);
  rep.a_ell.assign(static_cast<std::size_t>(nell), 0.0);
  for (int ik = 0; ik < nk; ++ik) {
    int kk = spec.k_min + ik;
    // u_k = inverse transform of phi_k * m
    cvec uhat(static_cast<std::size_t>(N));
    for (std::int64_t t = 0; t < N; ++t)
      uhat[std::size_t(t)] = phi[std::size_t(ik)][std::size_t(t)] * m[std::size_t(t)];
    cvec u = dft(uhat, +1);  // continuum convention: sum over integer frequencies
    for (int ell = 0; ell < nell; ++ell) {
      cvec v(static_cast<std::size_t>(N));
      for (std::int64_t c = 0; c < N; ++c)
        v[std::size_t(c)] = u[std::size_t(c)] * psi_ell(ell, std::ldexp(ywrap(c), kk));
      cvec vhat = dft(v, -1);
      cvec& sym = symbol[std::size_t(ell)][std::size_t(ik)];
      sym.assign(static_cast<std::size_t>(N), 0.0);
      double peak = 0;
      for (std::int64_t t = 0; t < N; ++t) {
        sym[std::size_t(t)] = vhat[std::size_t(t)] * theta_hat[std::size_t(ik)][std::size_t(t)] / double(N);
        peak = std::max(peak, std::abs(sym[std::size_t(t)]));
      }
      rep.a_circ_ell[std::size_t(ell)] = std::max(rep.a_circ_ell[std::size_t(ell)], peak);
    }
  }
  rep.a_ell = rep.a_circ_ell;  // the two scales agree at p = q = 2
  for (int ell = 0; ell < nell; ++ell) {
    rep.b_circ_sum += rep.a_circ_ell[std::size_t(ell)];
    rep.b_sum += rep.a_ell[std::size_t(ell)] * (1.0 + double(ell));
  }

  // reconstruction on band-limited inputs, through the spatial kernels
  Rng rng(seed);
  double worst_rec = 0;
  for (int trial = 0; trial < 3; ++trial) {
    cvec fhat(static_cast<std::size_t>(N), 0.0);
    for (std::int64_t t = 1; t < N / 2; ++t) {
      double xi = double(t);
      if (xi < std::ldexp(1.0, spec.k_min) || xi > std::ldexp(1.0, spec.k_max)) continue;
      std::complex<double> c(rng.normal(), rng.normal());
      fhat[std::size_t(t)] = c;
      fhat[std::size_t(N - t)] = std::conj(c);
    }
    cvec f = dft(fhat, +1);
    for (auto& v : f) v /= double(N);
    // spatial kernels, applied by direct circular summation
    cvec total(static_cast<std::size_t>(N), 0.0);
    for (int ell = 0; ell < nell; ++ell)
      for (int ik = 0; ik < nk; ++ik) {
        const cvec& sym = symbol[std::size_t(ell)][std::size_t(ik)];
        cvec khat(static_cast<std::size_t>(N));
        for (std::int64_t t = 0; t < N; ++t) khat[std::size_t(t)] = sym[std::size_t(t)];
        cvec K = dft(khat, +1);  // spatial kernel samples (integral-normalized)
        for (std::int64_t x = 0; x < N; ++x) {
          std::complex<double> acc = 0;
          for (std::int64_t y = 0; y < N; ++y)
            acc += K[std::size_t((x - y + N) % N)] * f[std::size_t(y)];
          total[std::size_t(x)] += acc / double(N);
        }
      }
    cvec mref(static_cast<std::size_t>(N));
    for (std::int64_t t = 0; t < N; ++t) mref[std::size_t(t)] = m[std::size_t(t)] * fhat[std::size_t(t)];
    cvec ref = dft(mref, +1);
    for (auto& v : ref) v /= double(N);
    double num = 0, den = 0;
    for (std::int64_t x = 0; x < N; ++x) {
      num += std::norm(total[std::size_t(x)] - ref[std::size_t(x)]);
      den += std::norm(ref[std::size_t(x)]);
    }
    if (den > 0) worst_rec = std::max(worst_rec, std::sqrt(num / den));
  }
  rep.reconstruction_error = worst_rec;
  rep.ok = rep.telescoping_error <= 1e-12 && rep.partition_residual <= 1e-3 &&
           rep.reconstruction_error <= 1e-2;
  return rep;
}

}  // namespace convexdom
