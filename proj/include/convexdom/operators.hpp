#pragma once

#include <complex>
#include <functional>

#include "convexdom/gridfn.hpp"

namespace convexdom {

// Unit-scale convolution kernel sampled on a lattice of side 2^level, with
// matrix values (m2 x m1) per sample and support inside the unit ball.  Kept
// separate from GridFunction because no dyadic cube is centered at the origin.
struct Kernel {
  int d = 1;
  int level = 0;  // sample side 2^level, level <= 0
  int m1 = 1, m2 = 1;
  CellBox box;    // sample offsets in units of 2^level, half-open
  std::vector<double> values;  // [offset][row j2][col j1]

  std::int64_t extent(int axis) const { return box.hi[axis] - box.lo[axis]; }
  std::int64_t count() const { return d == 1 ? extent(0) : extent(0) * extent(1); }
  std::int64_t index_of(std::int64_t ox, std::int64_t oy = 0) const {
    return (ox - box.lo[0]) + (d == 2 ? (oy - box.lo[1]) * extent(0) : 0);
  }
  bool in_box(std::int64_t ox, std::int64_t oy = 0) const {
    if (ox < box.lo[0] || ox >= box.hi[0]) return false;
    if (d == 2 && (oy < box.lo[1] || oy >= box.hi[1])) return false;
    return true;
  }
  const double* at(std::int64_t ox, std::int64_t oy = 0) const {
    return values.data() + std::size_t(index_of(ox, oy)) * m1 * m2;
  }
  double* at(std::int64_t ox, std::int64_t oy = 0) {
    return values.data() + std::size_t(index_of(ox, oy)) * m1 * m2;
  }
  double sample_volume() const { return pow2(level * d); }
  // largest operator norm over samples
  double max_op_norm() const;
  // (sum_offsets |value|_op^s * volume)^{1/s}; sup of |value|_op for s = inf
  double lp_norm(double s) const;
  void validate() const;  // support inside |x| <= 1, sizes consistent
};

Kernel delta_kernel(int d, int level = 0, double mass = 1.0);
Kernel smooth_bump_kernel(int d, int level, double mass = 1.0);
Kernel random_kernel(int d, int level, int m1, int m2, std::uint64_t seed);

// T_j f = k_j * f with k_j(x) = 2^{-jd} k(2^{-j} x), sampled at cell scale.
struct SingleScaleOp {
  int j = 0;
  Kernel kernel;

  // kernel sample block size in cells on `grid` (throws if finer than cells)
  std::int64_t block(const GridSpec& grid) const;
  GridFunction apply(const GridFunction& f) const;
  GridFunction adjoint_apply(const GridFunction& g) const;
};

enum class ConstTag { Exact, UpperBound, Empirical };
const char* const_tag_name(ConstTag t);

struct ConstantsRecord {
  double p = 2, q = 2, kappa = 1;
  double a_circ = 0;          // uniform rescaled single-scale bound
  ConstTag a_circ_tag = ConstTag::UpperBound;
  double b = 0;               // regularity constant over offsets |h| <= 1
  ConstTag b_tag = ConstTag::UpperBound;
  double a_p = 0;             // weak-type endpoint, empirical battery maximum
  double a_p_upper = 0;       // triangle-inequality upper bound
  double a_q = 0;             // restricted-strong-type endpoint, empirical
  double a_q_upper = 0;
  double cost(bool empirical_endpoints = true) const;  // A(p)+A(q)+A.log(2+B/A.)
};

struct BRSFamily {
  int n1 = 0, n2 = 0;
  std::vector<SingleScaleOp> ops;  // ops[i] has j = n1 + i
  ConstantsRecord constants;

  const SingleScaleOp& op(int j) const { return ops[std::size_t(j - n1)]; }
};

BRSFamily make_family(const Kernel& k, int n1, int n2);

GridFunction apply(const BRSFamily& fam, const GridFunction& f, int lo, int hi);
GridFunction apply(const BRSFamily& fam, const GridFunction& f);
GridFunction adjoint_apply(const BRSFamily& fam, const GridFunction& g, int lo, int hi);
GridFunction adjoint_apply(const BRSFamily& fam, const GridFunction& g);

// S_Q f = sum_{n1 <= j <= min(L(Q), n2)} T_j [f 1_Q]
GridFunction partial_sum(const BRSFamily& fam, const GridFunction& f, const DyadicCube& Q);

// exact L^2 -> L^2 operator norm of `forward` on functions over `grid`
// (power iteration on T*T with deterministic restarts)
double operator_norm_l2(const GridSpec& grid, int n, int m_in,
                        const std::function<GridFunction(const GridFunction&)>& forward,
                        const std::function<GridFunction(const GridFunction&)>& adjoint,
                        std::uint64_t seed = 11);

ConstantsRecord certify(BRSFamily& fam, const GridSpec& grid, double p, double q,
                        double kappa, std::uint64_t seed = 11, int battery = 8);

struct DecayReport {
  std::vector<double> norms;   // max_j rescaled ||T_j (I - E_{k-j})||, k = 1..K
  std::vector<int> ks;
  double slope = 0;            // fitted log2 slope over the nonzero entries
  double bound = 0;            // -theta + 0.1
  bool resolution_floor = false;  // some k hit blocks finer than cells (norm 0)
  bool ok = false;
};

DecayReport regularity_decay_check(const BRSFamily& fam, const GridSpec& grid, double p,
                                   double q, double theta, int kmax = 5,
                                   std::uint64_t seed = 11);

// Frequency-multiplier decomposition demo (d = 1, p = q = 2) on the torus
// grid of 2^levels cells over [0,1).  Symbol samples are indexed in DFT
// order (frequency t for t <= N/2, t - N above); empty symbol means m == 1.
struct MultiplierSpec {
  int levels = 7;
  int k_min = 2, k_max = 4;  // active octaves: partition covers 2^k_min..2^k_max
  int ell_max = 6;
  std::vector<double> symbol;
};

struct MultiplierReport {
  double telescoping_error = 0;     // cutoff telescoping identity residual
  double partition_residual = 0;    // |sum_k phi_k thetahat_k - 1| on the band
  double reconstruction_error = 0;  // relative L^2 error vs direct multiplier
  std::vector<double> a_circ_ell;   // exact 2->2 norms, sup over k, per ell
  std::vector<double> a_ell;        // same with the (1+ell)-weighted sum below
  double b_circ_sum = 0, b_sum = 0;
  std::vector<double> theta_moments;  // discrete moments of the oscillating profile
  bool ok = false;
};

MultiplierReport decompose_multiplier(const MultiplierSpec& spec, std::uint64_t seed = 21);

// smooth compactly supported symbol for demos, in DFT index order
std::vector<double> smooth_symbol(int levels, int k_min, int k_max, std::uint64_t seed);

}  // namespace convexdom
