#pragma once

#include "convexdom/operators.hpp"
#include "convexdom/weights.hpp"

namespace convexdom {

struct DominationCertificate {
  SparseFamily family;
  double lhs = 0;        // |<T f, g>|
  double rhs = 0;        // sum |3Q| body_dot over 3Q averages
  double rhs_plain = 0;  // same with plain Q averages (reported, no inequality)
  double ratio = 0;      // lhs / rhs
  double constant_budget = 0;
  bool passed = false;
  double min_witness_ratio = kInf;  // min |E_Q|/|Q| seen at recursion levels
  double pairing_drift = 0;         // worst reducing-transform pairing error
  std::vector<std::string> trace;
};

struct OmegaResult {
  CellMask omega;  // level-set union, restricted to the cube
  CellMask eq;     // witness E = Q0 minus omega
  double tau_f = 0, tau_g = 0;
  bool ok = false;
  std::string diagnostic;
};

struct CZSplit {
  GridFunction good;
  CellMask omega;
  std::vector<DyadicCube> cubes;  // Whitney cubes carrying bad parts
  std::vector<GridFunction> bad;  // bad[k] supported on cubes[k]
  std::vector<CellBox> dilates;   // smallest grid cube containing P that meets omega^c
  double reconstruction_error = 0;
  double mean_zero_error = 0;
  double sup_bound_worst = 0;  // max over cubes/components of lhs/rhs of the dilate bound
  bool sup_ok = true;
};

struct DominationOptions {
  double gamma = 0.5;
  double tol_body = 0.05;
  std::uint64_t seed = 7;
  int max_trace = 64;
};

// disjoint side-2^j tiling with E_Q = Q; asserts the explicit-constant bound
DominationCertificate single_scale_dominate(const SingleScaleOp& op, double a_circ,
                                            const GridFunction& f, const GridFunction& g,
                                            double p, double q,
                                            const DominationOptions& opts = {});

// level sets of the windowed maximal functions above the scale-invariant
// thresholds; asserts |E| >= gamma |Q0| and reports the offender otherwise
OmegaResult build_omega(const GridFunction& f, const GridFunction& g, const DyadicCube& Q0,
                        double p, double q, double gamma);

// good/bad splitting over the Whitney cubes of omega inside Q0;
// component_thresholds[i] = tau_f * |f_i|_{avg-L^p(Q0)}
CZSplit cz_decompose(const GridFunction& f, const CellMask& omega,
                     const WhitneyDecomposition& wd, const DyadicCube& Q0, double p,
                     const std::vector<double>& component_thresholds);

DominationCertificate multiscale_dominate(const BRSFamily& fam, const GridFunction& f,
                                          const GridFunction& g, const DyadicCube& Q0, double p,
                                          double q, const DominationOptions& opts = {});

// sum_Q |Q| body_dot of the plain-Q averages
double sparse_form(const SparseFamily& family, const GridFunction& f, const GridFunction& g,
                   double p, double qprime, std::uint64_t seed = 7);

// L~_r f(y) = sum_Q 1_Q(y) avg_Q |W^{-1/r}(x) W^{1/r}(y)|_op |f(x)| dx
GridFunction sparse_operator_apply(const SparseFamily& family, const MatrixWeight& W, double r,
                                   const GridFunction& f);
// L^r -> L^r norm: exact (dense SVD of the positive kernel) at r = 2,
// empirical battery maximum otherwise
double sparse_operator_norm(const SparseFamily& family, const MatrixWeight& W, double r,
                            std::uint64_t seed = 5);

// cellwise matrix power action W^beta f on the component index
GridFunction weight_apply(const MatrixWeight& W, double beta, const GridFunction& f);

// ||W^{1/r} f||_{L^r}
double weighted_norm(const GridFunction& f, const MatrixWeight& W, double r);

struct WeightedReport {
  double t = 0, s = 0;
  double a_t = 0, rh_ts = 0;
  double budget = 0;       // [W]_{A_t}^{t'/r+s/r'} [W]_{RH_{t,s}}^{1/r+s/r'}
  double max_ratio = 0;    // operator ratio / budget over the battery
  double majorant_worst = 0;  // max body_dot / double-average majorant per cube
  bool majorant_ok = false;
  bool ok = false;
};

WeightedReport weighted_experiment(const BRSFamily& fam, const MatrixWeight& W, double p,
                                   double q, double r, int battery = 6,
                                   std::uint64_t seed = 17);

// [B, T] f = B (T f) - T (B f), T acting componentwise (scalar kernel)
GridFunction commutator_apply(const MatrixWeight& B, const BRSFamily& fam,
                              const GridFunction& f);

// oscillation sparse forms (A, A*) over the family
std::pair<double, double> commutator_forms(const SparseFamily& family, const MatrixWeight& B,
                                           const GridFunction& f, const GridFunction& g,
                                           double p, double qprime);

double bmo_norm(const GridFunction& b);  // sup over dyadic cubes of mean oscillation

struct JNReport {
  std::vector<double> exponents;
  std::vector<double> constants;  // (avg |b-<b>|^a)^{1/a} / (a ||b||_BMO), worst cube
  double max_constant = 0;
  bool ok = false;
};
JNReport jn_check(const GridFunction& b, const std::vector<double>& exponents = {2, 4, 8});

double c_qr(double q, double r);  // (q-r)/(r(q-1)+q(r-1))

struct ComNumbersReport {
  double min_constant = kInf;  // min over the grid of value/theta
  bool ok = false;             // positive on the whole grid
};
// value(theta) = r' - q'u (rs(1+theta)/(q'u))' with u = 1 + C_{q,r} theta
ComNumbersReport com_numbers_check(double q, double r, int gridpoints = 100);

struct CommutatorWeightedReport {
  double t = 0, s = 0;
  double a_t = 0, rh_ts = 0, bmo = 0;
  double budget = 0;  // [W]_{A_t}^s [W]_{RH_{t,s}}^s + [W]_{A_t}^{1/(t-1)}
  double max_ratio = 0;
  bool ok = false;
};
CommutatorWeightedReport commutator_weighted_experiment(const BRSFamily& fam,
                                                        const MatrixWeight& W,
                                                        const MatrixWeight& B, double p, double q,
                                                        double r, int battery = 4,
                                                        std::uint64_t seed = 19);

}  // namespace convexdom
