#pragma once

#include <functional>
#include <string>

#include "convexdom/gridfn.hpp"
#include "convexdom/mvee.hpp"

namespace convexdom {

// Symmetric convex body of the tuple (f_1..f_n) over a region, exposed through
// its support function h(u) = ||sum_i u_i f_i||_{avg-L^p(region)}.
struct BodyOracle {
  const GridFunction* f = nullptr;
  CellMask region;
  double p = 2.0;

  BodyOracle() = default;
  BodyOracle(const GridFunction& fn, const CellMask& reg, double pexp)
      : f(&fn), region(reg), p(pexp) {}

  int dim() const { return f->n; }
  double support(const Eigen::VectorXd& u) const;
  // boundary point a with a.u maximal: a_i = <f_i, phi_u> for the norming
  // functional phi_u of the combination in the averaged L^p pairing
  Eigen::VectorXd norming_point(const Eigen::VectorXd& u) const;
  // Gram matrix M_ik = avg_region <f_i, f_k>; the body is M^{1/2}*ball at p=2
  Eigen::MatrixXd gram() const;
  bool gram_exact() const { return p == 2.0 && (f->m == 1 || f->norm == NormTag::Euclidean); }
};

struct Ellipsoid {
  Eigen::MatrixXd shape;  // E = shape * closed unit ball, shape symmetric PSD
  int rank = 0;
  double support(const Eigen::VectorXd& u) const { return (shape * u).norm(); }
};

struct JohnCertificate {
  double max_inner_ratio = 0;  // max h_E(u)/h(u) over sampled directions
  double max_outer_ratio = 0;  // max h(u)/(sqrt(n)*h_E(u))
  int directions = 0;
  int rounds = 0;
  bool passed = false;
};

struct JohnOptions {
  double tol = 0.02;
  int directions = 4096;
  std::uint64_t seed = 1;
  int max_rounds = 60;
};

using SupportFn = std::function<double(const Eigen::VectorXd&)>;

// Maximum-volume inscribed ellipsoid of the body with support function h,
// with a sampled sandwich certificate h_E <= (1+eps)h <= sqrt(n)(1+tol) h_E.
std::pair<Ellipsoid, JohnCertificate> john_ellipsoid(const SupportFn& h, int n,
                                                     const JohnOptions& opts = {});

enum class BodyDotMethod { Auto, Ascent, GridCertified, GramExact };

struct BodyDotResult {
  double value = 0;
  std::string method;
  bool certified = false;
  double ascent_value = -1;
  double grid_value = -1;
};

// right endpoint of the Minkowski product interval: max a.b over the two bodies
BodyDotResult body_dot(const BodyOracle& F, const BodyOracle& G,
                       BodyDotMethod method = BodyDotMethod::Auto, std::uint64_t seed = 7);

struct ReducingMap {
  Eigen::MatrixXd R;      // maps the inscribed ellipsoid of the f-body to the unit ball
  Eigen::MatrixXd Rinvt;  // R^{-T} (R symmetric, so R^{-1}); pairing-invariant partner
  Eigen::MatrixXd basis;  // orthonormal basis of the body's span (n x rank)
  int rank = 0;
};

// Reducing transform of the f-body on `region` at exponent p; degenerate
// directions are projected out (identity action on the orthogonal complement).
ReducingMap reducing_transform(const GridFunction& f, const CellMask& region, double p,
                               const JohnOptions& opts = {.tol = 0.02, .directions = 512});

struct TH1Report {
  double lhs = 0;   // sum_i ||f_i|| ||g_i|| after the reducing transform
  double rhs = 0;   // certified body dot product
  double bound = 0; // n^{3/2} (1+tol) rhs
  bool ok = false;
  int rank = 0;
};

TH1Report lemma_th1_check(const GridFunction& f, const GridFunction& g, const CellMask& region_f,
                          const CellMask& region_g, double p, double qprime, double tol = 0.05);

}  // namespace convexdom
