#pragma once

#include <Eigen/Dense>

#include "convexdom/dyadic.hpp"

namespace convexdom {

// norm on the value space R^m
enum class NormTag { Euclidean, Sum, Max };

NormTag dual_tag(NormTag t);
double vec_norm(const double* v, int m, NormTag t);
// norming functional: psi with |psi|_{B*} = 1 and <v, psi> = |v|_B  (0 if v=0)
void norming_vector(const double* v, int m, NormTag t, double* psi);

// Piecewise-constant function on a grid: n components, each valued in R^m.
struct GridFunction {
  GridSpec grid;
  int n = 1, m = 1;
  NormTag norm = NormTag::Euclidean;
  std::vector<double> values;  // [cell][component i][value coord j]

  GridFunction() = default;
  GridFunction(const GridSpec& g, int n_, int m_, NormTag t = NormTag::Euclidean)
      : grid(g), n(n_), m(m_), norm(t), values(std::size_t(g.cell_count()) * n_ * m_, 0.0) {}

  double& at(std::int64_t cell, int i = 0, int j = 0) {
    return values[std::size_t(cell) * n * m + std::size_t(i) * m + j];
  }
  double at(std::int64_t cell, int i = 0, int j = 0) const {
    return values[std::size_t(cell) * n * m + std::size_t(i) * m + j];
  }
  const double* cell_ptr(std::int64_t cell, int i = 0) const {
    return values.data() + std::size_t(cell) * n * m + std::size_t(i) * m;
  }
  double* cell_ptr(std::int64_t cell, int i = 0) {
    return values.data() + std::size_t(cell) * n * m + std::size_t(i) * m;
  }
  // |f_i(x)|_B for component i
  double magnitude(std::int64_t cell, int i = 0) const { return vec_norm(cell_ptr(cell, i), m, norm); }

  GridFunction component(int i) const;
  CellMask support() const;
  GridFunction restricted(const CellMask& mask) const;  // f * indicator(mask)

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double c);
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

  double max_abs() const;
};

// single B-valued function sum_i u_i f_i (result has n = 1)
GridFunction combine(const GridFunction& f, const Eigen::VectorXd& u);
// componentwise matrix action (R f)_i = sum_k R(i,k) f_k
GridFunction matrix_apply(const Eigen::MatrixXd& R, const GridFunction& f);

// (avg_{region} |f|_B^p)^{1/p}; sup norm for p = inf; requires n = 1
double lp_average(const GridFunction& f, const CellMask& region, double p);
// unnormalized global norm (int |f|^p)^{1/p}
double lp_norm(const GridFunction& f, double p);

double weak_lp_norm(const GridFunction& f, double p);
double lorentz_q1_norm(const GridFunction& f, double q);

// sum_i int <f_i, g_i> dx  (coordinate duality on R^m)
double pairing(const GridFunction& f, const GridFunction& g);

// f(x + h) - f(x), h in cell units; reads outside the root are zero
GridFunction finite_difference(const GridFunction& f, const std::array<std::int64_t, 2>& h);
// plain shift f(x + h)
GridFunction shift(const GridFunction& f, const std::array<std::int64_t, 2>& h);

// Dil_{2^j} f(x) = f(2^j x): exact re-indexing onto the shifted grid
GridFunction dilate(const GridFunction& f, int j);

// direct-summation convolution, kernel on a grid with the same cell level
GridFunction convolve(const GridFunction& f, const GridFunction& kernel);

// average over dyadic cubes of side 2^{-k} (blocks aligned to the root)
GridFunction conditional_expectation(const GridFunction& f, int k);

enum class MaximalMode { Dyadic, AllGridCubes };

// (M |f|^p)^{1/p} over cubes containing x; f must have n = 1
GridFunction maximal_function(const GridFunction& f, double p, MaximalMode mode);

}  // namespace convexdom
