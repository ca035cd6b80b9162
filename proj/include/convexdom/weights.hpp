#pragma once

#include <Eigen/Dense>

#include "convexdom/convexbody.hpp"
#include "convexdom/gridfn.hpp"

namespace convexdom {

// cellwise symmetric positive definite n x n field
struct MatrixWeight {
  GridSpec grid;
  int n = 1;
  std::vector<Eigen::MatrixXd> cells;

  MatrixWeight() = default;
  MatrixWeight(const GridSpec& g, int n_)
      : grid(g), n(n_), cells(std::size_t(g.cell_count()), Eigen::MatrixXd::Identity(n_, n_)) {}

  const Eigen::MatrixXd& at(std::int64_t c) const { return cells[std::size_t(c)]; }
  Eigen::MatrixXd& at(std::int64_t c) { return cells[std::size_t(c)]; }
  MatrixWeight power(double beta) const;  // cellwise spectral power
  void check_spd() const;
};

// all dyadic subcubes of the root, down to cell level
std::vector<DyadicCube> all_dyadic_subcubes(const GridSpec& grid);

// [W]_{A_r}: sup over cubes of the double operator-norm average
double a_r_constant(const MatrixWeight& W, double r,
                    const std::vector<DyadicCube>& cubes);
double a_r_constant(const MatrixWeight& W, double r);  // default cube family

// scalar weight x -> |W^{1/r}(x) y|^r
GridFunction scalar_weight(const MatrixWeight& W, double r, const Eigen::VectorXd& y);

struct ScalarSupResult {
  double value = 0;
  Eigen::VectorXd best_direction;
};
// sup over a seeded direction grid of the scalar A_r constant of W^{Sc}_{r,y}
ScalarSupResult scalar_sup_a_r(const MatrixWeight& W, double r, int directions = 0,
                               std::uint64_t seed = 3);

// classical scalar A_r of a positive cell field over a cube family
double scalar_a_r(const GridFunction& w, double r, const std::vector<DyadicCube>& cubes);

// reverse Holder constant: sup_y sup_Q (avg (|W^{1/t}y|^t)^s)^{1/s} / avg |W^{1/t}y|^t
double rh_ts_constant(const MatrixWeight& W, double t, double s,
                      const std::vector<DyadicCube>& cubes, int directions = 0,
                      std::uint64_t seed = 3);
double rh_ts_constant(const MatrixWeight& W, double t, double s);

struct ReducingMatrices {
  Eigen::MatrixXd A;  // |A x| sandwiches (avg_Q |W^{1/r}(y)x|^r)^{1/r}
  Eigen::MatrixXd B;  // |B x| sandwiches (avg_Q |W^{-1/r}(y)x|^{r'})^{1/r'}
  double cert_lower_a = 0, cert_upper_a = 0;  // min/max of |Ax|/rho_A(x) over samples
  double cert_lower_b = 0, cert_upper_b = 0;
};

ReducingMatrices reducing_matrices(const MatrixWeight& W, const DyadicCube& Q, double r,
                                   const JohnOptions& opts = {.tol = 0.02, .directions = 512});

// dual weight Sigma = W^{-r'/r}
MatrixWeight dual_weight(const MatrixWeight& W, double r);

struct DualityReport {
  double lhs = 0;  // [W]_{A_r}^{1/r}
  double rhs = 0;  // [Sigma]_{A_{r'}}^{1/r'}
  double ratio = 0;
};
DualityReport duality_report(const MatrixWeight& W, double r);

struct CordesReport {
  double lhs = 0;  // |A^a B^a|_op
  double rhs = 0;  // |A B|_op^a
  bool ok = false;
};
CordesReport cordes_check(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double alpha);

enum class WeightKind { Identity, ScalarPower, RotatedDiagonal, RandomLogSpd };

struct WeightParams {
  double alpha = 0;       // scalar power / first diagonal exponent
  double beta = 0;        // second diagonal exponent (rotated diagonal)
  double r = 2;           // class whose admissible range is enforced
  double amplitude = 1;   // random field amplitude
  int smoothness = 2;     // moving-average radius for the random field
  std::array<double, 2> x0{0, 0};  // singular point for power weights
  double rotation = 0.6;  // rotation angle for the rotated diagonal kind
};

MatrixWeight weight_generator(const GridSpec& grid, int n, WeightKind kind,
                              const WeightParams& params, std::uint64_t seed);

// lambda = alpha * (beta'(1+eta))'  (conjugate-exponent arithmetic)
double lambda_exponent(double alpha, double beta, double eta);

struct DeltaSigma {
  double delta = 0;  // 1/(2^{d+1} [W]^{Sc}_{A_r} - 1)
  double sigma = 0;  // same for the dual weight at r'
};
DeltaSigma delta_sigma(const MatrixWeight& W, double r);

}  // namespace convexdom
