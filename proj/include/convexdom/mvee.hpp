#pragma once

#include <Eigen/Dense>

namespace convexdom {

// Minimum-volume central ellipsoid {x : x^T G x <= 1} enclosing the symmetric
// point set {+-p_k} (columns of P). Wolfe-Atwood multiplicative updates with
// away steps on the D-optimal design formulation; on return
// p_k^T G p_k <= 1 + eps for every k and det G is maximal up to O(n*eps).
Eigen::MatrixXd mvee_symmetric(const Eigen::MatrixXd& P, double eps = 1e-12, int max_iter = 200000);

// symmetric PSD square root / inverse square root
Eigen::MatrixXd spd_power(const Eigen::MatrixXd& A, double beta, double eig_floor = 1e-12);

}  // namespace convexdom
