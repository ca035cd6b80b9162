#include "convexdom/mvee.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace convexdom {

Eigen::MatrixXd spd_power(const Eigen::MatrixXd& A, double beta, double eig_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXd ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) <= eig_floor * std::max(scale, 1e-300))
      throw std::domain_error("spd_power: matrix not positive definite");
    ev(i) = std::pow(ev(i), beta);
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd mvee_symmetric(const Eigen::MatrixXd& P, double eps, int max_iter) {
  const int n = int(P.rows());
  const int K = int(P.cols());
  if (K < n) throw std::invalid_argument("mvee_symmetric: too few points");

  Eigen::VectorXd lam = Eigen::VectorXd::Constant(K, 1.0 / K);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < K; ++k) X += lam(k) * P.col(k) * P.col(k).transpose();

  auto recompute = [&](Eigen::MatrixXd& Xinv, Eigen::VectorXd& kap) {
    X = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < K; ++k)
      if (lam(k) > 0) X += lam(k) * P.col(k) * P.col(k).transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    if (llt.info() != Eigen::Success) throw std::runtime_error("mvee_symmetric: degenerate point set");
    Xinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    for (int k = 0; k < K; ++k) kap(k) = P.col(k).dot(Xinv * P.col(k));
  };

  Eigen::MatrixXd Xinv(n, n);
  Eigen::VectorXd kap(K);
  recompute(Xinv, kap);

  double prev_gap = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    int jp = 0, jm = -1;
    for (int k = 1; k < K; ++k)
      if (kap(k) > kap(jp)) jp = k;
    for (int k = 0; k < K; ++k)
      if (lam(k) > 1e-14 && (jm < 0 || kap(k) < kap(jm))) jm = k;
    double ep = kap(jp) / n - 1.0;
    double em = 1.0 - kap(jm) / n;
    if (ep < eps && em < eps) break;
    // convergence has stalled: stop and let the caller's sampled certificate
    // judge the ellipsoid instead of burning the full iteration budget
    if ((it & 1023) == 1023) {
      double gap = std::max(ep, em);
      if (gap > 0.9 * prev_gap) break;
      prev_gap = gap;
    }

    int i = (ep >= em) ? jp : jm;
    double ki = kap(i);
    if (std::abs(ki - 1.0) < 1e-15) break;
    double beta = (ki - n) / (n * (ki - 1.0));
    if (i == jm) beta = std::max(beta, -lam(i) / (1.0 - lam(i)));
    if (std::abs(beta) < 1e-17) break;

    // rank-one update of kappa via Sherman-Morrison on X' = (1-b)X + b p p^T
    Eigen::VectorXd q = Xinv * P.col(i);
    double denom = 1.0 - beta + beta * ki;
    for (int k = 0; k < K; ++k) {
      double pq = P.col(k).dot(q);
      kap(k) = (kap(k) - (beta / denom) * pq * pq) / (1.0 - beta);
    }
    Xinv = (Xinv - (beta / denom) * q * q.transpose()) / (1.0 - beta);
    lam *= (1.0 - beta);
    lam(i) += beta;

    if ((it + 1) % 2000 == 0) recompute(Xinv, kap);  // drift control
  }
  recompute(Xinv, kap);
  // G = Xinv / n: every point then satisfies p^T G p = kappa/n <= 1 + eps
  return Xinv / double(n);
}

}  // namespace convexdom
