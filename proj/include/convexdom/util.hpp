#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace convexdom {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Hölder conjugate: p' = p/(p-1), with 1' = inf and inf' = 1.
inline double conjugate(double p) {
  if (p < 1.0) throw std::invalid_argument("exponent must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

inline double pow2(int e) { return std::ldexp(1.0, e); }

// xorshift-based deterministic RNG (stable across platforms, unlike
// distribution wrappers around std::mt19937).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed * 0x9e3779b97f4a7c15ull + 1ull) {
    for (int i = 0; i < 4; ++i) next();
  }
  std::uint64_t next() {
    std::uint64_t x = state;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    state = x;
    return x;
  }
  // uniform in [0,1)
  double uniform() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + int(next() % std::uint64_t(hi - lo + 1));
  }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  Eigen::VectorXd sphere(int n) {
    while (true) {
      Eigen::VectorXd v = normal_vector(n);
      double r = v.norm();
      if (r > 1e-8) return v / r;
    }
  }
  Eigen::MatrixXd spd(int n, double cond = 10.0) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = normal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU);
    Eigen::VectorXd ev(n);
    for (int i = 0; i < n; ++i) ev(i) = std::exp(uniform(-std::log(cond) / 2, std::log(cond) / 2));
    return svd.matrixU() * ev.asDiagonal() * svd.matrixU().transpose();
  }
};

// Deterministic low-discrepancy directions on the unit sphere in R^n:
// a seeded offset plus an additive Kronecker sequence pushed through the
// inverse Gaussian-shell map (normals via Box-Muller on the sequence).
inline std::vector<Eigen::VectorXd> sphere_directions(int n, int count, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(count);
  Rng rng(seed);
  // axes first: certificates should always look at coordinate directions
  for (int i = 0; i < n && int(dirs.size()) < count; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = 1.0;
    dirs.push_back(e);
  }
  while (int(dirs.size()) < count) dirs.push_back(rng.sphere(n));
  return dirs;
}

inline double op_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

// least-squares slope of y against x
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need >=2 points");
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-14) throw std::invalid_argument("fit_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace convexdom
