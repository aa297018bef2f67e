#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "rigidity/errors.hpp"

namespace rigidity {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix identity(int d) { return Matrix::Identity(d, d); }

inline Eigen::VectorXd singular_values(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

/// Operator norm induced by the Euclidean inner product.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

/// log(|M| |M^-1|) from a single SVD.
inline double log_condition(const Matrix& m) {
  const Eigen::VectorXd s = singular_values(m);
  return std::log(s(0)) - std::log(s(s.size() - 1));
}

inline double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

inline double min_eigen_modulus(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, false);
  return solver.eigenvalues().cwiseAbs().minCoeff();
}

/// A matrix stored as exp(log_scale) * unit, with unit kept at max-abs-entry 1.
/// Long cocycle products accumulate here so that they neither overflow nor
/// underflow.
struct ScaledMatrix {
  Matrix unit;
  double log_scale = 0.0;

  static ScaledMatrix identity(int d) { return {Matrix::Identity(d, d), 0.0}; }

  void renormalize() {
    const double s = unit.cwiseAbs().maxCoeff();
    if (s > 0.0 && std::isfinite(s)) {
      unit /= s;
      log_scale += std::log(s);
    }
  }

  double log_norm() const { return log_scale + std::log(spectral_norm(unit)); }

  /// Materialize; overflows to inf for large log_scale.
  Matrix value() const { return unit * std::exp(log_scale); }
};

inline constexpr int kRenormalizeEvery = 32;

// Symmetric positive definite matrix functions via the self-adjoint solver.
template <class F>
Matrix spd_apply(const Matrix& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Vector v = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix spd_sqrt(const Matrix& m) {
  return spd_apply(m, [](double x) { return std::sqrt(x); });
}
inline Matrix spd_inv_sqrt(const Matrix& m) {
  return spd_apply(m, [](double x) { return 1.0 / std::sqrt(x); });
}
inline Matrix spd_log(const Matrix& m) {
  return spd_apply(m, [](double x) { return std::log(x); });
}
inline Matrix sym_exp(const Matrix& m) {
  return spd_apply(m, [](double x) { return std::exp(x); });
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline int gcd_int(long a, long b) {
  a = std::labs(a);
  b = std::labs(b);
  while (b != 0) {
    const long t = a % b;
    a = b;
    b = t;
  }
  return static_cast<int>(a);
}

inline long lcm_long(long a, long b) { return a / gcd_int(a, b) * b; }

}  // namespace rigidity
