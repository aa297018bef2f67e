#pragma once

// Conformal structures on R^d as unit-determinant SPD matrices, the GL(d)
// action, the affine-invariant distance, weighted barycenters and fixed
// structures of elliptic matrices.

#include <cmath>
#include <string>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

namespace rigidity {

class ConformalStructure {
 public:
  ConformalStructure() = default;

  /// Checks symmetry, positivity and det 1.
  explicit ConformalStructure(Matrix form) : form_(std::move(form)) {
    require(form_.rows() == form_.cols() && form_.rows() > 0, ErrorCode::InvalidStructure, "form must be square");
    const double scale = std::max(1.0, form_.cwiseAbs().maxCoeff());
    require((form_ - form_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorCode::InvalidStructure,
            "form is not symmetric");
    form_ = symmetrize(form_);
    Eigen::SelfAdjointEigenSolver<Matrix> es(form_, Eigen::EigenvaluesOnly);
    require(es.eigenvalues()(0) > 0.0, ErrorCode::InvalidStructure, "form is not positive definite");
    require(std::abs(es.eigenvalues().array().log().sum()) <= 1e-10, ErrorCode::InvalidStructure,
            "form does not have determinant 1");
  }

  static ConformalStructure identity(int d) { return ConformalStructure(Matrix::Identity(d, d)); }

  /// det^{-1/d} * (symmetric part of m); m must be positive definite. The
  /// result has det 1 up to the rounding of an ill-conditioned determinant,
  /// so it skips the det check of the public constructor.
  static ConformalStructure normalize(const Matrix& m) {
    require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::InvalidStructure, "form must be square");
    Matrix s = symmetrize(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    require(es.eigenvalues()(0) > 0.0 && std::isfinite(es.eigenvalues()(s.rows() - 1)), ErrorCode::InvalidStructure,
            "matrix is not positive definite");
    const double log_det = es.eigenvalues().array().log().sum();
    s *= std::exp(-log_det / static_cast<double>(s.rows()));
    ConformalStructure out;
    out.form_ = std::move(s);
    return out;
  }

  const Matrix& form() const { return form_; }
  int dimension() const { return static_cast<int>(form_.rows()); }

  Vector eigenvalues() const {
    return Eigen::SelfAdjointEigenSolver<Matrix>(form_, Eigen::EigenvaluesOnly).eigenvalues();
  }

  /// C with C^{-1}|v| <= |v|_eta <= C|v|, i.e. max(sqrt(e_max), 1/sqrt(e_min)).
  double comparison_constant() const {
    const Vector e = eigenvalues();
    return std::max(std::sqrt(e(e.size() - 1)), 1.0 / std::sqrt(e(0)));
  }

 private:
  Matrix form_;
};

/// det-1 normalization of B^T eta B.
inline ConformalStructure push(const Matrix& b, const ConformalStructure& eta) {
  require(b.rows() == eta.dimension() && b.cols() == eta.dimension(), ErrorCode::InvalidArgument,
          "dimension mismatch in push");
  return ConformalStructure::normalize(b.transpose() * eta.form() * b);
}

/// B[eta] = push(B^{-1}, eta).
inline ConformalStructure pull(const Matrix& b, const ConformalStructure& eta) {
  require(b.rows() == eta.dimension() && b.cols() == eta.dimension(), ErrorCode::InvalidArgument,
          "dimension mismatch in pull");
  const Matrix inv = b.inverse();
  return ConformalStructure::normalize(inv.transpose() * eta.form() * inv);
}

/// sqrt(sum log^2 eig(eta1^{-1} eta2)), as the generalized problem
/// eta2 v = l eta1 v (Cholesky of eta1).
inline double distance(const ConformalStructure& a, const ConformalStructure& b) {
  const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(b.form(), a.form(),
                                                            Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  return std::sqrt(es.eigenvalues().array().log().square().sum());
}

/// Point at parameter t on the geodesic from a to b.
inline ConformalStructure geodesic(const ConformalStructure& a, const ConformalStructure& b, double t) {
  const Matrix r = spd_sqrt(a.form());
  const Matrix ri = spd_inv_sqrt(a.form());
  const Matrix inner = spd_apply(symmetrize(ri * b.form() * ri), [t](double x) { return std::pow(x, t); });
  return ConformalStructure::normalize(r * inner * r);
}

inline ConformalStructure geodesic_midpoint(const ConformalStructure& a, const ConformalStructure& b) {
  return geodesic(a, b, 0.5);
}

/// Weighted barycenter by the fixed-point iteration
///   X <- X^{1/2} exp(sum w_i log(X^{-1/2} eta_i X^{-1/2})) X^{1/2}.
inline ConformalStructure karcher_mean(const std::vector<ConformalStructure>& points,
                                       std::vector<double> weights = {}, int max_iter = 10000,
                                       double tol = 1e-12) {
  require(!points.empty(), ErrorCode::InvalidArgument, "karcher_mean needs at least one point");
  if (weights.empty()) weights.assign(points.size(), 1.0);
  require(weights.size() == points.size(), ErrorCode::InvalidArgument, "one weight per point");
  double total = 0.0;
  for (double w : weights) {
    require(w > 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "weights must be positive");
    total += w;
  }
  const int d = points.front().dimension();
  ConformalStructure x = points.front();
  for (int it = 0; it < max_iter; ++it) {
    const Matrix r = spd_sqrt(x.form());
    const Matrix ri = spd_inv_sqrt(x.form());
    Matrix step = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < points.size(); ++i)
      step += (weights[i] / total) * spd_log(symmetrize(ri * points[i].form() * ri));
    step = symmetrize(step);
    x = ConformalStructure::normalize(r * sym_exp(step) * r);
    if (step.norm() < tol) return x;
  }
  throw Error(ErrorCode::NoConvergence, "karcher_mean did not converge");
}

inline constexpr int kEllipticPowerCheck = 256;
inline constexpr double kEllipticBound = 1e6;

/// max over 1 <= n <= 256 of cond(M^n) for the det-normalized M.
inline double power_distortion(const Matrix& m, int n_max = kEllipticPowerCheck) {
  const int d = static_cast<int>(m.rows());
  const double det = m.determinant();
  require(std::abs(det) > 0.0, ErrorCode::InvalidArgument, "matrix is singular");
  const Matrix unit = m / std::pow(std::abs(det), 1.0 / d);
  Matrix p = Matrix::Identity(d, d);
  double worst = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    p = unit * p;
    const Vector s = singular_values(p);
    const double c = s(0) / s(s.size() - 1);
    if (!std::isfinite(c)) return c;
    worst = std::max(worst, c);
  }
  return worst;
}

/// A structure eta with pull(M, eta) = eta, by Krasnoselskii-Mann midpoint steps
/// eta <- midpoint(eta, pull(M, eta)) started at the identity.
inline ConformalStructure invariant_structure_elliptic(const Matrix& m, double tol = 1e-12, int max_iter = 100000) {
  require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::InvalidArgument, "matrix must be square");
  const double pd = power_distortion(m);
  require(std::isfinite(pd) && pd < kEllipticBound, ErrorCode::NotElliptic,
          "powers are unbounded (distortion " + std::to_string(pd) + ")");
  ConformalStructure eta = ConformalStructure::identity(static_cast<int>(m.rows()));
  for (int it = 0; it <= max_iter; ++it) {
    const ConformalStructure image = pull(m, eta);
    if (distance(image, eta) <= tol) return eta;
    eta = geodesic_midpoint(eta, image);
  }
  throw Error(ErrorCode::NoConvergence, "midpoint iteration did not reach tolerance");
}

}  // namespace rigidity
