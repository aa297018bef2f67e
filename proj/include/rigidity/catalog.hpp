#pragma once

// Built-in shifts and generators used by the tests and the shipped configs.

#include <cmath>
#include <string>
#include <vector>

#include "rigidity/cocycle.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/sft.hpp"

namespace rigidity::catalog {

inline Matrix rotation(double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline Matrix shear() {
  Matrix s(2, 2);
  s << 1.0, 1.0, 0.0, 1.0;
  return s;
}

/// exp of a traceless 2x2 matrix (g^2 = -det(g) I).
inline Matrix traceless_exp(const Matrix& g) {
  const double s = -g.determinant();
  const Matrix id = Matrix::Identity(2, 2);
  if (s > 1e-300) return std::cosh(std::sqrt(s)) * id + std::sinh(std::sqrt(s)) / std::sqrt(s) * g;
  if (s < -1e-300) return std::cos(std::sqrt(-s)) * id + std::sin(std::sqrt(-s)) / std::sqrt(-s) * g;
  return id + g;
}

inline Sft full2(double tau = 1.0) { return Sft::full_shift(2, tau); }
inline Sft golden(double tau = 1.0) { return Sft::golden_mean(tau); }

/// Angles of R_{x_0} for symbols 1 and 2.
inline const std::vector<double>& rotation_angles() {
  static const std::vector<double> a{1.0, 2.0};
  return a;
}

inline Generator identity(const Sft& sft, int d = 2) { return Generator::constant(sft, Matrix::Identity(d, d)); }

inline Generator hyperbolic(const Sft& sft) { return Generator::constant(sft, diag2(2.0, 0.5)); }

inline Generator rotations(const Sft& sft) {
  std::vector<Matrix> per;
  for (std::size_t s = 0; s < sft.alphabet_size(); ++s) per.push_back(rotation(rotation_angles()[s % 2]));
  return Generator::by_symbol(sft, per);
}

/// S R_{x_0} S^{-1}; preserves normalize(S^{-T} S^{-1}).
inline Generator conjugated_rotation(const Sft& sft) {
  const Matrix s = shear(), si = s.inverse();
  std::vector<Matrix> per;
  for (std::size_t k = 0; k < sft.alphabet_size(); ++k) per.push_back(s * rotation(rotation_angles()[k % 2]) * si);
  return Generator::by_symbol(sft, per);
}

/// Q(x) for the manufactured conjugate, indexed by x_0.
inline Matrix transfer_matrix(Symbol s) {
  Matrix q(2, 2);
  if (s % 2 == 0)
    q << 1.0, 0.5, 0.0, 1.0;
  else
    q << 2.0, 0.0, 0.3, 0.5;
  return q;
}

/// Q(f x) R_{x_0} Q(x)^{-1} on window [0, 1].
inline Generator manufactured_conjugate(const Sft& sft) {
  return Generator::from_function(sft, 2, Window{0, 1}, [](const SymbolString& w) {
    return Matrix(transfer_matrix(w[1]) * rotation(rotation_angles()[static_cast<std::size_t>(w[0]) % 2]) *
                  transfer_matrix(w[0]).inverse());
  });
}

/// Depends on x_0 only, not conformal: symbol 1 a shear-like matrix, symbol 2
/// a rotated stretch.
inline Generator mixed(const Sft& sft) {
  Matrix a(2, 2);
  a << 1.5, 0.3, 0.2, 0.8;
  const Matrix b = rotation(0.7) * diag2(1.2, 1.0 / 1.2);
  std::vector<Matrix> per;
  for (std::size_t k = 0; k < sft.alphabet_size(); ++k) per.push_back(k % 2 == 0 ? a : b);
  return Generator::by_symbol(sft, per);
}

/// Near-identity generator on window [-1, 2]: exp of a small traceless
/// matrix chosen by (x_{-1}, x_0, x_1, x_2).
inline Generator bunched(const Sft& sft, double strength = 0.05) {
  return Generator::from_function(sft, 2, Window{-1, 2}, [strength](const SymbolString& w) {
    Matrix g(2, 2);
    const double a = w[0] + 1.0, b = w[1] + 1.0, c = w[2] + 1.0, e = w[3] + 1.0;
    g << 0.3 * a - 0.2 * c + 0.1 * e, 0.5 * b - 0.1 * a, 0.2 * c + 0.1 - 0.15 * e, -(0.3 * a - 0.2 * c + 0.1 * e);
    return traceless_exp(strength * g);
  });
}

/// diag(2, 1/2) on symbol 1, R_1 on symbol 2: an expanding fixed point and a
/// conformal one.
inline Generator expanding_and_elliptic(const Sft& sft) {
  std::vector<Matrix> per;
  for (std::size_t k = 0; k < sft.alphabet_size(); ++k) per.push_back(k % 2 == 0 ? diag2(2.0, 0.5) : rotation(1.0));
  return Generator::by_symbol(sft, per);
}

inline std::vector<std::string> shift_names() { return {"full2", "golden"}; }

inline std::vector<std::string> generator_names() {
  return {"identity", "hyperbolic", "rotations", "conjugated_rotation", "manufactured_conjugate",
          "mixed", "bunched", "expanding_and_elliptic"};
}

inline Sft shift_by_name(const std::string& name, double tau = 1.0) {
  if (name == "full2") return full2(tau);
  if (name == "golden") return golden(tau);
  throw Error(ErrorCode::InvalidArgument, "unknown shift '" + name + "'");
}

inline Generator generator_by_name(const std::string& name, const Sft& sft) {
  if (name == "identity") return identity(sft);
  if (name == "hyperbolic") return hyperbolic(sft);
  if (name == "rotations") return rotations(sft);
  if (name == "conjugated_rotation") return conjugated_rotation(sft);
  if (name == "manufactured_conjugate") return manufactured_conjugate(sft);
  if (name == "mixed") return mixed(sft);
  if (name == "bunched") return bunched(sft);
  if (name == "expanding_and_elliptic") return expanding_and_elliptic(sft);
  throw Error(ErrorCode::InvalidArgument, "unknown generator '" + name + "'");
}

}  // namespace rigidity::catalog
