#pragma once

// Markov measures compatible with an SFT: cylinder weights, the Parry
// (maximal entropy) measure, the u/s Jacobians and orbit sampling.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/rng.hpp"
#include "rigidity/sft.hpp"

namespace rigidity {

class MarkovMeasure {
 public:
  /// Validates support and row sums, then solves for the stationary vector.
  MarkovMeasure(Sft sft, Matrix stochastic) : sft_(std::move(sft)), p_(std::move(stochastic)) {
    const int l = static_cast<int>(sft_.alphabet_size());
    require(p_.rows() == l && p_.cols() == l, ErrorCode::InvalidMeasure, "stochastic matrix has wrong shape");
    for (int i = 0; i < l; ++i) {
      double row = 0.0;
      for (int j = 0; j < l; ++j) {
        const double v = p_(i, j);
        require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidMeasure, "negative or non-finite transition");
        require((v > 0.0) == sft_.allowed(i, j), ErrorCode::InvalidMeasure,
                "support of row " + std::to_string(i + 1) + " differs from the transition matrix");
        row += v;
      }
      require(std::abs(row - 1.0) <= 1e-12, ErrorCode::InvalidMeasure,
              "row " + std::to_string(i + 1) + " does not sum to 1");
    }
    // pi (P - I) = 0 with sum(pi) = 1: replace one equation by the normalization.
    Matrix a = p_.transpose() - Matrix::Identity(l, l);
    a.row(l - 1).setOnes();
    Vector rhs = Vector::Zero(l);
    rhs(l - 1) = 1.0;
    pi_ = a.fullPivLu().solve(rhs);
    // one refinement step
    Vector r = rhs - a * pi_;
    pi_ += a.fullPivLu().solve(r);
    require((pi_.array() > 0.0).all(), ErrorCode::InvalidMeasure, "stationary vector is not positive");
    require(((pi_.transpose() * p_).transpose() - pi_).cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidMeasure,
            "stationary vector did not converge");
  }

  const Sft& sft() const { return sft_; }
  const Matrix& stochastic() const { return p_; }
  const Vector& stationary() const { return pi_; }
  double p(Symbol i, Symbol j) const { return p_(i, j); }
  double pi(Symbol i) const { return pi_(i); }

  /// Transition matrix of the time-reversed chain, P*_ij = pi_j P_ji / pi_i.
  Matrix reversed() const {
    const int l = static_cast<int>(p_.rows());
    Matrix r(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) r(i, j) = pi_(j) * p_(j, i) / pi_(i);
    return r;
  }

  /// Entropy -sum pi_i P_ij log P_ij.
  double entropy() const {
    double h = 0.0;
    for (int i = 0; i < p_.rows(); ++i)
      for (int j = 0; j < p_.cols(); ++j)
        if (p_(i, j) > 0.0) h -= pi_(i) * p_(i, j) * std::log(p_(i, j));
    return h;
  }

 private:
  Sft sft_;
  Matrix p_;
  Vector pi_;
};

/// Perron eigenvalue and positive right eigenvector of Q (normalized to sum 1).
inline std::pair<double, Vector> perron_data(const Sft& sft) {
  const Matrix q = sft.transition_matrix();
  Eigen::EigenSolver<Matrix> es(q);
  int best = 0;
  for (int i = 1; i < q.rows(); ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  const double lambda = es.eigenvalues()(best).real();
  Vector v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  v /= v.sum();
  return {lambda, v};
}

/// Maximal entropy measure, P_ij = q_ij v_j / (lambda v_i).
inline MarkovMeasure parry_measure(const Sft& sft) {
  require(mixing_index(sft).has_value(), ErrorCode::NotMixing, "Parry measure needs a mixing shift");
  const auto [lambda, v] = perron_data(sft);
  const int l = static_cast<int>(sft.alphabet_size());
  Matrix p = Matrix::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j)
      if (sft.allowed(i, j)) p(i, j) = v(j) / (lambda * v(i));
    p.row(i) /= p.row(i).sum();
  }
  return MarkovMeasure(sft, p);
}

/// Random compatible measure: allowed entries drawn from [0.05, 1) and normalized.
inline MarkovMeasure random_markov_measure(const Sft& sft, Rng& rng) {
  const int l = static_cast<int>(sft.alphabet_size());
  Matrix p = Matrix::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j)
      if (sft.allowed(i, j)) p(i, j) = rng.uniform(0.05, 1.0);
    p.row(i) /= p.row(i).sum();
  }
  return MarkovMeasure(sft, p);
}

/// pi_{a_0} prod P_{a_i a_{i+1}}; 0 for an invalid word.
inline double cylinder_measure(const MarkovMeasure& mu, const SymbolString& symbols) {
  if (symbols.empty()) return 1.0;
  for (Symbol s : symbols)
    if (!mu.sft().has_symbol(s)) return 0.0;
  double m = mu.pi(symbols.front());
  for (std::size_t i = 0; i + 1 < symbols.size(); ++i) m *= mu.p(symbols[i], symbols[i + 1]);
  return m;
}

inline double cylinder_measure(const MarkovMeasure& mu, const Word& c) { return cylinder_measure(mu, c.symbols); }

/// J_u(y) = pi_{y_1} / (pi_{y_0} P_{y_0 y_1}).
inline double jacobian_u(const MarkovMeasure& mu, const SymbolicPoint& y) {
  require_valid(mu.sft(), y);
  return mu.pi(y[1]) / (mu.pi(y[0]) * mu.p(y[0], y[1]));
}

/// J_s(y) = pi_{y_-1} / (pi_{y_0} P*_{y_0 y_-1}), which equals 1 / P_{y_-1 y_0}.
inline double jacobian_s(const MarkovMeasure& mu, const SymbolicPoint& y) {
  require_valid(mu.sft(), y);
  const double reversed = mu.pi(y[-1]) * mu.p(y[-1], y[0]) / mu.pi(y[0]);
  return mu.pi(y[-1]) / (mu.pi(y[0]) * reversed);
}

/// Stationary Markov chain path of the given length, starting at index 0.
inline Word sample_orbit(const MarkovMeasure& mu, int length, std::uint64_t seed, std::uint64_t stream = 0) {
  require(length >= 1, ErrorCode::InvalidArgument, "orbit length must be positive");
  Rng rng(seed, stream);
  auto draw = [&](const Vector& probs) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
      acc += probs(i);
      if (u < acc && probs(i) > 0.0) return static_cast<Symbol>(i);
    }
    for (int i = static_cast<int>(probs.size()) - 1; i >= 0; --i)
      if (probs(i) > 0.0) return static_cast<Symbol>(i);
    return Symbol{0};
  };
  Word w{{}, 0};
  w.symbols.reserve(static_cast<std::size_t>(length));
  w.symbols.push_back(draw(mu.stationary()));
  for (int t = 1; t < length; ++t) {
    const Vector row = mu.stochastic().row(w.symbols.back()).transpose();
    w.symbols.push_back(draw(row));
  }
  return w;
}

/// A sampled point: a chain path on [-radius, radius] closed off by extend_to_point.
inline SymbolicPoint sample_point(const MarkovMeasure& mu, int radius, std::uint64_t seed, std::uint64_t stream = 0) {
  Word w = sample_orbit(mu, 2 * radius + 1, seed, stream);
  w.start_index = -radius;
  return extend_to_point(mu.sft(), w);
}

}  // namespace rigidity
