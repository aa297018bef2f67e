#pragma once

// Locally constant GL(d) cocycles over an SFT: products A^n(x), the SL
// normalization, distortion, exact Lipschitz constants and Lyapunov exponents.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/markov.hpp"
#include "rigidity/sft.hpp"
#include "rigidity/window_table.hpp"

namespace rigidity {

inline constexpr double kMinAbsDeterminant = 1e-12;

/// A : Sigma -> GL(d) depending on x_{lo} .. x_{hi}.
class Generator {
 public:
  Generator(WindowTable<Matrix> table, int dimension)
      : table_(std::move(table)), inverse_(table_.sft(), table_.window()), d_(dimension) {
    require(d_ >= 1, ErrorCode::InvalidGenerator, "dimension must be positive");
    const auto missing = table_.missing();
    if (!missing.empty()) {
      std::string list;
      for (std::size_t i = 0; i < missing.size() && i < 8; ++i) list += (i ? ", [" : "[") + format_symbols(missing[i]) + "]";
      if (missing.size() > 8) list += ", ...";
      throw Error(ErrorCode::InvalidGenerator, "table misses window words " + list);
    }
    for (const auto& w : table_.words()) {
      const Matrix& m = table_.at(w);
      require(m.rows() == d_ && m.cols() == d_, ErrorCode::InvalidGenerator,
              "entry [" + format_symbols(w) + "] is not " + std::to_string(d_) + "x" + std::to_string(d_));
      require(m.allFinite(), ErrorCode::InvalidGenerator, "entry [" + format_symbols(w) + "] is not finite");
      require(std::abs(m.determinant()) > kMinAbsDeterminant, ErrorCode::InvalidGenerator,
              "entry [" + format_symbols(w) + "] is not invertible");
      inverse_.set(w, m.inverse());
    }
  }

  template <class F>
  static Generator from_function(const Sft& sft, int d, Window window, F&& f) {
    return Generator(WindowTable<Matrix>::build(sft, window, std::forward<F>(f)), d);
  }

  static Generator constant(const Sft& sft, const Matrix& m) {
    return from_function(sft, static_cast<int>(m.rows()), Window{0, 0}, [&](const SymbolString&) { return m; });
  }

  /// Generator depending on x_0 only.
  static Generator by_symbol(const Sft& sft, const std::vector<Matrix>& per_symbol) {
    require(per_symbol.size() == sft.alphabet_size(), ErrorCode::InvalidGenerator, "need one matrix per symbol");
    return from_function(sft, static_cast<int>(per_symbol.front().rows()), Window{0, 0},
                         [&](const SymbolString& w) { return per_symbol[static_cast<std::size_t>(w[0])]; });
  }

  const Sft& sft() const { return table_.sft(); }
  int dimension() const { return d_; }
  Window window() const { return table_.window(); }
  const WindowTable<Matrix>& table() const { return table_; }
  const WindowTable<Matrix>& inverse_table() const { return inverse_; }

  /// A(f^n(x)).
  const Matrix& at(const SymbolicPoint& x, long n = 0) const { return table_.at(x, n); }
  /// A(f^n(x))^{-1}.
  const Matrix& inverse_at(const SymbolicPoint& x, long n = 0) const { return inverse_.at(x, n); }

  Generator with_sft(const Sft& sft) const {
    require(sft.rows() == this->sft().rows(), ErrorCode::InvalidArgument, "generator belongs to another shift");
    return from_function(sft, d_, window(), [&](const SymbolString& w) { return table_.at(w); });
  }

 private:
  WindowTable<Matrix> table_;
  WindowTable<Matrix> inverse_;
  int d_;
};

/// A^n(x) accumulated with periodic renormalization.
inline ScaledMatrix evaluate_scaled(const Generator& gen, const SymbolicPoint& x, long n) {
  ScaledMatrix acc = ScaledMatrix::identity(gen.dimension());
  if (n >= 0) {
    for (long j = 0; j < n; ++j) {
      acc.unit = gen.at(x, j) * acc.unit;
      if ((j + 1) % kRenormalizeEvery == 0) acc.renormalize();
    }
  } else {
    // A^{-m}(x) = A(f^{-m}x)^{-1} ... A(f^{-1}x)^{-1}
    for (long j = 1; j <= -n; ++j) {
      acc.unit = gen.inverse_at(x, -j) * acc.unit;
      if (j % kRenormalizeEvery == 0) acc.renormalize();
    }
  }
  acc.renormalize();
  return acc;
}

/// A^n(x) for any integer n.
inline Matrix evaluate(const Generator& gen, const SymbolicPoint& x, long n) {
  if (std::labs(n) <= kRenormalizeEvery) {
    Matrix acc = Matrix::Identity(gen.dimension(), gen.dimension());
    if (n >= 0)
      for (long j = 0; j < n; ++j) acc = gen.at(x, j) * acc;
    else
      for (long j = 1; j <= -n; ++j) acc = gen.inverse_at(x, -j) * acc;
    return acc;
  }
  return evaluate_scaled(gen, x, n).value();
}

/// Running log(||A^n|| ||A^n^{-1}||). The forward and inverse products are
/// renormalized separately, so the value stays finite after sigma_min(A^n)
/// leaves the double range.
struct DistortionTracker {
  ScaledMatrix forward;
  ScaledMatrix inverse;
  long steps = 0;

  explicit DistortionTracker(int d) : forward(ScaledMatrix::identity(d)), inverse(ScaledMatrix::identity(d)) {}

  void step(const Matrix& a, const Matrix& a_inv) {
    forward.unit = a * forward.unit;
    inverse.unit = inverse.unit * a_inv;
    if (++steps % kRenormalizeEvery == 0) {
      forward.renormalize();
      inverse.renormalize();
    }
  }

  double log_condition() const { return std::max(0.0, forward.log_norm() + inverse.log_norm()); }
};

/// log(||A^n(x)|| ||A^n(x)^{-1}||) for n >= 0.
inline double log_distortion(const Generator& gen, const SymbolicPoint& x, long n) {
  DistortionTracker t(gen.dimension());
  for (long j = 0; j < n; ++j) t.step(gen.at(x, j), gen.inverse_at(x, j));
  return t.log_condition();
}

/// log ||A^n(x)||, safe for long products.
inline double log_norm(const Generator& gen, const SymbolicPoint& x, long n) {
  return evaluate_scaled(gen, x, n).log_norm();
}

/// Table of B = |det A|^{-1/d} A.
inline Generator normalize_sl(const Generator& gen) {
  const int d = gen.dimension();
  for (const auto& w : gen.table().words()) {
    const double det = gen.table().at(w).determinant();
    require(!(det < 0.0 && d % 2 == 0), ErrorCode::NegativeDeterminant,
            "entry [" + format_symbols(w) + "] has negative determinant in even dimension");
  }
  return Generator::from_function(gen.sft(), d, gen.window(), [&](const SymbolString& w) {
    const Matrix& a = gen.table().at(w);
    const double det = a.determinant();
    // odd d: the real d-th root keeps the sign, so the result has det 1
    const double root = det < 0.0 ? -std::pow(-det, 1.0 / d) : std::pow(det, 1.0 / d);
    return Matrix(a / root);
  });
}

/// psi_N(x) = (1/N) log(||A^N(x)|| ||A^N(x)^{-1}||).
inline double distortion(const Generator& gen, const SymbolicPoint& x, int N) {
  require(N >= 1, ErrorCode::InvalidArgument, "N must be positive");
  return log_distortion(gen, x, N) / N;
}

struct LyapunovPair {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
};

inline void require_period(const SymbolicPoint& p, long k) {
  require(k >= 1 && has_period(p, k), ErrorCode::NotPeriodic,
          "point " + p.to_string() + " is not fixed by f^" + std::to_string(k));
}

/// Extremal exponents of the periodic orbit measure, from the return map.
inline LyapunovPair lyapunov_periodic(const Generator& gen, const SymbolicPoint& p, long k) {
  require_period(p, k);
  const ScaledMatrix m = evaluate_scaled(gen, p, k);
  const double kk = static_cast<double>(k);
  const double plus = (m.log_scale + std::log(spectral_radius(m.unit))) / kk;
  const double minus = (m.log_scale + std::log(min_eigen_modulus(m.unit))) / kk;
  return {plus, minus};
}

/// Mean log|det A|^{1/d} along the orbit of p over k steps.
inline double mean_log_det_root(const Generator& gen, const SymbolicPoint& p, long k) {
  double s = 0.0;
  for (long j = 0; j < k; ++j) s += std::log(std::abs(gen.at(p, j).determinant()));
  return s / (static_cast<double>(k) * gen.dimension());
}

struct BirkhoffEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int samples = 0;
};

/// Mean and standard error of (1/n) log||A^n(x)|| over sampled orbits.
inline BirkhoffEstimate lyapunov_birkhoff(const Generator& gen, const MarkovMeasure& mu, int n, int samples,
                                          std::uint64_t seed) {
  require(n >= 1 && samples >= 1, ErrorCode::InvalidArgument, "n and samples must be positive");
  const Window w = gen.window();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Word path = sample_orbit(mu, n + w.hi - w.lo, seed, static_cast<std::uint64_t>(s));
    path.start_index = w.lo;
    const SymbolicPoint x = extend_to_point(mu.sft(), path);
    values.push_back(log_norm(gen, x, n) / n);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= samples;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double se = samples > 1 ? std::sqrt(var / (samples - 1) / samples) : 0.0;
  return {mean, se, samples};
}

/// sup over x != y of dist(F(x), F(y)) / rho_tau(x, y) for a locally constant F.
/// Two window words u != v extend to points agreeing off the window, so the
/// sup is the max over word pairs with N = min{|j| : u_j != v_j}.
template <class T, class Dist>
double table_lipschitz(const WindowTable<T>& table, double tau, Dist&& dist) {
  const auto& words = table.words();
  const int lo = table.window().lo;
  double best = 0.0;
  for (std::size_t a = 0; a < words.size(); ++a) {
    for (std::size_t b = a + 1; b < words.size(); ++b) {
      long depth = -1;
      for (std::size_t i = 0; i < words[a].size(); ++i) {
        if (words[a][i] == words[b][i]) continue;
        const long j = std::labs(lo + static_cast<long>(i));
        if (depth < 0 || j < depth) depth = j;
      }
      const double delta = dist(table.at(words[a]), table.at(words[b]));
      if (delta > 0.0) best = std::max(best, delta * std::exp(tau * static_cast<double>(depth)));
    }
  }
  return best;
}

/// Exact Lipschitz constant of A with respect to rho_tau.
inline double lipschitz_constant(const Generator& gen, const Sft& sft) {
  require(sft.rows() == gen.sft().rows(), ErrorCode::InvalidArgument, "generator belongs to another shift");
  return table_lipschitz(gen.table(), sft.tau(),
                         [](const Matrix& a, const Matrix& b) { return spectral_norm(a - b); });
}

inline double lipschitz_constant(const Generator& gen) { return lipschitz_constant(gen, gen.sft()); }

/// R = max over the table of max(||A||, ||A^{-1}||).
inline double max_norm_bound(const Generator& gen) {
  double r = 0.0;
  for (const auto& w : gen.table().words()) {
    const Matrix& a = gen.table().at(w);
    r = std::max({r, spectral_norm(a), spectral_norm(a.inverse())});
  }
  return r;
}

/// zeta = max over the table of log(||A|| ||A^{-1}||).
inline double max_log_condition(const Generator& gen) {
  double z = 0.0;
  for (const auto& w : gen.table().words()) z = std::max(z, log_condition(gen.table().at(w)));
  return z;
}

/// log cond(A^n(x)) as a locally constant function on the window [lo, hi + n - 1].
inline WindowTable<double> block_log_condition(const Generator& gen, int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "block length must be positive");
  const Window w = gen.window();
  const Window big{w.lo, w.hi + n - 1};
  return WindowTable<double>::build(gen.sft(), big, [&](const SymbolString& word) {
    DistortionTracker t(gen.dimension());
    for (int j = 0; j < n; ++j) t.step(gen.table().lookup(word.data() + j), gen.inverse_table().lookup(word.data() + j));
    return t.log_condition();
  });
}

}  // namespace rigidity
