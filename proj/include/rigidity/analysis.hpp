#pragma once

// Top-level checks and constructions: invariant conformal fields, coboundary
// residuals, quasiconformality tables, common invariant subspaces and the
// invariant-structure pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigidity/cocycle.hpp"
#include "rigidity/conformal.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/holonomy.hpp"
#include "rigidity/markov.hpp"
#include "rigidity/rng.hpp"
#include "rigidity/sft.hpp"
#include "rigidity/window_table.hpp"

namespace rigidity {

/// Locally constant eta : Sigma -> C^d.
using ConformalField = WindowTable<ConformalStructure>;
/// Locally constant P : Sigma -> GL(d).
using TransferField = WindowTable<Matrix>;

inline ConformalField constant_field(const Sft& sft, const ConformalStructure& eta) {
  return ConformalField::build(sft, Window{0, 0}, [&](const SymbolString&) { return eta; });
}

/// max over cylinder words of distance(pull(A(x), eta_x), eta_{f(x)}).
inline double verify_invariant_field(const Generator& gen, const ConformalField& field) {
  const Window g = gen.window(), w = field.window();
  const Window all = window_union(g, Window{w.lo, w.hi + 1});
  double worst = 0.0;
  for (const auto& word : valid_words(gen.sft(), all.width())) {
    const Matrix& a = gen.table().lookup(word.data() + (g.lo - all.lo));
    const ConformalStructure& here = field.lookup(word.data() + (w.lo - all.lo));
    const ConformalStructure& next = field.lookup(word.data() + (w.lo + 1 - all.lo));
    worst = std::max(worst, distance(pull(a, here), next));
  }
  return worst;
}

/// max over cylinder words of ||A(x) - P(f(x)) B(x) P(x)^{-1}||.
inline double verify_coboundary(const Generator& a, const Generator& b, const TransferField& p) {
  require(a.dimension() == b.dimension() && p.words().size() > 0, ErrorCode::InvalidArgument,
          "incompatible dimensions");
  require(a.sft().rows() == b.sft().rows() && a.sft().rows() == p.sft().rows(), ErrorCode::InvalidArgument,
          "generators and transfer field live on different shifts");
  const Window wa = a.window(), wb = b.window(), wp = p.window();
  const Window all = window_union(window_union(wa, wb), Window{wp.lo, wp.hi + 1});
  double worst = 0.0;
  for (const auto& word : valid_words(a.sft(), all.width())) {
    const Matrix& am = a.table().lookup(word.data() + (wa.lo - all.lo));
    const Matrix& bm = b.table().lookup(word.data() + (wb.lo - all.lo));
    const Matrix& px = p.lookup(word.data() + (wp.lo - all.lo));
    const Matrix& pfx = p.lookup(word.data() + (wp.lo + 1 - all.lo));
    worst = std::max(worst, spectral_norm(am - pfx * bm * px.inverse()));
  }
  return worst;
}

/// x -> pull(P(x), eta_x): invariant for A when A = P(f x) B(x) P(x)^{-1} and
/// eta is B-invariant.
inline ConformalField transport_field(const TransferField& p, const ConformalField& eta) {
  const Window wp = p.window(), we = eta.window();
  const Window all = window_union(wp, we);
  return ConformalField::build(p.sft(), all, [&](const SymbolString& word) {
    return pull(p.lookup(word.data() + (wp.lo - all.lo)), eta.lookup(word.data() + (we.lo - all.lo)));
  });
}

/// Largest comparison constant C over the field's entries.
inline double field_comparison_constant(const ConformalField& field) {
  double c = 1.0;
  for (const auto& w : field.words()) c = std::max(c, field.at(w).comparison_constant());
  return c;
}

/// max over sampled orbits and 1 <= n <= n_max of ||A^n(x)||.
inline double max_orbit_norm(const Generator& gen, const MarkovMeasure& mu, int n_max, int samples,
                             std::uint64_t seed) {
  double worst = 0.0;
  const int radius = std::max(-gen.window().lo, gen.window().hi) + 1;
  for (int s = 0; s < samples; ++s) {
    // long orbit so that the cocycle sees a genuine sample path
    Word path = sample_orbit(mu, n_max + 2 * radius, seed, static_cast<std::uint64_t>(s));
    path.start_index = -radius;
    const SymbolicPoint x = extend_to_point(mu.sft(), path);
    ScaledMatrix acc = ScaledMatrix::identity(gen.dimension());
    for (int n = 1; n <= n_max; ++n) {
      acc.unit = gen.at(x, n - 1) * acc.unit;
      if (n % kRenormalizeEvery == 0) acc.renormalize();
      worst = std::max(worst, acc.log_scale + std::log(spectral_norm(acc.unit)));
    }
  }
  return std::exp(worst);
}

struct QuasiconformalityReport {
  std::vector<double> K;  // K[n - 1] = max cond(A^n(x)) over the probe points
  double C = 1.0;
  double eps = 0.0;
  bool uniformly_quasiconformal = false;
  int periodic_points = 0;
  int sampled_points = 0;
};

/// Growth rate of the running maximum of K(n) over the second half of
/// [1, n_max], and C = max K(n) e^{-eps n}.
inline QuasiconformalityReport quasiconformality_report(const Generator& gen, int n_max, int period_max,
                                                        int samples = 0, std::uint64_t seed = 0) {
  require(n_max >= 2, ErrorCode::InvalidArgument, "n_max must be at least 2");
  QuasiconformalityReport rep;
  std::vector<double> log_k(static_cast<std::size_t>(n_max), 0.0);
  auto probe = [&](const SymbolicPoint& x) {
    DistortionTracker t(gen.dimension());
    for (int n = 1; n <= n_max; ++n) {
      t.step(gen.at(x, n - 1), gen.inverse_at(x, n - 1));
      log_k[static_cast<std::size_t>(n - 1)] = std::max(log_k[static_cast<std::size_t>(n - 1)], t.log_condition());
    }
  };
  for (const auto& p : periodic_points_up_to(gen.sft(), period_max)) {
    probe(p);
    ++rep.periodic_points;
  }
  if (samples > 0 && mixing_index(gen.sft())) {
    const MarkovMeasure mu = parry_measure(gen.sft());
    const int radius = std::max(-gen.window().lo, gen.window().hi) + n_max;
    for (int s = 0; s < samples; ++s) {
      probe(sample_point(mu, radius, seed, static_cast<std::uint64_t>(s)));
      ++rep.sampled_points;
    }
  }
  std::vector<double> envelope(log_k.size());
  double run = 0.0;
  for (std::size_t i = 0; i < log_k.size(); ++i) envelope[i] = run = std::max(run, log_k[i]);
  const int half = n_max / 2;
  rep.eps = std::max(0.0, (envelope[static_cast<std::size_t>(n_max - 1)] - envelope[static_cast<std::size_t>(half - 1)]) /
                              static_cast<double>(n_max - half));
  double log_c = 0.0;
  for (int n = 1; n <= n_max; ++n)
    log_c = std::max(log_c, log_k[static_cast<std::size_t>(n - 1)] - rep.eps * n);
  rep.C = std::exp(log_c);
  rep.K.reserve(log_k.size());
  for (double v : log_k) rep.K.push_back(std::exp(v));
  rep.uniformly_quasiconformal = rep.eps <= 1e-6;
  return rep;
}

struct InvariantSubspace {
  Matrix basis;  // d x r with orthonormal columns
  double residual = 0.0;
};

namespace detail {

/// Orthonormal basis (columns) of the span of the given columns.
inline Matrix column_span(const Matrix& cols, double tol) {
  if (cols.cols() == 0) return Matrix(cols.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, s(0))) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Basis of the unital algebra generated by the matrices (as matrices).
inline std::vector<Matrix> algebra_basis(const std::vector<Matrix>& gens, int d) {
  std::vector<Matrix> basis;
  std::vector<Vector> ortho;  // Gram-Schmidt on vec'd matrices
  auto try_add = [&](const Matrix& m) {
    Vector v = Eigen::Map<const Vector>(m.data(), m.size());
    const double norm0 = v.norm();
    if (norm0 == 0.0) return false;
    v /= norm0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& o : ortho) v -= o.dot(v) * o;
    if (v.norm() < 1e-9) return false;
    ortho.push_back(v / v.norm());
    basis.push_back(m / norm0);
    return true;
  };
  try_add(Matrix::Identity(d, d));
  for (const auto& g : gens) try_add(g);
  for (std::size_t i = 0; i < basis.size() && basis.size() < static_cast<std::size_t>(d * d); ++i)
    for (const auto& g : gens) try_add(g * basis[i]);
  return basis;
}

inline double invariance_residual(const std::vector<Matrix>& mats, const Matrix& q) {
  const int d = static_cast<int>(q.rows());
  const Matrix proj = Matrix::Identity(d, d) - q * q.transpose();
  double r = 0.0;
  for (const auto& m : mats) r = std::max(r, spectral_norm(proj * m * q) / std::max(1.0, spectral_norm(m)));
  return r;
}

/// Real vectors worth trying: eigenvectors, and real/imaginary parts of
/// complex ones.
inline void eigen_candidates(const Matrix& m, std::vector<Vector>& out) {
  Eigen::EigenSolver<Matrix> es(m);
  for (int i = 0; i < m.cols(); ++i) {
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    out.push_back(v.real());
    if (v.imag().norm() > 1e-12) out.push_back(v.imag());
  }
}

}  // namespace detail

/// Burnside test over R: nullopt when the generated unital algebra is all of
/// M_d(R) or no proper cyclic subspace A v exists; otherwise the first proper
/// A v over candidates e_1..e_d, eigenvectors of generators and algebra
/// elements (then the same for transposes, returning the complement).
inline std::optional<InvariantSubspace> common_invariant_subspace(const std::vector<Matrix>& mats, int d) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
  require(d <= 6, ErrorCode::DimensionTooLarge, "dimension " + std::to_string(d) + " exceeds 6");
  for (const auto& m : mats) {
    require(m.rows() == d && m.cols() == d, ErrorCode::InvalidArgument, "matrix has wrong shape");
    require(std::abs(m.determinant()) > kMinAbsDeterminant, ErrorCode::InvalidArgument, "matrix is not invertible");
  }
  const auto basis = detail::algebra_basis(mats, d);
  if (static_cast<int>(basis.size()) == d * d) return std::nullopt;

  auto search = [&](const std::vector<Matrix>& alg, const std::vector<Matrix>& gens) -> std::optional<Matrix> {
    std::vector<Vector> cands;
    for (int i = 0; i < d; ++i) cands.push_back(Vector::Unit(d, i));
    for (const auto& g : gens) detail::eigen_candidates(g, cands);
    for (const auto& b : alg) detail::eigen_candidates(b, cands);
    Rng rng(0x5eed, static_cast<std::uint64_t>(d));
    for (int t = 0; t < 8; ++t) {
      Matrix combo = Matrix::Zero(d, d);
      for (const auto& b : alg) combo += rng.normal() * b;
      detail::eigen_candidates(combo, cands);
    }
    for (const auto& v : cands) {
      if (v.norm() < 1e-12) continue;
      Matrix cols(d, static_cast<int>(alg.size()));
      for (std::size_t i = 0; i < alg.size(); ++i) cols.col(static_cast<int>(i)) = alg[i] * (v / v.norm());
      const Matrix q = detail::column_span(cols, 1e-9);
      if (q.cols() > 0 && q.cols() < d && detail::invariance_residual(gens, q) <= 1e-8) return q;
    }
    return std::nullopt;
  };

  if (auto q = search(basis, mats)) return InvariantSubspace{*q, detail::invariance_residual(mats, *q)};
  std::vector<Matrix> tb, tm;
  for (const auto& b : basis) tb.push_back(b.transpose());
  for (const auto& m : mats) tm.push_back(m.transpose());
  if (auto q = search(tb, tm)) {
    // complement of a transpose-invariant subspace is invariant
    Eigen::JacobiSVD<Matrix> svd(q->transpose(), Eigen::ComputeFullV);
    const Matrix comp = svd.matrixV().rightCols(d - q->cols());
    return InvariantSubspace{comp, detail::invariance_residual(mats, comp)};
  }
  return std::nullopt;
}

/// Dimension of the unital algebra generated by the matrices.
inline int algebra_dimension(const std::vector<Matrix>& mats, int d) {
  return static_cast<int>(detail::algebra_basis(mats, d).size());
}

enum class ObstructionKind { PositiveExponent, NoBunchingCertificate, InconsistentExtension };

inline const char* obstruction_name(ObstructionKind k) {
  switch (k) {
    case ObstructionKind::PositiveExponent: return "PositiveExponent";
    case ObstructionKind::NoBunchingCertificate: return "NoBunchingCertificate";
    case ObstructionKind::InconsistentExtension: return "InconsistentExtension";
  }
  return "Unknown";
}

struct Obstruction {
  ObstructionKind kind = ObstructionKind::PositiveExponent;
  std::optional<SymbolicPoint> point;
  double value = 0.0;  // exponent or residual
  std::string detail;
};

struct Construction {
  std::optional<ConformalField> field;
  std::optional<Obstruction> obstruction;
  std::optional<BunchingCertificate> certificate;
  std::vector<Anchor> anchors;
  double residual = 0.0;
  int periodic_points_checked = 0;
};

inline constexpr double kPositiveExponentTol = 1e-8;
inline constexpr double kExtensionTolerance = 1e-6;

/// Default N grid for the uniform certificate.
inline std::vector<int> default_bunching_grid() { return {1, 2, 3, 4, 6, 8, 12, 16}; }

/// Periodic exponents, uniform bunching, anchors with elliptic return maps,
/// holonomy extension to a locally constant field, then verification.
inline Construction construct_invariant_structure(const Generator& gen, int search_period_max,
                                                  const std::vector<int>& grid = default_bunching_grid()) {
  require(mixing_index(gen.sft()).has_value(), ErrorCode::NotMixing, "construction needs a mixing shift");
  require(search_period_max >= 1, ErrorCode::InvalidArgument, "search period must be positive");
  Construction out;
  const auto periodic = periodic_points_up_to(gen.sft(), search_period_max);
  for (const auto& p : periodic) {
    ++out.periodic_points_checked;
    const double lp = normalized_top_exponent(gen, p, p.period());
    if (lp > kPositiveExponentTol) {
      out.obstruction = Obstruction{ObstructionKind::PositiveExponent, p, lp,
                                    "periodic point " + p.to_string() + " has a positive normalized exponent"};
      return out;
    }
  }
  out.certificate = certify_uniform_bunching(gen, grid);
  if (!out.certificate) {
    out.obstruction = Obstruction{ObstructionKind::NoBunchingCertificate, std::nullopt, 0.0,
                                  "no N in the grid gives a max mean cycle rate below tau"};
    return out;
  }
  const auto anchors = select_anchors(gen, search_period_max, kPositiveExponentTol);
  for (std::size_t s = 0; s < anchors.size(); ++s) {
    require(anchors[s].has_value(), ErrorCode::MissingAnchor,
            "no periodic point of period <= " + std::to_string(search_period_max) + " in cylinder [0;" +
                std::to_string(s + 1) + "]");
    const SymbolicPoint& w = *anchors[s];
    const Matrix ret = evaluate(gen, w, w.period());
    out.anchors.emplace_back(w, invariant_structure_elliptic(ret));
  }
  const Window g = gen.window();
  const Window fw{g.lo, std::max(0, g.hi - g.lo - 1)};
  ConformalField field = ConformalField::build(gen.sft(), fw, [&](const SymbolString& word) {
    const SymbolicPoint x = extend_to_point(gen.sft(), Word{word, fw.lo});
    return extend_structure(gen, out.anchors, x, *out.certificate);
  });
  out.residual = verify_invariant_field(gen, field);
  if (out.residual > kExtensionTolerance) {
    out.obstruction = Obstruction{ObstructionKind::InconsistentExtension, std::nullopt, out.residual,
                                  "extended field fails the invariance check"};
    return out;
  }
  out.field = std::move(field);
  return out;
}

}  // namespace rigidity
