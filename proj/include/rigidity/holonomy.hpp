#pragma once

// Bunching sets D(N, theta), uniform bunching certificates, stable and
// unstable holonomies, the holonomy extension of conformal structures and the
// one-step gap check.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/cocycle.hpp"
#include "rigidity/conformal.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"
#include "rigidity/mean_cycle.hpp"
#include "rigidity/rng.hpp"
#include "rigidity/sft.hpp"

namespace rigidity {

/// Relative slack for the D(N, theta) inequalities.
inline constexpr double kBunchingSlack = 1e-12;

inline bool within_bound(double value, double bound) {
  return value <= bound + kBunchingSlack * std::max(1.0, std::abs(bound));
}

enum class CertificateScope { Point, Uniform };

struct BunchingCertificate {
  int N = 1;
  double theta = 0.0;
  CertificateScope scope = CertificateScope::Uniform;
  /// Uniform: max mean cycle / N. Point: max prefix average / N.
  double witness = 0.0;
  /// Uniform only: sup over walks of sum(a_j - N theta); log of the constant L
  /// in cond(A^{sN}) <= L e^{sN theta}.
  double log_constant = 0.0;
  /// Uniform only: smallest theta with D(N, theta) equal to the whole shift.
  double theta_all = 0.0;
  std::optional<SymbolicPoint> point;
};

struct MembershipResult {
  bool member = false;
  /// max over s of S_s / (s N), forward and backward.
  double witness = 0.0;
};

namespace detail {

/// log cond(A^N(f^{jN} p)) for j = 0..count-1 (forward) or
/// log cond(A^N(f^{-(j+1)N} p)) (backward).
inline std::vector<double> block_distortions(const Generator& gen, const SymbolicPoint& p, int N, long count,
                                             bool backward) {
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(count));
  for (long j = 0; j < count; ++j) {
    const long start = backward ? -(j + 1) * N : j * N;
    a.push_back(log_distortion(gen, shift(p, start), N));
  }
  return a;
}

inline MembershipResult prefix_check(const std::vector<double>& a, int N, double theta, MembershipResult acc) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i];
    const double steps = static_cast<double>(i + 1) * N;
    acc.witness = std::max(acc.witness, s / steps);
    if (!within_bound(s, steps * theta)) acc.member = false;
  }
  return acc;
}

}  // namespace detail

/// Exact D(N, theta) membership of a periodic point: the block sequence has
/// period P = k / gcd(k, N), so prefixes s <= P decide every s.
inline MembershipResult bunching_membership_periodic(const Generator& gen, const SymbolicPoint& p, long k, int N,
                                                     double theta) {
  require_period(p, k);
  require(N >= 1, ErrorCode::InvalidArgument, "N must be positive");
  const long blocks = k / gcd_int(k, N);
  MembershipResult r{true, 0.0};
  r = detail::prefix_check(detail::block_distortions(gen, p, N, blocks, false), N, theta, r);
  r = detail::prefix_check(detail::block_distortions(gen, p, N, blocks, true), N, theta, r);
  return r;
}

/// Direct evaluation of the defining inequalities for s <= s_max.
inline MembershipResult bunching_membership_bruteforce(const Generator& gen, const SymbolicPoint& x, int N,
                                                       double theta, long s_max) {
  MembershipResult r{true, 0.0};
  for (bool backward : {false, true}) {
    double s = 0.0;
    for (long j = 0; j < s_max; ++j) {
      const long start = backward ? -(j + 1) * N : j * N;
      // ||A^N(y)|| ||A^{-N}(f^N y)||, both from independent scaled products
      const SymbolicPoint y = shift(x, start);
      s += std::max(0.0, log_norm(gen, y, N) + log_norm(gen, shift(y, N), -N));
      const double steps = static_cast<double>(j + 1) * N;
      r.witness = std::max(r.witness, s / steps);
      if (!within_bound(s, steps * theta)) r.member = false;
    }
  }
  return r;
}

/// Number of valid words of a given length (dynamic programming on Q).
inline double count_valid_words(const Sft& sft, int length) {
  const int l = static_cast<int>(sft.alphabet_size());
  if (length <= 0) return 1.0;
  std::vector<double> c(static_cast<std::size_t>(l), 1.0), next(static_cast<std::size_t>(l));
  for (int t = 1; t < length; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b)
        if (sft.allowed(a, b)) next[b] += c[a];
    c.swap(next);
  }
  double total = 0.0;
  for (double v : c) total += v;
  return total;
}

inline constexpr double kMaxBlockEdges = 1 << 20;

/// The N-block graph: vertices are valid window words, edges are valid words
/// of length N + width joining the window at 0 to the window at N, weighted
/// by log cond(A^N) on that block. Parallel edges keep the heaviest weight.
inline WeightedDigraph block_graph(const Generator& gen, int N) {
  require(N >= 1, ErrorCode::InvalidArgument, "N must be positive");
  const Window w = gen.window();
  const int width = w.width();
  require(count_valid_words(gen.sft(), N + width) <= kMaxBlockEdges, ErrorCode::InvalidArgument,
          "block graph for N = " + std::to_string(N) + " is too large");
  const auto& vertices = gen.table().words();
  std::vector<int> index(static_cast<std::size_t>(std::pow(gen.sft().alphabet_size(), width) + 0.5), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) index[gen.table().code(vertices[i].data())] = static_cast<int>(i);
  WeightedDigraph g(static_cast<int>(vertices.size()));
  for (const auto& word : valid_words(gen.sft(), N + width)) {
    DistortionTracker t(gen.dimension());
    for (int j = 0; j < N; ++j)
      t.step(gen.table().lookup(word.data() + j), gen.inverse_table().lookup(word.data() + j));
    const int from = index[gen.table().code(word.data())];
    const int to = index[gen.table().code(word.data() + N)];
    g.add_edge(from, to, t.log_condition());
  }
  g.collapse_parallel();
  return g;
}

/// Max mean cycle rate theta* = mean / N of the N-block graph, with the walk
/// constant and theta_all, whether or not theta* < tau.
inline BunchingCertificate uniform_bunching_rate(const Generator& gen, int N) {
  require(mixing_index(gen.sft()).has_value(), ErrorCode::NotMixing, "uniform certificate needs a mixing shift");
  const WeightedDigraph forward = block_graph(gen, N);
  const WeightedDigraph backward = forward.reversed();
  const auto mean = max_mean_cycle(forward);
  require(mean.has_value(), ErrorCode::Internal, "block graph has no cycle");
  const double theta_star = std::max(0.0, *mean) / N;
  BunchingCertificate cert;
  cert.N = N;
  cert.scope = CertificateScope::Uniform;
  cert.witness = theta_star;
  cert.theta = theta_star;
  // walk excess at the asymptotic rate, tolerant of rounding on zero cycles
  const double rate = *mean + 1e-12 * std::max(1.0, std::abs(*mean));
  const auto ef = max_walk_excess(forward, rate);
  const auto eb = max_walk_excess(backward, rate);
  require(ef && eb, ErrorCode::Internal, "walk excess diverged at the max mean cycle rate");
  cert.log_constant = std::max(*ef, *eb);
  // smallest theta with every walk prefix average below N theta
  double lo = theta_star, hi = theta_star;
  for (const auto& e : forward.edges()) hi = std::max(hi, e.weight / N);
  auto all_inside = [&](double th) {
    const auto a = max_walk_excess(forward, th * N, 0.0);
    const auto b = max_walk_excess(backward, th * N, 0.0);
    return a && b && *a <= 1e-12 && *b <= 1e-12;
  };
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (all_inside(mid) ? hi : lo) = mid;
  }
  cert.theta_all = hi;
  return cert;
}

/// Uniform certificate from the maximum mean cycle of the N-block graph;
/// nullopt when theta* is not below tau.
inline std::optional<BunchingCertificate> certify_uniform_bunching(const Generator& gen, int N) {
  BunchingCertificate cert = uniform_bunching_rate(gen, N);
  if (!(cert.theta < gen.sft().tau())) return std::nullopt;
  return cert;
}

/// First N in the grid that certifies.
inline std::optional<BunchingCertificate> certify_uniform_bunching(const Generator& gen, const std::vector<int>& grid) {
  for (int N : grid) {
    if (count_valid_words(gen.sft(), N + gen.window().width()) > kMaxBlockEdges) break;
    if (auto c = certify_uniform_bunching(gen, N)) return c;
  }
  return std::nullopt;
}

/// Point certificate for a periodic point from its exact membership witness.
inline std::optional<BunchingCertificate> certify_point_bunching(const Generator& gen, const SymbolicPoint& p, long k,
                                                                 int N, double theta) {
  const MembershipResult m = bunching_membership_periodic(gen, p, k, N, theta);
  if (!m.member || !(theta < gen.sft().tau())) return std::nullopt;
  BunchingCertificate c;
  c.N = N;
  c.theta = theta;
  c.scope = CertificateScope::Point;
  c.witness = m.witness;
  c.point = p;
  return c;
}

namespace detail {

inline void require_certificate(const Generator& gen, const BunchingCertificate& cert, const SymbolicPoint& y,
                                const SymbolicPoint& z) {
  require(cert.theta < gen.sft().tau(), ErrorCode::NoCertificate, "certificate needs theta < tau");
  require(within_bound(cert.witness, cert.theta), ErrorCode::NoCertificate, "certificate witness exceeds theta");
  if (cert.scope == CertificateScope::Point)
    require(cert.point && (*cert.point == y || *cert.point == z), ErrorCode::NoCertificate,
            "point certificate does not cover this pair");
}

}  // namespace detail

/// A^n(z)^{-1} A^n(y), multiplied from the middle outward. Factors whose
/// window words agree cancel exactly while the inner product is still I.
inline Matrix stable_holonomy_truncated(const Generator& gen, const SymbolicPoint& y, const SymbolicPoint& z, long n) {
  const int d = gen.dimension();
  Matrix k = Matrix::Identity(d, d);
  bool is_identity = true;
  const Window w = gen.window();
  for (long j = n - 1; j >= 0; --j) {
    if (is_identity) {
      bool same = true;
      for (long i = j + w.lo; i <= j + w.hi && same; ++i) same = y[i] == z[i];
      if (same) continue;
    }
    k = gen.inverse_at(z, j) * k * gen.at(y, j);
    is_identity = false;
  }
  return k;
}

/// A^{-n}(z)^{-1} A^{-n}(y), same cancellation rule.
inline Matrix unstable_holonomy_truncated(const Generator& gen, const SymbolicPoint& y, const SymbolicPoint& z,
                                          long n) {
  const int d = gen.dimension();
  Matrix k = Matrix::Identity(d, d);
  bool is_identity = true;
  const Window w = gen.window();
  for (long j = n; j >= 1; --j) {
    if (is_identity) {
      bool same = true;
      for (long i = -j + w.lo; i <= -j + w.hi && same; ++i) same = y[i] == z[i];
      if (same) continue;
    }
    k = gen.at(z, -j) * k * gen.inverse_at(y, -j);
    is_identity = false;
  }
  return k;
}

/// Depth after which the stable products stop changing.
inline long stable_depth(const Generator& gen) { return std::max(0, -gen.window().lo); }
/// Depth after which the unstable products stop changing.
inline long unstable_depth(const Generator& gen) { return std::max(0, gen.window().hi); }

/// H^s_{yz} = lim A^n(z)^{-1} A^n(y); exact at n = |lo|.
inline Matrix stable_holonomy(const Generator& gen, const SymbolicPoint& y, const SymbolicPoint& z,
                              const BunchingCertificate& cert) {
  require(in_local_stable_set(y, z), ErrorCode::NotOnStableSet, "points do not agree on coordinates >= 0");
  detail::require_certificate(gen, cert, y, z);
  return stable_holonomy_truncated(gen, y, z, stable_depth(gen));
}

/// H^u_{yz} = lim A^{-n}(z)^{-1} A^{-n}(y); exact at n = hi.
inline Matrix unstable_holonomy(const Generator& gen, const SymbolicPoint& y, const SymbolicPoint& z,
                                const BunchingCertificate& cert) {
  require(in_local_unstable_set(y, z), ErrorCode::NotOnUnstableSet, "points do not agree on coordinates <= 0");
  detail::require_certificate(gen, cert, y, z);
  return unstable_holonomy_truncated(gen, y, z, unstable_depth(gen));
}

enum class HolonomyKind { Stable, Unstable };

/// sup ||H_{yz} - I|| / rho(y, z) over pairs on a common local leaf, computed
/// exactly over the finitely many words the holonomy depends on.
inline double holonomy_lipschitz(const Generator& gen, HolonomyKind kind) {
  const Window w = gen.window();
  const Sft& sft = gen.sft();
  const bool stable = kind == HolonomyKind::Stable;
  // coordinates the exact holonomy reads
  const long from = stable ? w.lo : w.lo - w.hi;
  const long to = stable ? std::max<long>(w.hi - w.lo - 1, 0) : std::max<long>(w.hi - 1, 0);
  const int len = static_cast<int>(to - from + 1);
  require(count_valid_words(sft, len) <= 4096, ErrorCode::InvalidArgument, "holonomy window too wide");
  const auto words = valid_words(sft, len);
  double best = 0.0;
  for (const auto& u : words) {
    const SymbolicPoint y = extend_to_point(sft, Word{u, from});
    for (const auto& v : words) {
      if (&u == &v) continue;
      bool same_side = true;
      long depth = -1;
      for (long i = 0; i < len; ++i) {
        const long coord = from + i;
        const bool fixed_side = stable ? coord >= 0 : coord <= 0;
        if (u[static_cast<std::size_t>(i)] == v[static_cast<std::size_t>(i)]) continue;
        if (fixed_side) {
          same_side = false;
          break;
        }
        if (depth < 0 || std::labs(coord) < depth) depth = std::labs(coord);
      }
      if (!same_side || depth < 0) continue;
      // z: v on the free side, y's coordinates elsewhere
      const SymbolicPoint zv = extend_to_point(sft, Word{v, from});
      const SymbolicPoint z = stable ? bracket(zv, y) : bracket(y, zv);
      const Matrix h = stable ? stable_holonomy_truncated(gen, y, z, stable_depth(gen))
                              : unstable_holonomy_truncated(gen, y, z, unstable_depth(gen));
      const double dev = spectral_norm(h - Matrix::Identity(gen.dimension(), gen.dimension()));
      best = std::max(best, dev * std::exp(sft.tau() * static_cast<double>(depth)));
    }
  }
  return best;
}

/// Per-symbol anchors paired with structures.
using Anchor = std::pair<SymbolicPoint, ConformalStructure>;

/// eta_hat_x = H^s_{[w, x] x} H^u_{w [w, x]} [eta_w] for the anchor w in x's cylinder.
inline ConformalStructure extend_structure(const Generator& gen, const std::vector<Anchor>& anchors,
                                           const SymbolicPoint& x, const BunchingCertificate& cert) {
  const Anchor* anchor = nullptr;
  for (const auto& a : anchors)
    if (a.first[0] == x[0]) {
      anchor = &a;
      break;
    }
  require(anchor != nullptr, ErrorCode::MissingAnchor, "no anchor in cylinder [0;" + std::to_string(x[0] + 1) + "]");
  const SymbolicPoint& omega = anchor->first;
  const SymbolicPoint mid = bracket(omega, x);
  require(cert.scope == CertificateScope::Uniform, ErrorCode::NoCertificate,
          "extension needs a uniform certificate");
  const Matrix hu = unstable_holonomy(gen, omega, mid, cert);
  const Matrix hs = stable_holonomy(gen, mid, x, cert);
  return pull(hs * hu, anchor->second);
}

/// Random cyclic word of the given period (retries until it closes).
inline SymbolicPoint random_periodic_point(const Sft& sft, int period, Rng& rng) {
  const int l = static_cast<int>(sft.alphabet_size());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    SymbolString w{static_cast<Symbol>(rng.below(static_cast<std::uint64_t>(l)))};
    bool ok = true;
    while (static_cast<int>(w.size()) < period && ok) {
      std::vector<Symbol> next;
      for (Symbol s = 0; s < l; ++s)
        if (sft.allowed(w.back(), s)) next.push_back(s);
      w.push_back(next[rng.below(next.size())]);
    }
    if (sft.allowed(w.back(), w.front())) return SymbolicPoint::periodic(w, 0);
  }
  throw Error(ErrorCode::Internal, "no periodic point of period " + std::to_string(period) + " found");
}

struct GapReport {
  double R = 0.0;
  bool condition_holds = false;  // R^4 <= e^{N eps}
  int tested = 0;
  int members = 0;
  int counterexamples = 0;
  std::optional<SymbolicPoint> counterexample;
};

/// Checks f^{-1}(D(N, theta)) inside D(N, theta + eps) on random periodic points.
inline GapReport gap_check(const Generator& gen, int N, double theta, double eps, int trials, std::uint64_t seed,
                           int period_max = 8) {
  GapReport r;
  r.R = max_norm_bound(gen);
  r.condition_holds = 4.0 * std::log(r.R) <= N * eps;
  Rng rng(seed, 0x6a70);
  for (int t = 0; t < trials; ++t) {
    const int period = rng.range(1, period_max);
    const SymbolicPoint p = random_periodic_point(gen.sft(), period, rng);
    const long k = p.period();
    ++r.tested;
    if (!bunching_membership_periodic(gen, p, k, N, theta).member) continue;
    ++r.members;
    const SymbolicPoint q = shift(p, -1);
    if (!bunching_membership_periodic(gen, q, k, N, theta + eps).member) {
      ++r.counterexamples;
      if (!r.counterexample) r.counterexample = p;
    }
  }
  return r;
}

/// Normalized top exponent: lambda_+ minus the mean log |det|^{1/d}.
inline double normalized_top_exponent(const Generator& gen, const SymbolicPoint& p, long k) {
  return lyapunov_periodic(gen, p, k).lambda_plus - mean_log_det_root(gen, p, k);
}

/// Periodic points ordered by (period, cyclic word), each orbit point listed.
inline std::vector<SymbolicPoint> periodic_points_up_to(const Sft& sft, int period_max) {
  std::vector<SymbolicPoint> out;
  for (int k = 1; k <= period_max; ++k)
    for (const auto& p : enumerate_periodic(sft, k))
      if (p.period() == k) out.push_back(p);
  return out;
}

/// For each symbol, the least periodic point (by period, then word) in its
/// cylinder whose normalized top exponent is within tol of 0.
inline std::vector<std::optional<SymbolicPoint>> select_anchors(const Generator& gen, int period_max,
                                                                double tol = 1e-8) {
  const std::size_t l = gen.sft().alphabet_size();
  std::vector<std::optional<SymbolicPoint>> out(l);
  std::size_t found = 0;
  for (const auto& p : periodic_points_up_to(gen.sft(), period_max)) {
    const std::size_t s = static_cast<std::size_t>(p[0]);
    if (out[s]) continue;
    if (std::abs(normalized_top_exponent(gen, p, p.period())) <= tol) {
      out[s] = p;
      if (++found == l) break;
    }
  }
  return out;
}

}  // namespace rigidity
