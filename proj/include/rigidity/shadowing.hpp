#pragma once

// Periodic points p^m built from orbit segments of two periodic points x and
// y, the (b, c, eps) tuner, the shadowing norm estimate and the growth and
// membership experiment.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rigidity/cocycle.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/holonomy.hpp"
#include "rigidity/sft.hpp"

namespace rigidity {

struct ShadowingSpec {
  SymbolicPoint x;
  SymbolicPoint y;
  long k = 1;  // common period
  long m = 1;  // multiple of k, at least the mixing index
  int b = 1;
  int c = 1;
  /// m-edge words y_0 -> x_0 and x_0 -> y_0 (m + 1 symbols); least words when empty.
  std::optional<Word> to_x;
  std::optional<Word> to_y;
};

struct ShadowingPoint {
  SymbolicPoint point;
  long period = 0;  // u_m = (2b + c + 2) m
  Word to_x;
  Word to_y;
};

namespace detail {

inline Word check_connector(const Sft& sft, const std::optional<Word>& given, Symbol from, Symbol to, long m,
                            const char* name) {
  if (!given) return connecting_word(sft, from, to, static_cast<int>(m));
  const Word& w = *given;
  require(static_cast<long>(w.symbols.size()) == m + 1, ErrorCode::InvalidConnector,
          std::string(name) + " must have " + std::to_string(m + 1) + " symbols");
  require(is_valid(sft, w), ErrorCode::InvalidConnector, std::string(name) + " is not a valid word");
  require(w.symbols.front() == from && w.symbols.back() == to, ErrorCode::InvalidConnector,
          std::string(name) + " has the wrong endpoints");
  return w;
}

}  // namespace detail

/// One period, read from coordinate -bm: y_{-bm..bm}, connector interior,
/// x_{0..cm}, connector interior.
inline ShadowingPoint build_shadowing_point(const Sft& sft, const ShadowingSpec& spec) {
  require(spec.b >= 1 && spec.c >= 1, ErrorCode::InvalidArgument, "b and c must be positive");
  require(spec.k >= 1 && has_period(spec.x, spec.k) && has_period(spec.y, spec.k), ErrorCode::PeriodMismatch,
          "x and y must both be fixed by f^" + std::to_string(spec.k));
  require(spec.m >= 1 && spec.m % spec.k == 0, ErrorCode::PeriodMismatch, "m must be a multiple of k");
  const auto mix = mixing_index(sft);
  require(mix.has_value(), ErrorCode::NotMixing, "shadowing needs a mixing shift");
  require(spec.m >= *mix, ErrorCode::PeriodMismatch,
          "m = " + std::to_string(spec.m) + " is below the mixing index " + std::to_string(*mix));
  require_valid(sft, spec.x);
  require_valid(sft, spec.y);
  const long m = spec.m, bm = spec.b * m, cm = spec.c * m;
  const Word to_x = detail::check_connector(sft, spec.to_x, spec.y[0], spec.x[0], m, "connector to x");
  const Word to_y = detail::check_connector(sft, spec.to_y, spec.x[0], spec.y[0], m, "connector to y");

  SymbolString cycle;
  cycle.reserve(static_cast<std::size_t>((2 * spec.b + spec.c + 2) * m));
  for (long j = -bm; j <= bm; ++j) cycle.push_back(spec.y[j]);
  cycle.insert(cycle.end(), to_x.symbols.begin() + 1, to_x.symbols.end() - 1);
  for (long j = 0; j <= cm; ++j) cycle.push_back(spec.x[j]);
  cycle.insert(cycle.end(), to_y.symbols.begin() + 1, to_y.symbols.end() - 1);
  const long period = static_cast<long>(cycle.size());
  require(is_valid_cycle(sft, cycle), ErrorCode::Internal, "assembled shadowing word is invalid");
  return {SymbolicPoint::periodic(cycle, -bm), period, to_x, to_y};
}

/// rho(f^j p, f^j q) <= max(e^{-j tau}, e^{-(n - j) tau}) for 0 <= j <= n;
/// returns the largest ratio rho / bound.
inline double shadowing_ratio(const Sft& sft, const SymbolicPoint& p, const SymbolicPoint& q, long n) {
  double worst = 0.0;
  for (long j = 0; j <= n; ++j) {
    const double rho = rho_distance(sft, shift(p, j), shift(q, j));
    const double bound = std::exp(-sft.tau() * static_cast<double>(std::min(j, n - j)));
    worst = std::max(worst, rho / bound);
  }
  return worst;
}

struct ShadowingDistances {
  double y_first = 0.0;   // j in [0, bm] against y
  double x_middle = 0.0;  // j in [0, cm] against x after (b+1)m
  double y_second = 0.0;  // j in [0, bm] against y after (b+c+2)m
  bool ok() const { return y_first <= 1.0 && x_middle <= 1.0 && y_second <= 1.0; }
};

/// The three shadowing distance bounds satisfied by p^m.
inline ShadowingDistances shadowing_distances(const Sft& sft, const ShadowingSpec& spec, const ShadowingPoint& sp) {
  const long m = spec.m, bm = spec.b * m, cm = spec.c * m;
  ShadowingDistances d;
  d.y_first = shadowing_ratio(sft, spec.y, sp.point, bm);
  const long o1 = (spec.b + 1) * m;
  d.x_middle = shadowing_ratio(sft, shift(spec.x, o1), shift(sp.point, o1), cm);
  const long o2 = (spec.b + spec.c + 2) * m;
  d.y_second = shadowing_ratio(sft, shift(spec.y, o2), shift(sp.point, o2), bm);
  return d;
}

struct Tuning {
  int b = 0;
  int c = 0;
  double eps = 0.0;
  double chi_rate = 0.0;  // chi = c(lambda - eps) - 2 b eps - 2 zeta
};

/// Right side minus left side of the three b-inequalities (all must be > 0).
inline std::array<double, 3> tuning_margins(int b, int c, double theta, double zeta, double xi) {
  const double bb = b, cc = c, t = theta / 10.0, rhs = 0.9 * theta;
  const double i1 = zeta * (1.0 - bb / (bb + 1.0)) + t;
  const double i2 = bb / (bb + 1.0) * t + zeta / (bb + 1.0) + (1.0 - (bb + 1.0) / (bb + cc + 1.0)) * (xi + t);
  const double i3 = bb / (bb + cc + 1.0) * t + zeta / (bb + cc + 1.0) + cc / (bb + cc + 1.0) * (xi + t) +
                    zeta * (1.0 - (bb + cc + 1.0) / (bb + cc + 2.0));
  return {rhs - i1, rhs - i2, rhs - i3};
}

/// Checks the three inequalities, eps <= theta / 10 and chi > 0.
inline bool tuning_is_valid(const Tuning& t, double lambda, double xi, double zeta, double theta) {
  const auto mg = tuning_margins(t.b, t.c, theta, zeta, xi);
  const double chi = t.c * (lambda - t.eps) - 2.0 * t.b * t.eps - 2.0 * zeta;
  return mg[0] > 0 && mg[1] > 0 && mg[2] > 0 && t.eps > 0 && t.eps <= theta / 10.0 && chi > 0;
}

inline constexpr int kMaxTuningB = 1000000;

/// Smallest c with c lambda > 2 zeta, then the smallest b <= 10^6 meeting the
/// three inequalities, then eps = min(theta/10, (c lambda - 2 zeta) / (2(c + 2b))).
/// nullopt when no such b exists.
inline std::optional<Tuning> tune_parameters(double lambda, double xi, double zeta, double tau, double theta) {
  require(theta > 0.0 && theta < tau, ErrorCode::InvalidArgument, "need 0 < theta < tau");
  require(lambda > 0.0, ErrorCode::InvalidArgument, "lambda must be positive");
  require(zeta >= 0.0 && xi >= 0.0, ErrorCode::InvalidArgument, "zeta and xi must be nonnegative");
  int c = 1;
  while (c * lambda - 2.0 * zeta <= 0.0) ++c;
  int b = 0;
  for (int cand = 1; cand <= kMaxTuningB && b == 0; ++cand) {
    const auto mg = tuning_margins(cand, c, theta, zeta, xi);
    if (mg[0] > 0 && mg[1] > 0 && mg[2] > 0) b = cand;
  }
  if (b == 0) return std::nullopt;
  Tuning t;
  t.c = c;
  t.b = b;
  t.eps = std::min(theta / 10.0, (c * lambda - 2.0 * zeta) / (2.0 * (c + 2.0 * b)));
  t.chi_rate = c * (lambda - t.eps) - 2.0 * b * t.eps - 2.0 * zeta;
  return t;
}

struct NormEstimate {
  double lambda = 0.0;
  double log_lower = 0.0;     // n (lambda - eps)
  double log_upper = 0.0;     // n (lambda + eps)
  double log_observed = 0.0;  // log ||A^n(q)||
  double log_C = 0.0;         // smallest log C making both bounds hold
};

inline constexpr double kMaxShadowConstant = 1e12;

/// Compares ||A^n(q)|| with e^{n(lambda_+(p) +- eps)} for q shadowing the
/// periodic point p over [0, n].
inline NormEstimate shadow_norm_estimate(const Generator& gen, const SymbolicPoint& p, const SymbolicPoint& q, long n,
                                         double eps) {
  require(p.is_periodic(), ErrorCode::NotPeriodic, "reference point must be periodic");
  require(n >= 0, ErrorCode::InvalidArgument, "n must be nonnegative");
  const double ratio = shadowing_ratio(gen.sft(), p, q, n);
  require(ratio <= 1.0 + 1e-12, ErrorCode::ShadowingHypothesisFails,
          "q does not shadow p over " + std::to_string(n) + " steps");
  NormEstimate e;
  e.lambda = lyapunov_periodic(gen, p, p.period()).lambda_plus;
  e.log_lower = n * (e.lambda - eps);
  e.log_upper = n * (e.lambda + eps);
  e.log_observed = log_norm(gen, q, n);
  e.log_C = std::max({0.0, e.log_lower - e.log_observed, e.log_observed - e.log_upper});
  require(e.log_C <= std::log(kMaxShadowConstant), ErrorCode::ShadowBoundExceeded,
          "no constant below 1e12 brackets the observed norm");
  return e;
}

struct BlockSelection {
  long J = 0;
  long r = 0;
  double L = 0.0;  // Lipschitz constant of log cond(A^r)
  double C = 0.0;  // 2 / (1 - e^{-tau})
  int N = 0;
};

inline constexpr long kMaxThresholdScan = 10000;

/// J, r, L, C and N = r t with N eps > 3 L C; nullopt when no J <= 10^4 exists.
inline std::optional<BlockSelection> select_block_length(const Generator& gen, const SymbolicPoint& x,
                                                         const SymbolicPoint& y, long k, double eps, double xi) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  // last j <= scan where either bound fails
  DistortionTracker ax(gen.dimension()), ay(gen.dimension());
  long last_bad = 0;
  for (long j = 1; j <= kMaxThresholdScan; ++j) {
    ax.step(gen.at(x, j - 1), gen.inverse_at(x, j - 1));
    ay.step(gen.at(y, j - 1), gen.inverse_at(y, j - 1));
    const double cy = ay.log_condition(), cx = ax.log_condition();
    if (!within_bound(cy, j * eps) || !within_bound(cx, j * (xi + eps))) last_bad = j;
  }
  if (last_bad == kMaxThresholdScan) return std::nullopt;
  BlockSelection s;
  s.J = last_bad + 1;
  s.r = ((s.J + k - 1) / k) * k;
  if (count_valid_words(gen.sft(), static_cast<int>(s.r) + gen.window().width() - 1) > kMaxBlockEdges)
    return std::nullopt;
  s.L = table_lipschitz(block_log_condition(gen, static_cast<int>(s.r)), gen.sft().tau(),
                        [](double a, double b) { return std::abs(a - b); });
  s.C = 2.0 / (1.0 - std::exp(-gen.sft().tau()));
  const long t = static_cast<long>(std::floor(3.0 * s.L * s.C / (static_cast<double>(s.r) * eps))) + 1;
  s.N = static_cast<int>(s.r * t);
  return s;
}

struct ShadowingFamily {
  SymbolicPoint x;
  SymbolicPoint y;
  long k = 1;
  int b = 1;
  int c = 1;
};

struct ExperimentRow {
  long m = 0;
  long u_m = 0;
  double log_norm = 0.0;
  double chi_reference = 0.0;  // chi m - 3 log C
  bool in_D = false;
  int N = 0;
  double theta = 0.0;
  double log_C = 0.0;
  bool distances_ok = false;
  bool periodic_ok = false;
};

struct ExperimentReport {
  double lambda_x = 0.0;
  double lambda_minus_x = 0.0;
  double lambda_y = 0.0;
  /// lambda_+(x) > 0 and lambda_+(y) = 0 (within 1e-8); reported, not enforced.
  bool precondition = false;
  double chi_rate = 0.0;
  std::vector<ExperimentRow> rows;
};

/// For each m: log||A^{u_m}(p^m)||, the reference chi m - 3 log C, and exact
/// D(N, theta) membership of p^m.
inline ExperimentReport growth_and_membership_experiment(const Generator& gen, const ShadowingFamily& fam,
                                                         const std::vector<long>& ms, int N, double theta,
                                                         double eps) {
  ExperimentReport rep;
  const LyapunovPair lx = lyapunov_periodic(gen, fam.x, fam.k);
  const LyapunovPair ly = lyapunov_periodic(gen, fam.y, fam.k);
  rep.lambda_x = lx.lambda_plus;
  rep.lambda_minus_x = lx.lambda_minus;
  rep.lambda_y = ly.lambda_plus;
  rep.precondition = lx.lambda_plus > 1e-8 && std::abs(ly.lambda_plus) <= 1e-8;
  const double zeta = max_log_condition(gen);
  rep.chi_rate = fam.c * (lx.lambda_plus - eps) - 2.0 * fam.b * eps - 2.0 * zeta;
  const Sft& sft = gen.sft();
  for (long m : ms) {
    ShadowingSpec spec{fam.x, fam.y, fam.k, m, fam.b, fam.c, std::nullopt, std::nullopt};
    const ShadowingPoint sp = build_shadowing_point(sft, spec);
    ExperimentRow row;
    row.m = m;
    row.u_m = sp.period;
    row.N = N;
    row.theta = theta;
    row.periodic_ok = shift(sp.point, sp.period) == sp.point;
    row.distances_ok = shadowing_distances(sft, spec, sp).ok();
    const long bm = fam.b * m, cm = fam.c * m;
    const long o1 = (fam.b + 1) * m, o2 = (fam.b + fam.c + 2) * m;
    double log_c = shadow_norm_estimate(gen, fam.y, sp.point, bm, eps).log_C;
    log_c = std::max(log_c, shadow_norm_estimate(gen, fam.x, shift(sp.point, o1), cm, eps).log_C);
    log_c = std::max(log_c, shadow_norm_estimate(gen, fam.y, shift(sp.point, o2), bm, eps).log_C);
    row.log_C = log_c;
    row.log_norm = log_norm(gen, sp.point, sp.period);
    row.chi_reference = rep.chi_rate * static_cast<double>(m) - 3.0 * log_c;
    row.in_D = bunching_membership_periodic(gen, sp.point, sp.period, N, theta).member;
    rep.rows.push_back(row);
  }
  return rep;
}

/// First periodic point (by period, word) with lambda_+ > tol, if any.
inline std::optional<SymbolicPoint> find_expanding_point(const Generator& gen, int period_max, double tol = 1e-8) {
  for (const auto& p : periodic_points_up_to(gen.sft(), period_max))
    if (lyapunov_periodic(gen, p, p.period()).lambda_plus > tol) return p;
  return std::nullopt;
}

}  // namespace rigidity
