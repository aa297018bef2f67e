// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "rigidity/analysis.hpp"
#include "rigidity/catalog.hpp"
#include "rigidity/rigidity.hpp"

using namespace rigidity;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("criterion %2d %-28s %s  %s\n", id, name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix random_matrix(int d, Rng& rng, double spread = 1.0, bool near_identity = false) {
  for (;;) {
    Matrix m = near_identity ? Matrix(Matrix::Identity(d, d)) : Matrix(Matrix::Zero(d, d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) += spread * rng.normal();
    if (std::abs(m.determinant()) > 0.1) return m;
  }
}

/// U diag(e^{s_i}) V with s_i uniform in [-1, 1] and U, V Haar-orthogonal.
Matrix random_spectral(int d, Rng& rng) {
  auto orthogonal = [&] {
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    return Matrix(Eigen::HouseholderQR<Matrix>(g).householderQ());
  };
  Vector s(d);
  for (int i = 0; i < d; ++i) s(i) = std::exp(rng.uniform(-1.0, 1.0));
  return orthogonal() * s.asDiagonal() * orthogonal();
}

ConformalStructure random_structure(int d, Rng& rng) {
  const Matrix b = random_spectral(d, rng);
  return ConformalStructure::normalize(b.transpose() * b);
}

SymbolicPoint leaf_neighbour(const Sft& sft, const SymbolicPoint& x, Rng& rng, int depth) {
  for (;;) {
    SymbolString w;
    for (int i = 0; i <= depth; ++i) w.push_back(static_cast<Symbol>(rng.below(sft.alphabet_size())));
    w.back() = x[0];
    const Word word{w, -depth};
    if (is_valid(sft, word)) return bracket(extend_to_point(sft, word), x);
  }
}

// 1 ------------------------------------------------------------------------
void action_isometry() {
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + t % 3;
    const Matrix b = random_spectral(d, rng);
    const ConformalStructure x = random_structure(d, rng), y = random_structure(d, rng);
    worst = std::max(worst, std::abs(distance(push(b, x), push(b, y)) - distance(x, y)));
  }
  report(1, "action isometry", worst <= 1e-10, fmt("max deviation %.3g over 1000 triples", worst));
}

// 2 ------------------------------------------------------------------------
void holonomy_contract() {
  const Sft sft = catalog::full2();
  const Generator gen = catalog::bunched(sft);
  const BunchingCertificate cert = *certify_uniform_bunching(gen, default_bunching_grid());
  const MarkovMeasure mu = parry_measure(sft);
  const double L = holonomy_lipschitz(gen, HolonomyKind::Stable);
  Rng rng(102);
  double stab = 0.0, comp = 0.0;
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const SymbolicPoint y = sample_point(mu, 12, 102, static_cast<std::uint64_t>(t));
    const SymbolicPoint z = leaf_neighbour(sft, y, rng, 8), x = leaf_neighbour(sft, y, rng, 8);
    for (long n = stable_depth(gen) + 1; n <= stable_depth(gen) + 4; ++n)
      stab = std::max(stab, spectral_norm(stable_holonomy_truncated(gen, y, z, n) -
                                          stable_holonomy_truncated(gen, y, z, n + 16)));
    const Matrix h = stable_holonomy(gen, y, z, cert);
    comp = std::max(comp, spectral_norm(h - stable_holonomy(gen, x, z, cert) * stable_holonomy(gen, y, x, cert)));
    if (!(y == z) && spectral_norm(h - Matrix::Identity(2, 2)) > L * rho_distance(sft, y, z) * (1 + 1e-12))
      ++violations;
  }
  const bool ok = stab <= 1e-14 && violations == 0 && comp <= 1e-10 && cert.theta < sft.tau();
  std::ostringstream s;
  s << "theta* " << cert.theta << " (N=" << cert.N << "), stabilization " << stab << ", L " << L << ", violations "
    << violations << ", composition " << comp;
  report(2, "holonomy contract", ok, s.str());
}

// 3 ------------------------------------------------------------------------
void membership_decision() {
  Rng rng(103);
  const std::vector<Generator> gens{catalog::mixed(catalog::golden()), catalog::bunched(catalog::full2()),
                                    catalog::expanding_and_elliptic(catalog::full2())};
  int agree = 0, total = 0, members = 0;
  for (int t = 0; t < 100; ++t) {
    const Generator& g = gens[static_cast<std::size_t>(t % 3)];
    const SymbolicPoint p = random_periodic_point(g.sft(), rng.range(1, 8), rng);
    const long k = p.period();
    const int N = rng.range(1, 4);
    const double star = uniform_bunching_rate(g, N).theta;
    const double theta = rng.uniform(0.0, 1.5) * std::max(star, 0.01);
    const long P = k / gcd_int(k, N);
    const MembershipResult a = bunching_membership_periodic(g, p, k, N, theta);
    const MembershipResult b = bunching_membership_bruteforce(g, p, N, theta, 10 * P);
    ++total;
    if (a.member == b.member) ++agree;
    members += a.member;
  }
  report(3, "exact D(N,theta) decision", agree == total,
         std::to_string(agree) + "/" + std::to_string(total) + " agree (" + std::to_string(members) + " members)");
}

// 4 ------------------------------------------------------------------------
void uniform_bunching() {
  const std::vector<Generator> gens{catalog::mixed(catalog::golden()), catalog::mixed(catalog::full2()),
                                    catalog::expanding_and_elliptic(catalog::golden()),
                                    catalog::expanding_and_elliptic(catalog::full2())};
  double worst = 0.0;
  for (const auto& g : gens)
    for (int N = 1; N <= 2; ++N) {
      // closed walks of at most 6 blocks cover every simple cycle of the block graph
      double best = 0.0;
      for (int k = 1; k <= 6; ++k)
        for (const auto& p : enumerate_periodic(g.sft(), k * N)) {
          double s = 0.0;
          for (int j = 0; j < k; ++j) s += log_distortion(g, shift(p, j * N), N);
          best = std::max(best, s / (k * N));
        }
      worst = std::max(worst, std::abs(uniform_bunching_rate(g, N).theta - best));
    }
  report(4, "uniform bunching via Karp", worst <= 1e-12, fmt("max |theta* - enumeration| %.3g", worst));
}

// 5 ------------------------------------------------------------------------
void gap_proposition() {
  struct Case {
    Generator gen;
    int N;
    double theta;
  };
  const std::vector<Case> cases{{catalog::mixed(catalog::golden()), 4, 0.3},
                                {catalog::bunched(catalog::full2()), 2, 0.02},
                                {catalog::expanding_and_elliptic(catalog::full2()), 4, 1.0}};
  int counter = 0, members = 0, tested = 0;
  bool cond = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const double R = max_norm_bound(c.gen);
    const double eps = 4.0 * std::log(R) / c.N * (1 + 1e-9);
    const GapReport r = gap_check(c.gen, c.N, c.theta, eps, 1000, 105 + i);
    cond = cond && r.condition_holds;
    counter += r.counterexamples;
    members += r.members;
    tested += r.tested;
  }
  report(5, "gap bound", cond && counter == 0 && members > 0,
         std::to_string(counter) + " counterexamples, " + std::to_string(members) + " members of " +
             std::to_string(tested) + " points");
}

// 6 ------------------------------------------------------------------------
void invariance_boundedness() {
  const Sft sft = catalog::full2();
  const Matrix si = catalog::shear().inverse();
  std::vector<std::pair<Generator, ConformalField>> cases{
      {catalog::rotations(sft), constant_field(sft, ConformalStructure::identity(2))},
      {catalog::conjugated_rotation(sft), constant_field(sft, ConformalStructure::normalize(si.transpose() * si))},
  };
  const Construction m = construct_invariant_structure(catalog::manufactured_conjugate(sft), 4);
  if (m.field) cases.emplace_back(catalog::manufactured_conjugate(sft), *m.field);
  bool ok = m.field.has_value();
  double worst_lambda = 0.0, worst_ratio = 0.0;
  int used = 0;
  for (const auto& [gen, field] : cases) {
    if (verify_invariant_field(gen, field) > 1e-10) continue;
    ++used;
    for (const auto& p : periodic_points_up_to(sft, 8))
      worst_lambda = std::max(worst_lambda, std::abs(lyapunov_periodic(gen, p, p.period()).lambda_plus));
    const double gamma = std::pow(field_comparison_constant(field), 2);
    worst_ratio = std::max(worst_ratio, max_orbit_norm(gen, parry_measure(sft), 10000, 100, 106) / gamma);
  }
  ok = ok && used == 3 && worst_lambda <= 1e-8 && worst_ratio <= 1.0 + 1e-9;
  std::ostringstream s;
  s << used << " invariant examples, max |lambda+| " << worst_lambda << ", max ||A^n||/gamma " << worst_ratio;
  report(6, "invariance => boundedness", ok, s.str());
}

// 7 ------------------------------------------------------------------------
void round_trip() {
  Rng rng(107);
  double worst = 0.0;
  int built = 0, attempts = 0;
  for (const Sft& sft : {catalog::full2(), catalog::golden()})
    for (int t = 0; t < 4; ++t) {
      ++attempts;
      const Window qw = t % 2 ? Window{-1, 0} : Window{0, 0};
      const TransferField q = TransferField::build(sft, qw, [&](const SymbolString&) { return random_matrix(2, rng, 0.3, true); });
      const Generator gen = Generator::from_function(sft, 2, Window{qw.lo, qw.hi + 1}, [&](const SymbolString& w) {
        const SymbolString here(w.begin(), w.end() - 1), next(w.begin() + 1, w.end());
        const double angle = catalog::rotation_angles()[static_cast<std::size_t>(w[static_cast<std::size_t>(-qw.lo)])];
        return Matrix(q.at(next) * catalog::rotation(angle) * q.at(here).inverse());
      });
      const Construction c = construct_invariant_structure(gen, 6);
      if (!c.field) continue;
      ++built;
      worst = std::max(worst, c.residual);
    }
  double cob = 0.0, bumped_min = 1e300;
  for (const Sft& sft : {catalog::full2(), catalog::golden()})
    for (int t = 0; t < 10; ++t) {
      TransferField p = TransferField::build(sft, Window{-1, 0}, [&](const SymbolString&) { return random_matrix(2, rng); });
      const Generator a = Generator::from_function(sft, 2, Window{-1, 1}, [&](const SymbolString& w) {
        return Matrix(p.at(SymbolString{w[1], w[2]}) * p.at(SymbolString{w[0], w[1]}).inverse());
      });
      const Generator id = catalog::identity(sft);
      cob = std::max(cob, verify_coboundary(a, id, p));
      const SymbolString w = p.words()[static_cast<std::size_t>(t) % p.words().size()];
      Matrix m = p.at(w);
      m(t % 2, (t / 2) % 2) += 1e-3;
      p.set(w, m);
      bumped_min = std::min(bumped_min, verify_coboundary(a, id, p));
    }
  const bool ok = built == attempts && worst <= 1e-8 && cob <= 1e-12 && bumped_min >= 1e-4;
  std::ostringstream s;
  s << built << "/" << attempts << " reconstructed, max residual " << worst << "; coboundary " << cob
    << ", min perturbed residual " << bumped_min;
  report(7, "round-trip rigidity", ok, s.str());
}

// 8 ------------------------------------------------------------------------
void obstruction() {
  const Construction c = construct_invariant_structure(catalog::hyperbolic(catalog::full2()), 4);
  const bool ok = c.obstruction && c.obstruction->kind == ObstructionKind::PositiveExponent && c.obstruction->point &&
                  c.obstruction->point->period() == 1 &&
                  std::abs(c.obstruction->value - std::log(2.0)) <= 1e-10;
  std::ostringstream s;
  if (c.obstruction)
    s << obstruction_name(c.obstruction->kind) << " at " << (c.obstruction->point ? c.obstruction->point->to_string() : "-")
      << ", lambda+ " << fmt("%.17g", c.obstruction->value);
  report(8, "obstruction correctness", ok, s.str());
}

// 9 ------------------------------------------------------------------------
void shadowing_experiment() {
  const Sft sft = catalog::full2();
  const Generator h = catalog::hyperbolic(sft);
  const SymbolicPoint x = SymbolicPoint::fixed(0), y = SymbolicPoint::fixed(1);
  const LyapunovPair lx = lyapunov_periodic(h, x, 1);
  const double xi = lx.lambda_plus - lx.lambda_minus, zeta = max_log_condition(h), theta = 0.5;
  const auto tu = tune_parameters(lx.lambda_plus, xi, zeta, sft.tau(), theta);
  bool ok = tu.has_value() && tuning_is_valid(*tu, lx.lambda_plus, xi, zeta, theta) && tu->chi_rate > 0;
  std::ostringstream s;
  if (tu) {
    s << "b " << tu->b << ", c " << tu->c << ", eps " << tu->eps << ";";
    const ShadowingFamily fam{x, y, 1, tu->b, tu->c};
    const ExperimentReport rep = growth_and_membership_experiment(h, fam, {4, 8, 16, 32}, 1, theta, tu->eps);
    for (const auto& row : rep.rows) {
      // independent coordinatewise distance check
      const ShadowingPoint sp = build_shadowing_point(sft, {x, y, 1, row.m, tu->b, tu->c, std::nullopt, std::nullopt});
      const long bm = tu->b * row.m, cm = tu->c * row.m;
      auto within = [&](const SymbolicPoint& ref, long offset, long n) {
        for (long j = 0; j <= n; ++j) {
          const double rho = rho_distance(sft, shift(ref, offset + j), shift(sp.point, offset + j));
          if (rho > std::exp(-sft.tau() * static_cast<double>(std::min(j, n - j))) * (1 + 1e-12)) return false;
        }
        return true;
      };
      const bool dist = within(y, 0, bm) && within(x, (tu->b + 1) * row.m, cm) &&
                        within(y, (tu->b + tu->c + 2) * row.m, bm);
      const bool per = shift(sp.point, sp.period) == sp.point && sp.period == (2 * tu->b + tu->c + 2) * row.m;
      const bool grow = row.log_norm >= row.chi_reference;
      ok = ok && dist && per && grow && row.distances_ok && row.periodic_ok;
      s << " m=" << row.m << (dist && per && grow ? " ok" : " BAD");
    }
  }
  report(9, "shadowing experiment", ok, s.str());
}

// 10 -----------------------------------------------------------------------
void jacobians() {
  Rng rng(110);
  double worst = 0.0;
  long checked = 0;
  for (const Sft& sft : {catalog::full2(), catalog::golden()}) {
    std::vector<MarkovMeasure> ms{parry_measure(sft)};
    for (int i = 0; i < 3; ++i) ms.push_back(random_markov_measure(sft, rng));
    for (const auto& mu : ms)
      for (int k = 1; k <= 6; ++k)
        for (const auto& w : valid_words(sft, k)) {
          // unstable: mass of [w] against its J_u-weighted preimage cylinders [j w]
          const double target = cylinder_measure(mu, w);
          for (Symbol j = 0; j < static_cast<Symbol>(sft.alphabet_size()); ++j) {
            if (sft.allowed(j, w.front())) {
              SymbolString pre{j};
              pre.insert(pre.end(), w.begin(), w.end());
              const double ju = jacobian_u(mu, extend_to_point(sft, Word{pre, 0}));
              worst = std::max(worst, std::abs(ju * cylinder_measure(mu, pre) - target) / target);
              ++checked;
            }
            if (sft.allowed(w.back(), j)) {
              SymbolString post = w;
              post.push_back(j);
              const double js = jacobian_s(mu, extend_to_point(sft, Word{post, -static_cast<long>(w.size())}));
              worst = std::max(worst, std::abs(js * cylinder_measure(mu, post) - target) / target);
              ++checked;
            }
          }
        }
  }
  report(10, "jacobian identity", worst <= 1e-12,
         fmt("max relative error %.3g", worst) + " over " + std::to_string(checked) + " cylinder pairs");
}

// 11 -----------------------------------------------------------------------
int run_cli(const std::string& cmd, const std::string& config, const std::string& out) {
  fs::remove_all(out);
  const std::string line = std::string("\"") + RIGIDITY_CLI + "\" " + cmd + " --config " + RIGIDITY_CONFIGS + "/" +
                           config + ".cfg --out " + out + " --seed 11 > /dev/null 2>&1";
  const int status = std::system(line.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"lyapunov", "mixed_golden"},       {"certify", "mixed_golden"},
      {"holonomy", "bunched"},            {"extend", "conjugated_rotation"},
      {"verify", "conjugated_rotation"},  {"construct", "manufactured_conjugate"},
      {"shadow", "hyperbolic"},           {"irreducible", "hyperbolic"},
      {"quasiconformal", "conjugated_rotation"}};
  int same = 0;
  std::string bad;
  for (const auto& [cmd, cfg] : runs) {
    const int a = run_cli(cmd, cfg, "acceptance_out/a");
    const int b = run_cli(cmd, cfg, "acceptance_out/b");
    bool eq = a == b && a >= 0 && a <= 1;
    for (const char* ext : {".json", ".csv"}) {
      const fs::path pa = "acceptance_out/a/" + cmd + ext, pb = "acceptance_out/b/" + cmd + ext;
      if (fs::exists(pa) != fs::exists(pb) || (fs::exists(pa) && slurp(pa) != slurp(pb))) eq = false;
    }
    eq = eq && fs::exists("acceptance_out/a/" + cmd + ".json");
    if (eq) ++same;
    else bad += " " + cmd;
  }
  report(11, "determinism", same == static_cast<int>(runs.size()),
         std::to_string(same) + "/" + std::to_string(runs.size()) + " commands byte-identical" +
             (bad.empty() ? "" : "; differing:" + bad));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{action_isometry, holonomy_contract, membership_decision,
                                                  uniform_bunching, gap_proposition,  invariance_boundedness,
                                                  round_trip,       obstruction,       shadowing_experiment,
                                                  jacobians,        determinism};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "(exception)", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
