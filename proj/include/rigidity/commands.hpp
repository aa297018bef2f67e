#pragma once

// The nine CLI commands. Each writes <out>/<command>.json (resolved config and
// results) and, for tabular results, <out>/<command>.csv.
//
// Exit codes: 0 success, 1 obstruction or negative certificate, 2 error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidity/analysis.hpp"
#include "rigidity/config.hpp"
#include "rigidity/holonomy.hpp"
#include "rigidity/shadowing.hpp"

namespace rigidity::cli {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"lyapunov", "certify",   "holonomy",    "extend",        "verify",
                                              "construct", "shadow",   "irreducible", "quasiconformal"};
  return names;
}

/// CSV columns per command, for --help.
inline std::string csv_schemas() {
  return "CSV schemas (<out>/<command>.csv):\n"
         "  lyapunov        period,cycle,lambda_plus,lambda_minus,normalized_top\n"
         "  certify         N,theta_star,log_constant,theta_all,certified\n"
         "  holonomy        kind,index,y,z,rho,norm_minus_identity\n"
         "  extend          word,form (row-major entries separated by spaces)\n"
         "  verify          word,residual\n"
         "  construct       word,form\n"
         "  shadow          m,u_m,log_norm,chi_reference,in_D,N,theta,log_C,distances_ok,periodic_ok\n"
         "  irreducible     cycle,return_map\n"
         "  quasiconformal  n,K\n";
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string matrix_text(const Matrix& m) {
  std::string s;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += (s.empty() ? "" : " ") + num(m(i, j));
  return s;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

class Csv {
 public:
  explicit Csv(const std::string& header) { text_ << header << '\n'; }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((text_ << (first ? "" : ",") << cell(cells), first = false), ...);
    text_ << '\n';
  }
  std::string str() const { return text_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream text_;
};

inline Json config_json(const ExperimentConfig& cfg) {
  Json j;
  j["version"] = cfg.version;
  j["sft"]["rows"] = cfg.rows;
  j["sft"]["tau"] = cfg.tau;
  j["generator"]["dimension"] = cfg.dimension;
  j["generator"]["window"] = {cfg.window.lo, cfg.window.hi};
  if (!cfg.builtin.empty()) {
    j["generator"]["builtin"] = cfg.builtin;
  } else {
    Json entries = Json::array();
    for (const auto& e : cfg.entries) entries.push_back({{"word", format_symbols(e.word)}, {"matrix", matrix_json(e.value)}});
    j["generator"]["entries"] = entries;
  }
  j["measure"]["type"] = cfg.measure_type;
  if (cfg.measure_type == "explicit") j["measure"]["rows"] = cfg.measure_rows;
  if (cfg.field_window) {
    j["field"]["window"] = {cfg.field_window->lo, cfg.field_window->hi};
    Json entries = Json::array();
    for (const auto& e : cfg.field_entries)
      entries.push_back({{"word", format_symbols(e.word)}, {"matrix", matrix_json(e.value)}});
    j["field"]["entries"] = entries;
  }
  Json run = Json::object();
  for (const auto& [k, v] : cfg.run) run[k] = v;
  j["run"] = run;
  return j;
}

struct Context {
  const ExperimentConfig& cfg;
  std::filesystem::path out;
  Json report;
  std::optional<std::string> csv;
  int exit_code = 0;

  long integer(const std::string& key) const { return std::stol(cfg.get(key)); }
  double real(const std::string& key) const { return std::stod(cfg.get(key)); }
  std::vector<long> list(const std::string& key) const {
    std::vector<long> v;
    for (const auto& t : detail::split_ws(cfg.get(key))) v.push_back(std::stol(t));
    return v;
  }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(std::stoull(cfg.get("seed"))); }
  SymbolicPoint cycle_point(const std::string& key) const {
    SymbolString w;
    for (const auto& t : detail::split_ws(cfg.get(key))) w.push_back(static_cast<Symbol>(std::stol(t) - 1));
    return SymbolicPoint::periodic(w);
  }
  std::vector<int> grid() const {
    std::vector<int> g;
    if (cfg.has("N")) g.push_back(static_cast<int>(integer("N")));
    for (long n : list("grid"))
      if (std::find(g.begin(), g.end(), n) == g.end()) g.push_back(static_cast<int>(n));
    return g;
  }
};

inline Json certificate_json(const BunchingCertificate& c) {
  Json j;
  j["N"] = c.N;
  j["theta"] = c.theta;
  j["scope"] = c.scope == CertificateScope::Uniform ? "uniform" : "point";
  j["witness"] = c.witness;
  j["log_constant"] = c.log_constant;
  j["theta_all"] = c.theta_all;
  return j;
}

inline Json obstruction_json(const std::string& kind, const std::string& detail) {
  return {{"kind", kind}, {"detail", detail}};
}

inline std::string field_csv(const ConformalField& field) {
  Csv csv("word,form");
  for (const auto& w : field.words()) csv.row(format_symbols(w), matrix_text(field.at(w).form()));
  return csv.str();
}

inline void cmd_lyapunov(Context& c) {
  const Generator gen = c.cfg.generator();
  Csv csv("period,cycle,lambda_plus,lambda_minus,normalized_top");
  for (const auto& p : periodic_points_up_to(gen.sft(), static_cast<int>(c.integer("period_max")))) {
    const LyapunovPair l = lyapunov_periodic(gen, p, p.period());
    csv.row(p.period(), format_symbols(cycle_word(p, p.period())), l.lambda_plus, l.lambda_minus,
            l.lambda_plus - mean_log_det_root(gen, p, p.period()));
  }
  c.csv = csv.str();
  if (mixing_index(gen.sft()) || c.cfg.measure_type == "explicit") {
    const BirkhoffEstimate b = lyapunov_birkhoff(gen, c.cfg.measure(), static_cast<int>(c.integer("birkhoff_n")),
                                                 static_cast<int>(c.integer("samples")), c.seed());
    c.report["birkhoff"] = {{"n", c.integer("birkhoff_n")},
                            {"samples", b.samples},
                            {"mean", b.mean},
                            {"standard_error", b.standard_error}};
  }
}

inline void cmd_certify(Context& c) {
  const Generator gen = c.cfg.generator();
  require(mixing_index(gen.sft()).has_value(), ErrorCode::NotMixing, "certification needs a mixing shift");
  Csv csv("N,theta_star,log_constant,theta_all,certified");
  std::optional<BunchingCertificate> first;
  for (int N : c.grid()) {
    if (count_valid_words(gen.sft(), N + gen.window().width()) > kMaxBlockEdges) continue;
    const BunchingCertificate r = uniform_bunching_rate(gen, N);
    const bool ok = r.theta < gen.sft().tau();
    csv.row(N, r.theta, r.log_constant, r.theta_all, ok);
    if (ok && !first) first = r;
  }
  c.csv = csv.str();
  c.report["certificate"] = first ? certificate_json(*first) : Json(nullptr);
  if (c.cfg.has("eps")) {
    const int N = c.cfg.has("N") ? static_cast<int>(c.integer("N")) : (first ? first->N : 1);
    const GapReport g = gap_check(gen, N, c.real("theta"), c.real("eps"), static_cast<int>(c.integer("trials")),
                                  c.seed(), static_cast<int>(std::min<long>(8, c.integer("period_max"))));
    c.report["gap"] = {{"N", N},
                       {"theta", c.real("theta")},
                       {"eps", c.real("eps")},
                       {"R", g.R},
                       {"condition_holds", g.condition_holds},
                       {"tested", g.tested},
                       {"members", g.members},
                       {"counterexamples", g.counterexamples},
                       {"counterexample", g.counterexample ? Json(g.counterexample->to_string()) : Json(nullptr)}};
  }
  if (!first) {
    c.report["obstruction"] = obstruction_json("NoBunchingCertificate", "no N in the grid gives theta* < tau");
    c.exit_code = 1;
  }
}

namespace detail {

/// Random point whose 0-th symbol is s, from the measure's sample paths.
inline SymbolicPoint sample_with_symbol(const MarkovMeasure& mu, Symbol s, int radius, std::uint64_t seed,
                                        std::uint64_t& stream) {
  for (int tries = 0; tries < 10000; ++tries) {
    SymbolicPoint p = sample_point(mu, radius, seed, stream++);
    if (p[0] == s) return p;
  }
  throw Error(ErrorCode::Internal, "could not sample a point in the cylinder");
}

}  // namespace detail

inline void cmd_holonomy(Context& c) {
  const Generator gen = c.cfg.generator();
  const auto cert = certify_uniform_bunching(gen, c.grid());
  if (!cert) {
    c.report["obstruction"] = obstruction_json("NoBunchingCertificate", "no N in the grid gives theta* < tau");
    c.exit_code = 1;
    return;
  }
  c.report["certificate"] = certificate_json(*cert);
  const MarkovMeasure mu = c.cfg.measure();
  const int radius = std::max(-gen.window().lo, gen.window().hi) + 6;
  const int pairs = static_cast<int>(c.integer("pairs"));
  std::uint64_t stream = 0;
  Csv csv("kind,index,y,z,rho,norm_minus_identity");
  const Sft& sft = gen.sft();
  double comp = 0.0, equiv = 0.0;
  for (const bool stable : {true, false}) {
    const double l_exact = holonomy_lipschitz(gen, stable ? HolonomyKind::Stable : HolonomyKind::Unstable);
    double l_fit = 0.0;
    int violations = 0;
    for (int i = 0; i < pairs; ++i) {
      const SymbolicPoint y = sample_point(mu, radius, c.seed(), stream++);
      const SymbolicPoint w = detail::sample_with_symbol(mu, y[0], radius, c.seed(), stream);
      const SymbolicPoint v = detail::sample_with_symbol(mu, y[0], radius, c.seed(), stream);
      const SymbolicPoint z = stable ? bracket(w, y) : bracket(y, w);
      const SymbolicPoint x = stable ? bracket(v, y) : bracket(y, v);
      auto hol = [&](const SymbolicPoint& a, const SymbolicPoint& b) {
        return stable ? stable_holonomy(gen, a, b, *cert) : unstable_holonomy(gen, a, b, *cert);
      };
      const Matrix h = hol(y, z);
      const double dev = spectral_norm(h - Matrix::Identity(gen.dimension(), gen.dimension()));
      const double rho = rho_distance(sft, y, z);
      csv.row(stable ? "stable" : "unstable", i, y.to_string(), z.to_string(), rho, dev);
      if (rho > 0) l_fit = std::max(l_fit, dev / rho);
      if (dev > l_exact * rho * (1.0 + 1e-9) + 1e-14) ++violations;
      comp = std::max(comp, spectral_norm(hol(y, z) - hol(x, z) * hol(y, x)));
      if (stable)
        equiv = std::max(equiv, spectral_norm(hol(shift(y, 1), shift(z, 1)) - gen.at(z) * h * gen.inverse_at(y)));
      else
        equiv = std::max(equiv, spectral_norm(hol(shift(y, -1), shift(z, -1)) -
                                              gen.inverse_at(z, -1) * h * gen.at(y, -1)));
    }
    c.report[stable ? "stable" : "unstable"] = {
        {"lipschitz_exact", l_exact}, {"lipschitz_fitted", l_fit}, {"violations", violations}};
  }
  c.report["composition_residual"] = comp;
  c.report["equivariance_residual"] = equiv;
  c.csv = csv.str();
}

namespace detail {

inline std::optional<ConformalField> extended_field(Context& c, const Generator& gen) {
  const auto cert = certify_uniform_bunching(gen, c.grid());
  if (!cert) {
    c.report["obstruction"] = obstruction_json("NoBunchingCertificate", "no N in the grid gives theta* < tau");
    c.exit_code = 1;
    return std::nullopt;
  }
  c.report["certificate"] = certificate_json(*cert);
  const int pmax = static_cast<int>(c.integer("period_max"));
  const auto anchors = select_anchors(gen, pmax);
  std::vector<Anchor> list;
  Json aj = Json::array();
  for (std::size_t s = 0; s < anchors.size(); ++s) {
    require(anchors[s].has_value(), ErrorCode::MissingAnchor,
            "no periodic point with zero normalized exponent in cylinder [0;" + std::to_string(s + 1) + "]");
    const Matrix ret = evaluate(gen, *anchors[s], anchors[s]->period());
    list.emplace_back(*anchors[s], invariant_structure_elliptic(ret));
    aj.push_back({{"point", anchors[s]->to_string()}, {"form", matrix_json(list.back().second.form())}});
  }
  c.report["anchors"] = aj;
  const Window g = gen.window();
  const Window fw{g.lo, std::max(0, g.hi - g.lo - 1)};
  return ConformalField::build(gen.sft(), fw, [&](const SymbolString& word) {
    return extend_structure(gen, list, extend_to_point(gen.sft(), Word{word, fw.lo}), *cert);
  });
}

}  // namespace detail

inline void cmd_extend(Context& c) {
  const Generator gen = c.cfg.generator();
  const auto field = detail::extended_field(c, gen);
  if (!field) return;
  const double res = verify_invariant_field(gen, *field);
  c.report["field_window"] = {field->window().lo, field->window().hi};
  c.report["residual"] = res;
  c.csv = field_csv(*field);
}

inline void cmd_verify(Context& c) {
  const Generator gen = c.cfg.generator();
  const ConformalField field =
      c.cfg.field() ? *c.cfg.field() : constant_field(gen.sft(), ConformalStructure::identity(gen.dimension()));
  const Window g = gen.window(), w = field.window();
  const Window all = window_union(g, Window{w.lo, w.hi + 1});
  Csv csv("word,residual");
  double worst = 0.0;
  for (const auto& word : valid_words(gen.sft(), all.width())) {
    const Matrix& a = gen.table().lookup(word.data() + (g.lo - all.lo));
    const double r = distance(pull(a, field.lookup(word.data() + (w.lo - all.lo))),
                              field.lookup(word.data() + (w.lo + 1 - all.lo)));
    worst = std::max(worst, r);
    csv.row(format_symbols(word), r);
  }
  c.csv = csv.str();
  const double tol = c.real("tolerance");
  c.report["field"] = c.cfg.field() ? "config" : "identity";
  c.report["residual"] = worst;
  c.report["invariant"] = worst <= tol;
  if (worst <= tol) {
    c.report["gamma"] = std::pow(field_comparison_constant(field), 2);
  } else {
    c.report["obstruction"] = obstruction_json("NotInvariant", "residual exceeds the tolerance");
    c.exit_code = 1;
  }
}

inline void cmd_construct(Context& c) {
  const Generator gen = c.cfg.generator();
  const Construction r = construct_invariant_structure(gen, static_cast<int>(c.integer("period_max")), c.grid());
  c.report["periodic_points_checked"] = r.periodic_points_checked;
  c.report["certificate"] = r.certificate ? certificate_json(*r.certificate) : Json(nullptr);
  Json aj = Json::array();
  for (const auto& [p, eta] : r.anchors) aj.push_back({{"point", p.to_string()}, {"form", matrix_json(eta.form())}});
  c.report["anchors"] = aj;
  c.report["residual"] = r.residual;
  if (r.obstruction) {
    Json o = obstruction_json(obstruction_name(r.obstruction->kind), r.obstruction->detail);
    o["point"] = r.obstruction->point ? Json(r.obstruction->point->to_string()) : Json(nullptr);
    o["value"] = r.obstruction->value;
    c.report["obstruction"] = o;
    c.exit_code = 1;
    return;
  }
  c.report["field_window"] = {r.field->window().lo, r.field->window().hi};
  c.report["gamma"] = std::pow(field_comparison_constant(*r.field), 2);
  c.csv = field_csv(*r.field);
}

inline void cmd_shadow(Context& c) {
  const Generator gen = c.cfg.generator();
  require(c.cfg.has("x") && c.cfg.has("y"), ErrorCode::InvalidArgument, "shadow needs run keys x and y");
  const SymbolicPoint x = c.cycle_point("x"), y = c.cycle_point("y");
  const long k = c.cfg.has("k") ? c.integer("k") : lcm_long(x.period(), y.period());
  const LyapunovPair lx = lyapunov_periodic(gen, x, k);
  const double lambda = lx.lambda_plus, xi = lx.lambda_plus - lx.lambda_minus, zeta = max_log_condition(gen);
  const double theta = c.real("theta");
  c.report["lambda"] = lambda;
  c.report["xi"] = xi;
  c.report["zeta"] = zeta;
  Tuning t;
  if (c.cfg.has("b") && c.cfg.has("c") && c.cfg.has("eps")) {
    t.b = static_cast<int>(c.integer("b"));
    t.c = static_cast<int>(c.integer("c"));
    t.eps = c.real("eps");
    t.chi_rate = t.c * (lambda - t.eps) - 2.0 * t.b * t.eps - 2.0 * zeta;
  } else {
    const auto tuned = lambda > 0 ? tune_parameters(lambda, xi, zeta, gen.sft().tau(), theta) : std::nullopt;
    if (!tuned) {
      c.report["obstruction"] = obstruction_json("Infeasible", "no (b, c, eps) satisfies the tuning inequalities");
      c.exit_code = 1;
      return;
    }
    t = *tuned;
  }
  c.report["tuning"] = {{"b", t.b}, {"c", t.c}, {"eps", t.eps}, {"chi_rate", t.chi_rate},
                        {"valid", tuning_is_valid(t, lambda, xi, zeta, theta)}};
  int N = 1;
  if (c.cfg.has("N")) {
    N = static_cast<int>(c.integer("N"));
    c.report["block_selection"] = nullptr;
  } else if (const auto sel = select_block_length(gen, x, y, k, t.eps, xi)) {
    N = sel->N;
    c.report["block_selection"] = {{"J", sel->J}, {"r", sel->r}, {"L", sel->L}, {"C", sel->C}, {"N", sel->N}};
  } else {
    c.report["block_selection"] = nullptr;
  }
  const ExperimentReport rep = growth_and_membership_experiment(gen, ShadowingFamily{x, y, k, t.b, t.c},
                                                                c.list("m"), N, theta, t.eps);
  c.report["lambda_x"] = rep.lambda_x;
  c.report["lambda_minus_x"] = rep.lambda_minus_x;
  c.report["lambda_y"] = rep.lambda_y;
  c.report["precondition"] = rep.precondition;
  c.report["chi_rate"] = rep.chi_rate;
  Csv csv("m,u_m,log_norm,chi_reference,in_D,N,theta,log_C,distances_ok,periodic_ok");
  for (const auto& r : rep.rows)
    csv.row(r.m, r.u_m, r.log_norm, r.chi_reference, r.in_D, r.N, r.theta, r.log_C, r.distances_ok, r.periodic_ok);
  c.csv = csv.str();
}

inline void cmd_irreducible(Context& c) {
  const Generator gen = c.cfg.generator();
  const int pmax = static_cast<int>(c.integer("period_max"));
  std::vector<Matrix> maps;
  Csv csv("cycle,return_map");
  for (const auto& p : periodic_points_up_to(gen.sft(), pmax)) {
    // one representative per orbit: the point whose cycle word is lex-least
    if (!(p == SymbolicPoint::periodic(cycle_word(p, p.period())))) continue;
    Matrix m = evaluate(gen, p, p.period());
    m /= std::pow(std::abs(m.determinant()), 1.0 / gen.dimension());
    csv.row(format_symbols(cycle_word(p, p.period())), matrix_text(m));
    maps.push_back(m);
  }
  c.csv = csv.str();
  c.report["period_max"] = pmax;
  c.report["return_maps"] = maps.size();
  c.report["algebra_dimension"] = algebra_dimension(maps, gen.dimension());
  const auto sub = common_invariant_subspace(maps, gen.dimension());
  if (sub) {
    c.report["invariant_subspace"] = {{"basis", matrix_json(sub->basis)}, {"residual", sub->residual}};
  } else {
    c.report["invariant_subspace"] = nullptr;
  }
}

inline void cmd_quasiconformal(Context& c) {
  const Generator gen = c.cfg.generator();
  const auto r = quasiconformality_report(gen, static_cast<int>(c.integer("n_max")),
                                          static_cast<int>(c.integer("period_max")),
                                          static_cast<int>(c.integer("samples")), c.seed());
  Csv csv("n,K");
  for (std::size_t i = 0; i < r.K.size(); ++i) csv.row(static_cast<long>(i + 1), r.K[i]);
  c.csv = csv.str();
  c.report["C"] = r.C;
  c.report["eps"] = r.eps;
  c.report["uniformly_quasiconformal"] = r.uniformly_quasiconformal;
  c.report["periodic_points"] = r.periodic_points;
  c.report["sampled_points"] = r.sampled_points;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::InvalidArgument, "cannot write " + p.string());
  f << text;
}

/// Runs one command and writes its artifacts; returns the exit code.
inline int run_command(const std::string& cmd, const ExperimentConfig& cfg, const std::filesystem::path& out,
                       std::ostream& err = std::cerr) {
  Context c{cfg, out, Json::object(), std::nullopt, 0};
  c.report["command"] = cmd;
  c.report["config"] = config_json(cfg);
  try {
    if (std::find(command_names().begin(), command_names().end(), cmd) == command_names().end())
      throw Error(ErrorCode::InvalidArgument, "unknown command '" + cmd + "'");
    std::filesystem::create_directories(out);
    if (cmd == "lyapunov") cmd_lyapunov(c);
    else if (cmd == "certify") cmd_certify(c);
    else if (cmd == "holonomy") cmd_holonomy(c);
    else if (cmd == "extend") cmd_extend(c);
    else if (cmd == "verify") cmd_verify(c);
    else if (cmd == "construct") cmd_construct(c);
    else if (cmd == "shadow") cmd_shadow(c);
    else if (cmd == "irreducible") cmd_irreducible(c);
    else cmd_quasiconformal(c);
  } catch (const Error& e) {
    c.report["error"] = {{"code", error_code_name(e.code())}, {"message", e.what()}};
    c.exit_code = 2;
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    c.report["error"] = {{"code", "core.Internal"}, {"message", e.what()}};
    c.exit_code = 2;
    err << "error: " << e.what() << '\n';
  }
  c.report["exit_code"] = c.exit_code;
  try {
    if (std::filesystem::is_directory(out)) {
      write_file(out / (cmd + ".json"), c.report.dump(2) + "\n");
      if (c.csv) write_file(out / (cmd + ".csv"), *c.csv);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return c.exit_code;
}

}  // namespace rigidity::cli
