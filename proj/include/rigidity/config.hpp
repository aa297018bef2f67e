#pragma once

// Line-oriented experiment configs.
//
//   version = 1
//   [sft]        alphabet, row (repeated), tau
//   [generator]  dimension, window, entry = <word> : <d*d numbers, row-major>
//                or builtin = <name>
//   [measure]    type = parry | explicit, row (repeated, for explicit)
//   [field]      window, entry = <word> : <d*d numbers>   (optional)
//   [run]        command parameters
//
// Symbols are written 1-based. '#' starts a comment.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rigidity/analysis.hpp"
#include "rigidity/catalog.hpp"
#include "rigidity/cocycle.hpp"
#include "rigidity/conformal.hpp"
#include "rigidity/errors.hpp"
#include "rigidity/markov.hpp"
#include "rigidity/sft.hpp"

namespace rigidity {

class ConfigError : public Error {
 public:
  ConfigError(int line, std::string key, std::string reason)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", key '" + key + "': " + reason),
        line_(line),
        key_(std::move(key)),
        reason_(std::move(reason)) {}

  int line() const { return line_; }
  const std::string& key() const { return key_; }
  const std::string& reason() const { return reason_; }

 private:
  int line_;
  std::string key_;
  std::string reason_;
};

struct TableEntry {
  SymbolString word;
  Matrix value;
};

struct ExperimentConfig {
  int version = 1;
  std::vector<std::vector<int>> rows;
  double tau = 1.0;
  int dimension = 0;
  Window window{0, 0};
  std::string builtin;
  std::vector<TableEntry> entries;
  std::string measure_type = "parry";
  std::vector<std::vector<double>> measure_rows;
  std::optional<Window> field_window;
  std::vector<TableEntry> field_entries;
  std::map<std::string, std::string> run;

  Sft sft() const { return Sft(rows, tau); }

  Generator generator() const {
    const Sft s = sft();
    if (!builtin.empty()) return catalog::generator_by_name(builtin, s);
    WindowTable<Matrix> table(s, window);
    for (const auto& e : entries) table.set(e.word, e.value);
    return Generator(std::move(table), dimension);
  }

  MarkovMeasure measure() const {
    const Sft s = sft();
    if (measure_type == "parry") return parry_measure(s);
    const int l = static_cast<int>(measure_rows.size());
    Matrix p(l, l);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) p(i, j) = measure_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return MarkovMeasure(s, p);
  }

  std::optional<ConformalField> field() const {
    if (!field_window) return std::nullopt;
    ConformalField f(sft(), *field_window);
    for (const auto& e : field_entries) f.set(e.word, ConformalStructure::normalize(e.value));
    return f;
  }

  bool has(const std::string& key) const { return run.count(key) > 0; }
  const std::string& get(const std::string& key) const { return run.at(key); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline double parse_double(const std::string& tok, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(line, key, "'" + tok + "' is not a finite number");
}

inline long parse_long(const std::string& tok, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(line, key, "'" + tok + "' is not an integer");
}

inline SymbolString parse_word(const std::string& text, int line, const std::string& key) {
  SymbolString w;
  for (const auto& t : split_ws(text)) {
    const long s = parse_long(t, line, key);
    if (s < 1) throw ConfigError(line, key, "symbols are numbered from 1");
    w.push_back(static_cast<Symbol>(s - 1));
  }
  if (w.empty()) throw ConfigError(line, key, "empty word");
  return w;
}

inline TableEntry parse_entry(const std::string& value, int d, int width, int line, const std::string& key) {
  const auto colon = value.find(':');
  if (colon == std::string::npos) throw ConfigError(line, key, "expected '<word> : <matrix>'");
  TableEntry e;
  e.word = parse_word(value.substr(0, colon), line, key);
  if (static_cast<int>(e.word.size()) != width)
    throw ConfigError(line, key, "word has " + std::to_string(e.word.size()) + " symbols, window needs " +
                                     std::to_string(width));
  const auto nums = split_ws(value.substr(colon + 1));
  if (static_cast<int>(nums.size()) != d * d)
    throw ConfigError(line, key, "expected " + std::to_string(d * d) + " numbers, got " + std::to_string(nums.size()));
  e.value = Matrix(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) e.value(i, j) = parse_double(nums[static_cast<std::size_t>(i * d + j)], line, key);
  return e;
}

inline Window parse_window(const std::string& value, int line, const std::string& key) {
  const auto t = split_ws(value);
  if (t.size() != 2) throw ConfigError(line, key, "window needs two integers 'lo hi'");
  const Window w{static_cast<int>(parse_long(t[0], line, key)), static_cast<int>(parse_long(t[1], line, key))};
  if (w.lo > w.hi) throw ConfigError(line, key, "window lo exceeds hi");
  return w;
}

inline std::string join_words(const std::vector<SymbolString>& words) {
  std::string list;
  for (std::size_t i = 0; i < words.size(); ++i) list += (i ? ", [" : "[") + format_symbols(words[i]) + "]";
  return list;
}

}  // namespace detail

/// Keys accepted in [run].
inline const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys{
      "N",   "theta", "eps", "m", "seed", "tolerance", "period_max", "n_max", "samples", "trials", "pairs",
      "x",   "y",     "k",   "b", "c",    "threads",   "grid",       "birkhoff_n"};
  return keys;
}

/// Defaults filled into [run] when absent.
inline const std::map<std::string, std::string>& run_defaults() {
  static const std::map<std::string, std::string> d{
      {"seed", "0"},       {"tolerance", "1e-10"}, {"period_max", "6"}, {"n_max", "64"},
      {"samples", "20"},   {"trials", "200"},      {"pairs", "200"},    {"threads", "1"},
      {"grid", "1 2 3 4 6 8 12 16"}, {"birkhoff_n", "1000"}, {"theta", "0.5"}, {"m", "4 8 16"}};
  return d;
}

/// Parses and validates a config; throws ConfigError naming the line and key.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::string section;
  bool saw_version = false;
  int alphabet = -1;
  int sft_line = 0, gen_line = 0, measure_line = 0, field_line = 0;
  std::vector<std::pair<int, std::string>> entry_lines, field_lines;
  std::vector<int> row_lines;
  std::map<std::string, int> run_lines;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, s, "unterminated section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section == "sft") sft_line = line;
      else if (section == "generator") gen_line = line;
      else if (section == "measure") measure_line = line;
      else if (section == "field") field_line = line;
      else if (section != "run") throw ConfigError(line, section, "unknown section");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, s, "expected 'key = value'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (section.empty()) {
      if (key != "version") throw ConfigError(line, key, "only 'version' may precede the first section");
      if (value != "1") throw ConfigError(line, key, "unsupported version '" + value + "'");
      saw_version = true;
    } else if (section == "sft") {
      if (key == "alphabet") {
        alphabet = static_cast<int>(detail::parse_long(value, line, key));
        if (alphabet < 1) throw ConfigError(line, key, "alphabet must be positive");
      } else if (key == "row") {
        std::vector<int> row;
        for (const auto& t : detail::split_ws(value)) {
          const long v = detail::parse_long(t, line, key);
          if (v != 0 && v != 1) throw ConfigError(line, key, "transition entries must be 0 or 1");
          row.push_back(static_cast<int>(v));
        }
        cfg.rows.push_back(row);
        row_lines.push_back(line);
      } else if (key == "tau") {
        cfg.tau = detail::parse_double(value, line, key);
        if (!(cfg.tau > 0)) throw ConfigError(line, key, "tau must be positive");
      } else if (key == "builtin") {
        try {
          cfg.rows = catalog::shift_by_name(value).rows();
        } catch (const Error& e) {
          throw ConfigError(line, key, e.what());
        }
        alphabet = static_cast<int>(cfg.rows.size());
        for (std::size_t i = 0; i < cfg.rows.size(); ++i) row_lines.push_back(line);
      } else {
        throw ConfigError(line, key, "unknown key in [sft]");
      }
    } else if (section == "generator") {
      if (key == "dimension") {
        cfg.dimension = static_cast<int>(detail::parse_long(value, line, key));
        if (cfg.dimension < 1) throw ConfigError(line, key, "dimension must be positive");
      } else if (key == "window") {
        cfg.window = detail::parse_window(value, line, key);
      } else if (key == "entry") {
        entry_lines.emplace_back(line, value);
      } else if (key == "builtin") {
        cfg.builtin = value;
      } else {
        throw ConfigError(line, key, "unknown key in [generator]");
      }
    } else if (section == "measure") {
      if (key == "type") {
        if (value != "parry" && value != "explicit") throw ConfigError(line, key, "type must be parry or explicit");
        cfg.measure_type = value;
      } else if (key == "row") {
        std::vector<double> row;
        for (const auto& t : detail::split_ws(value)) row.push_back(detail::parse_double(t, line, key));
        cfg.measure_rows.push_back(row);
      } else {
        throw ConfigError(line, key, "unknown key in [measure]");
      }
    } else if (section == "field") {
      if (key == "window") cfg.field_window = detail::parse_window(value, line, key);
      else if (key == "entry") field_lines.emplace_back(line, value);
      else throw ConfigError(line, key, "unknown key in [field]");
    } else if (section == "run") {
      if (std::find(run_keys().begin(), run_keys().end(), key) == run_keys().end())
        throw ConfigError(line, key, "unknown key in [run]");
      cfg.run[key] = value;
      run_lines[key] = line;
    }
  }
  if (!saw_version) throw ConfigError(1, "version", "missing 'version = 1' header");

  // shift
  if (sft_line == 0) throw ConfigError(line, "sft", "missing [sft] section");
  if (alphabet < 0) alphabet = static_cast<int>(cfg.rows.size());
  if (static_cast<int>(cfg.rows.size()) != alphabet)
    throw ConfigError(sft_line, "row", "expected " + std::to_string(alphabet) + " transition rows, got " +
                                           std::to_string(cfg.rows.size()));
  for (std::size_t i = 0; i < cfg.rows.size(); ++i)
    if (static_cast<int>(cfg.rows[i].size()) != alphabet)
      throw ConfigError(row_lines[i], "row", "row " + std::to_string(i + 1) + " has " +
                                                 std::to_string(cfg.rows[i].size()) + " entries, expected " +
                                                 std::to_string(alphabet));
  Sft sft = [&] {
    try {
      return cfg.sft();
    } catch (const Error& e) {
      throw ConfigError(sft_line, "row", e.what());
    }
  }();

  // generator
  if (gen_line == 0) throw ConfigError(line, "generator", "missing [generator] section");
  if (!cfg.builtin.empty()) {
    if (!entry_lines.empty()) throw ConfigError(entry_lines.front().first, "entry", "builtin generators take no entries");
    try {
      const Generator g = cfg.generator();
      cfg.dimension = g.dimension();
      cfg.window = g.window();
    } catch (const Error& e) {
      throw ConfigError(gen_line, "builtin", e.what());
    }
  } else {
    if (cfg.dimension < 1) throw ConfigError(gen_line, "dimension", "missing dimension");
    WindowTable<Matrix> table(sft, cfg.window);
    for (const auto& [ln, value] : entry_lines) {
      TableEntry e = detail::parse_entry(value, cfg.dimension, cfg.window.width(), ln, "entry");
      if (!is_valid(sft, e.word)) throw ConfigError(ln, "entry", "[" + format_symbols(e.word) + "] is not a valid word");
      if (table.contains(e.word)) throw ConfigError(ln, "entry", "duplicate word [" + format_symbols(e.word) + "]");
      if (!(std::abs(e.value.determinant()) > kMinAbsDeterminant))
        throw ConfigError(ln, "entry", "matrix for [" + format_symbols(e.word) + "] is not invertible");
      table.set(e.word, e.value);
      cfg.entries.push_back(std::move(e));
    }
    const auto missing = table.missing();
    if (!missing.empty()) throw ConfigError(gen_line, "entry", "table misses window words " + detail::join_words(missing));
    try {
      (void)cfg.generator();
    } catch (const Error& e) {
      throw ConfigError(gen_line, "entry", e.what());
    }
  }

  // measure
  if (cfg.measure_type == "explicit") {
    if (static_cast<int>(cfg.measure_rows.size()) != alphabet)
      throw ConfigError(measure_line, "row", "expected " + std::to_string(alphabet) + " stochastic rows");
    for (std::size_t i = 0; i < cfg.measure_rows.size(); ++i)
      if (static_cast<int>(cfg.measure_rows[i].size()) != alphabet)
        throw ConfigError(measure_line, "row", "stochastic row " + std::to_string(i + 1) + " has the wrong length");
  }
  try {
    if (cfg.measure_type == "explicit" || mixing_index(sft)) (void)cfg.measure();
  } catch (const Error& e) {
    throw ConfigError(measure_line, "row", e.what());
  }

  // field
  if (cfg.field_window) {
    ConformalField f(sft, *cfg.field_window);
    for (const auto& [ln, value] : field_lines) {
      TableEntry e = detail::parse_entry(value, cfg.dimension, cfg.field_window->width(), ln, "entry");
      if (!is_valid(sft, e.word)) throw ConfigError(ln, "entry", "[" + format_symbols(e.word) + "] is not a valid word");
      try {
        f.set(e.word, ConformalStructure::normalize(e.value));
      } catch (const Error& err) {
        throw ConfigError(ln, "entry", err.what());
      }
      cfg.field_entries.push_back(std::move(e));
    }
    const auto missing = f.missing();
    if (!missing.empty()) throw ConfigError(field_line, "entry", "field misses window words " + detail::join_words(missing));
  } else if (!field_lines.empty()) {
    throw ConfigError(field_line, "window", "missing field window");
  }

  // run: defaults, then light type checks
  for (const auto& [k, v] : run_defaults())
    if (!cfg.run.count(k)) cfg.run[k] = v;
  auto line_of = [&](const std::string& k) { return run_lines.count(k) ? run_lines[k] : 0; };
  for (const char* k : {"seed", "period_max", "n_max", "samples", "trials", "pairs", "threads", "k", "b", "c",
                        "birkhoff_n", "N"})
    if (cfg.run.count(k)) {
      const long v = detail::parse_long(cfg.run[k], line_of(k), k);
      if (v < (std::string(k) == "seed" ? 0 : 1)) throw ConfigError(line_of(k), k, "must be positive");
    }
  for (const char* k : {"theta", "eps", "tolerance"})
    if (cfg.run.count(k) && !(detail::parse_double(cfg.run[k], line_of(k), k) > 0.0))
      throw ConfigError(line_of(k), k, "must be positive");
  for (const char* k : {"m", "grid"})
    for (const auto& t : detail::split_ws(cfg.run[k]))
      if (detail::parse_long(t, line_of(k), k) < 1) throw ConfigError(line_of(k), k, "entries must be positive");
  for (const char* k : {"x", "y"})
    if (cfg.run.count(k)) {
      const SymbolString w = detail::parse_word(cfg.run[k], line_of(k), k);
      if (!is_valid_cycle(sft, w)) throw ConfigError(line_of(k), k, "not a valid cycle of the shift");
    }
  return cfg;
}

}  // namespace rigidity
