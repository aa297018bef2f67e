#pragma once

// Subshift-of-finite-type combinatorics: the shift space, words, eventually
// periodic points, the metric rho_tau, cylinders, the local product bracket,
// periodic points, connecting words and the mixing index.
//
// Symbols are 0-based internally. Text forms (to_string, config files) use
// 1-based symbols.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/linalg.hpp"

namespace rigidity {

using Symbol = int;
using SymbolString = std::vector<Symbol>;

inline long floor_mod(long a, long m) {
  const long r = a % m;
  return r < 0 ? r + m : r;
}

class Sft {
 public:
  /// `rows` is the 0/1 transition matrix Q; rows[i][j] == 1 allows i -> j.
  explicit Sft(const std::vector<std::vector<int>>& rows, double tau = 1.0) : tau_(tau) {
    require(!rows.empty(), ErrorCode::InvalidSft, "empty transition matrix");
    size_ = rows.size();
    q_.assign(size_ * size_, 0);
    for (std::size_t i = 0; i < size_; ++i) {
      require(rows[i].size() == size_, ErrorCode::InvalidSft,
              "transition row " + std::to_string(i + 1) + " has wrong length");
      for (std::size_t j = 0; j < size_; ++j) {
        const int v = rows[i][j];
        require(v == 0 || v == 1, ErrorCode::InvalidSft, "transition entries must be 0 or 1");
        q_[i * size_ + j] = static_cast<std::uint8_t>(v);
      }
    }
    for (std::size_t i = 0; i < size_; ++i) {
      bool row = false, col = false;
      for (std::size_t j = 0; j < size_; ++j) {
        row = row || q_[i * size_ + j];
        col = col || q_[j * size_ + i];
      }
      require(row && col, ErrorCode::InvalidSft, "symbol " + std::to_string(i + 1) + " is stranded");
    }
    require(tau > 0.0 && std::isfinite(tau), ErrorCode::InvalidSft, "tau must be positive");
  }

  static Sft full_shift(std::size_t symbols, double tau = 1.0) {
    return Sft(std::vector<std::vector<int>>(symbols, std::vector<int>(symbols, 1)), tau);
  }
  static Sft golden_mean(double tau = 1.0) { return Sft({{1, 1}, {1, 0}}, tau); }

  std::size_t alphabet_size() const { return size_; }
  double tau() const { return tau_; }
  bool allowed(Symbol a, Symbol b) const { return q_[static_cast<std::size_t>(a) * size_ + b] != 0; }
  bool has_symbol(Symbol s) const { return s >= 0 && static_cast<std::size_t>(s) < size_; }

  std::vector<std::vector<int>> rows() const {
    std::vector<std::vector<int>> out(size_, std::vector<int>(size_));
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t j = 0; j < size_; ++j) out[i][j] = q_[i * size_ + j];
    return out;
  }

  Eigen::MatrixXd transition_matrix() const {
    Eigen::MatrixXd q(size_, size_);
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t j = 0; j < size_; ++j) q(i, j) = q_[i * size_ + j];
    return q;
  }

  Sft with_tau(double tau) const { return Sft(rows(), tau); }

  friend bool operator==(const Sft& a, const Sft& b) { return a.q_ == b.q_ && a.tau_ == b.tau_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint8_t> q_;
  double tau_ = 1.0;
};

/// Finite word placed at coordinates [start_index, start_index + size).
struct Word {
  SymbolString symbols;
  long start_index = 0;

  std::size_t size() const { return symbols.size(); }
  long end_index() const { return start_index + static_cast<long>(symbols.size()); }
  friend bool operator==(const Word&, const Word&) = default;
};

inline bool is_valid(const Sft& sft, const SymbolString& w) {
  for (Symbol s : w)
    if (!sft.has_symbol(s)) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!sft.allowed(w[i], w[i + 1])) return false;
  return true;
}

inline bool is_valid(const Sft& sft, const Word& w) { return is_valid(sft, w.symbols); }

/// Valid cyclic word: valid and closing transition allowed.
inline bool is_valid_cycle(const Sft& sft, const SymbolString& w) {
  return !w.empty() && is_valid(sft, w) && sft.allowed(w.back(), w.front());
}

inline std::string format_symbols(const SymbolString& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(w[i] + 1);
  }
  return out;
}

namespace detail {

inline SymbolString primitive_root(const SymbolString& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return SymbolString(w.begin(), w.begin() + static_cast<long>(p));
  }
  return w;
}

}  // namespace detail

/// An eventually periodic point of the full sequence space:
///   ... L L L [core] R R R ...
/// The left cycle L occupies coordinates [core_start - |L|, core_start) and
/// repeats toward -infinity; the right cycle R starts at core_end and repeats
/// toward +infinity.
///
/// Canonical form: cycles are primitive; the left-periodic tail is pushed as
/// far right and the right-periodic tail as far left as the sequence allows,
/// which makes the core minimal and fixes the cycle phases. A purely periodic
/// point has an empty core, L == R, and the boundary placed at the unique
/// b in [0, period) where the cycle read from x_b is the lexicographically
/// least rotation.
class SymbolicPoint {
 public:
  SymbolicPoint(SymbolString left_cycle, SymbolString core, SymbolString right_cycle, long core_start)
      : left_(std::move(left_cycle)), core_(std::move(core)), right_(std::move(right_cycle)), start_(core_start) {
    require(!left_.empty() && !right_.empty(), ErrorCode::InvalidWord, "point cycles must be nonempty");
    canonicalize();
  }

  /// The periodic point with x_{phase + i} = cycle[i mod |cycle|].
  static SymbolicPoint periodic(const SymbolString& cycle, long phase = 0) {
    return SymbolicPoint(cycle, {}, cycle, phase);
  }
  static SymbolicPoint fixed(Symbol s) { return periodic({s}); }

  Symbol operator[](long n) const {
    if (n < start_) return left_[floor_mod(n - start_, static_cast<long>(left_.size()))];
    if (n < core_end()) return core_[static_cast<std::size_t>(n - start_)];
    return right_[floor_mod(n - core_end(), static_cast<long>(right_.size()))];
  }

  const SymbolString& left_cycle() const { return left_; }
  const SymbolString& core() const { return core_; }
  const SymbolString& right_cycle() const { return right_; }
  long core_start() const { return start_; }
  long core_end() const { return start_ + static_cast<long>(core_.size()); }

  bool is_periodic() const { return periodic_; }
  /// Minimal period; only meaningful for periodic points.
  long period() const { return static_cast<long>(right_.size()); }

  /// Coordinates [from, to) as a Word.
  Word window(long from, long to) const {
    Word w{{}, from};
    w.symbols.reserve(static_cast<std::size_t>(std::max(0L, to - from)));
    for (long n = from; n < to; ++n) w.symbols.push_back((*this)[n]);
    return w;
  }

  bool is_valid(const Sft& sft) const {
    auto check = [&](const SymbolString& w) { return rigidity::is_valid(sft, w); };
    if (!check(left_) || !check(core_) || !check(right_)) return false;
    if (!sft.allowed(left_.back(), left_.front()) || !sft.allowed(right_.back(), right_.front())) return false;
    const Symbol before = left_.back();
    const Symbol after = right_.front();
    if (core_.empty()) return sft.allowed(before, after);
    return sft.allowed(before, core_.front()) && sft.allowed(core_.back(), after);
  }

  /// Outermost coordinate radius beyond which both tails are in their cycles.
  long tail_radius() const { return std::max(std::labs(start_), std::labs(core_end())) + 1; }

  std::string to_string() const {
    std::ostringstream os;
    if (periodic_) {
      os << "(" << format_symbols(right_) << ")^inf@" << start_;
      return os.str();
    }
    os << "(" << format_symbols(left_) << ")^inf [" << format_symbols(core_) << "] (" << format_symbols(right_)
       << ")^inf@" << start_;
    return os.str();
  }

  friend bool operator==(const SymbolicPoint& a, const SymbolicPoint& b) {
    return a.start_ == b.start_ && a.left_ == b.left_ && a.core_ == b.core_ && a.right_ == b.right_;
  }

 private:
  void canonicalize() {
    left_ = detail::primitive_root(left_);
    right_ = detail::primitive_root(right_);
    const long p = static_cast<long>(left_.size());
    const long q = static_cast<long>(right_.size());
    const long end = core_end();
    auto raw = [&](long n) { return (*this)[n]; };
    auto left_ext = [&](long n) { return left_[floor_mod(n - start_, p)]; };
    auto right_ext = [&](long n) { return right_[floor_mod(n - end, q)]; };

    const long span = lcm_long(p, q);
    long n = start_;
    const long limit = end + span;
    while (n < limit && raw(n) == left_ext(n)) ++n;
    if (n >= limit) {
      // Left tail continues through the right tail: purely periodic.
      SymbolString cycle(static_cast<std::size_t>(q));
      for (long i = 0; i < q; ++i) cycle[static_cast<std::size_t>(i)] = raw(end + i);
      long best = 0;
      for (long r = 1; r < q; ++r) {
        bool less = false;
        for (long i = 0; i < q; ++i) {
          const Symbol a = cycle[static_cast<std::size_t>((r + i) % q)];
          const Symbol b = cycle[static_cast<std::size_t>((best + i) % q)];
          if (a != b) {
            less = a < b;
            break;
          }
        }
        if (less) best = r;
      }
      const long b = floor_mod(end + best, q);
      SymbolString rotated(static_cast<std::size_t>(q));
      for (long i = 0; i < q; ++i) rotated[static_cast<std::size_t>(i)] = raw(b + i);
      left_ = rotated;
      right_ = rotated;
      core_.clear();
      start_ = b;
      periodic_ = true;
      return;
    }
    const long last_left = n - 1;
    long m = end - 1;
    const long lower = start_ - span - 1;
    while (m > lower && raw(m) == right_ext(m)) --m;
    const long first_right = std::max(m + 1, last_left + 1);

    SymbolString new_left(static_cast<std::size_t>(p));
    for (long i = 0; i < p; ++i) new_left[static_cast<std::size_t>(i)] = raw(last_left - p + 1 + i);
    SymbolString new_core;
    for (long i = last_left + 1; i < first_right; ++i) new_core.push_back(raw(i));
    SymbolString new_right(static_cast<std::size_t>(q));
    for (long i = 0; i < q; ++i) new_right[static_cast<std::size_t>(i)] = raw(first_right + i);
    left_ = std::move(new_left);
    core_ = std::move(new_core);
    right_ = std::move(new_right);
    start_ = last_left + 1;
    periodic_ = false;
  }

  SymbolString left_, core_, right_;
  long start_ = 0;
  bool periodic_ = false;
};

inline void require_valid(const Sft& sft, const SymbolicPoint& x) {
  require(x.is_valid(sft), ErrorCode::InvalidWord, "point " + x.to_string() + " is not admissible");
}

/// f^n(x): coordinates satisfy shift(x, n)_j = x_{j+n}.
inline SymbolicPoint shift(const SymbolicPoint& x, long n) {
  return SymbolicPoint(x.left_cycle(), x.core(), x.right_cycle(), x.core_start() - n);
}

namespace detail {

/// Radius past which two points are both inside their periodic tails and any
/// agreement persists forever.
inline long agreement_bound(const SymbolicPoint& x, const SymbolicPoint& y) {
  const long lt = lcm_long(static_cast<long>(x.left_cycle().size()), static_cast<long>(y.left_cycle().size()));
  const long rt = lcm_long(static_cast<long>(x.right_cycle().size()), static_cast<long>(y.right_cycle().size()));
  return std::max(x.tail_radius(), y.tail_radius()) + std::max(lt, rt) + 1;
}

}  // namespace detail

/// N(x, y) = max{N >= 0 : x_n = y_n for |n| < N}; nullopt when x == y.
inline std::optional<long> agreement_radius(const SymbolicPoint& x, const SymbolicPoint& y) {
  if (x == y) return std::nullopt;
  const long bound = detail::agreement_bound(x, y);
  for (long m = 0; m <= bound; ++m) {
    if (x[m] != y[m] || x[-m] != y[-m]) return m;
  }
  throw Error(ErrorCode::Internal, "distinct points agree past their tail bound");
}

/// rho_tau(x, y) = exp(-tau N(x, y)), and 0 when x == y.
inline double rho_distance(const Sft& sft, const SymbolicPoint& x, const SymbolicPoint& y) {
  const auto n = agreement_radius(x, y);
  if (!n) return 0.0;
  return std::exp(-sft.tau() * static_cast<double>(*n));
}

/// True when x_n == y_n for every n >= from.
inline bool agree_forward(const SymbolicPoint& x, const SymbolicPoint& y, long from) {
  const long bound = detail::agreement_bound(x, y) + std::labs(from);
  for (long n = from; n <= bound; ++n)
    if (x[n] != y[n]) return false;
  return true;
}

/// True when x_n == y_n for every n <= to.
inline bool agree_backward(const SymbolicPoint& x, const SymbolicPoint& y, long to) {
  const long bound = detail::agreement_bound(x, y) + std::labs(to);
  for (long n = to; n >= -bound; --n)
    if (x[n] != y[n]) return false;
  return true;
}

/// z in W^s_loc(y): agreement on coordinates >= 0.
inline bool in_local_stable_set(const SymbolicPoint& y, const SymbolicPoint& z) { return agree_forward(y, z, 0); }
/// z in W^u_loc(y): agreement on coordinates <= 0.
inline bool in_local_unstable_set(const SymbolicPoint& y, const SymbolicPoint& z) {
  return agree_backward(y, z, 0);
}

/// The point [x, y] of W^u_loc(x) and W^s_loc(y): x's coordinates n <= 0 and
/// y's coordinates n >= 0.
inline SymbolicPoint bracket(const SymbolicPoint& x, const SymbolicPoint& y) {
  require(x[0] == y[0], ErrorCode::MismatchedCylinder,
          "bracket needs x_0 == y_0, got " + std::to_string(x[0] + 1) + " and " + std::to_string(y[0] + 1));
  const long a = std::min(x.core_start(), 0L);
  const long b = std::max(y.core_end(), 1L);
  const long p = static_cast<long>(x.left_cycle().size());
  const long q = static_cast<long>(y.right_cycle().size());
  SymbolString left, core, right;
  for (long i = a - p; i < a; ++i) left.push_back(x[i]);
  for (long i = a; i <= 0; ++i) core.push_back(x[i]);
  for (long i = 1; i < b; ++i) core.push_back(y[i]);
  for (long i = b; i < b + q; ++i) right.push_back(y[i]);
  return SymbolicPoint(std::move(left), std::move(core), std::move(right), a);
}

/// All valid words of the given length, in lexicographic order.
inline std::vector<SymbolString> valid_words(const Sft& sft, int length) {
  std::vector<SymbolString> out;
  if (length <= 0) {
    out.emplace_back();
    return out;
  }
  const int l = static_cast<int>(sft.alphabet_size());
  SymbolString w;
  w.reserve(static_cast<std::size_t>(length));
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(w.size()) == length) {
      out.push_back(w);
      return;
    }
    for (Symbol s = 0; s < l; ++s) {
      if (!w.empty() && !sft.allowed(w.back(), s)) continue;
      w.push_back(s);
      self(self);
      w.pop_back();
    }
  };
  rec(rec);
  return out;
}

/// All x with f^k(x) = x, one per valid cyclic word x_0..x_{k-1}, in
/// lexicographic order of that word. The count equals trace(Q^k).
inline std::vector<SymbolicPoint> enumerate_periodic(const Sft& sft, int k) {
  require(k >= 1, ErrorCode::InvalidArgument, "period must be positive");
  std::vector<SymbolicPoint> out;
  for (const auto& w : valid_words(sft, k))
    if (sft.allowed(w.back(), w.front())) out.push_back(SymbolicPoint::periodic(w, 0));
  return out;
}

/// The cyclic word x_0..x_{k-1} of a point with f^k(x) = x.
inline SymbolString cycle_word(const SymbolicPoint& x, long k) { return x.window(0, k).symbols; }

inline bool has_period(const SymbolicPoint& x, long k) {
  return k >= 1 && x.is_periodic() && k % x.period() == 0;
}

/// Lexicographically least path w_0 = a, ..., w_n = b.
inline Word connecting_word(const Sft& sft, Symbol a, Symbol b, int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "connecting word length must be positive");
  require(sft.has_symbol(a) && sft.has_symbol(b), ErrorCode::InvalidArgument, "unknown symbol");
  const int l = static_cast<int>(sft.alphabet_size());
  // reach[t][s]: b reachable from s in exactly t steps
  std::vector<std::vector<char>> reach(static_cast<std::size_t>(n) + 1, std::vector<char>(l, 0));
  reach[0][b] = 1;
  for (int t = 1; t <= n; ++t)
    for (Symbol s = 0; s < l; ++s)
      for (Symbol u = 0; u < l && !reach[t][s]; ++u)
        if (sft.allowed(s, u) && reach[t - 1][u]) reach[t][s] = 1;
  if (!reach[n][a])
    throw Error(ErrorCode::NoPath, "no word of length " + std::to_string(n) + " from " + std::to_string(a + 1) +
                                       " to " + std::to_string(b + 1));
  Word w{{a}, 0};
  Symbol cur = a;
  for (int t = n - 1; t >= 0; --t) {
    for (Symbol u = 0; u < l; ++u) {
      if (sft.allowed(cur, u) && reach[t][u]) {
        cur = u;
        break;
      }
    }
    w.symbols.push_back(cur);
  }
  return w;
}

/// Smallest M with Q^M entrywise positive, searched up to the Wielandt-type
/// cutoff l^2; nullopt when the shift is not mixing.
inline std::optional<int> mixing_index(const Sft& sft) {
  const std::size_t l = sft.alphabet_size();
  std::vector<char> power(l * l), next(l * l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) power[i * l + j] = sft.allowed(static_cast<Symbol>(i), static_cast<Symbol>(j));
  const int cutoff = static_cast<int>(l * l);
  for (int m = 1; m <= cutoff; ++m) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return m;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        char v = 0;
        for (std::size_t k = 0; k < l && !v; ++k) v = power[i * l + k] && sft.allowed(static_cast<Symbol>(k), static_cast<Symbol>(j));
        next[i * l + j] = v;
      }
    power.swap(next);
  }
  return std::nullopt;
}

/// A valid point containing `word` at its start_index. Both tails are closed
/// off by following least predecessors/successors until a symbol repeats.
inline SymbolicPoint extend_to_point(const Sft& sft, const Word& word) {
  require(!word.symbols.empty() && is_valid(sft, word), ErrorCode::InvalidWord, "cannot extend an invalid word");
  const int l = static_cast<int>(sft.alphabet_size());
  auto walk = [&](Symbol first, bool backward) {
    SymbolString chain{first};
    for (;;) {
      Symbol next = -1;
      for (Symbol s = 0; s < l && next < 0; ++s)
        if (backward ? sft.allowed(s, chain.back()) : sft.allowed(chain.back(), s)) next = s;
      auto it = std::find(chain.begin(), chain.end(), next);
      if (it != chain.end()) return std::make_pair(chain, static_cast<std::size_t>(it - chain.begin()));
      chain.push_back(next);
    }
  };
  // back[i] sits at start_index - i; beyond the chain it cycles through back[from..].
  const auto [back, bfrom] = walk(word.symbols.front(), true);
  const auto [fwd, ffrom] = walk(word.symbols.back(), false);
  SymbolString left, core, right;
  for (std::size_t i = back.size(); i-- > bfrom;) left.push_back(back[i]);
  for (std::size_t i = back.size(); i-- > 1;) core.push_back(back[i]);
  core.insert(core.end(), word.symbols.begin(), word.symbols.end());
  for (std::size_t i = 1; i < fwd.size(); ++i) core.push_back(fwd[i]);
  right.assign(fwd.begin() + static_cast<long>(ffrom), fwd.end());
  const long core_start = word.start_index - static_cast<long>(back.size()) + 1;
  SymbolicPoint x(std::move(left), std::move(core), std::move(right), core_start);
  require(x.is_valid(sft), ErrorCode::Internal, "extension produced an invalid point");
  return x;
}

}  // namespace rigidity
