#pragma once

// Locally constant functions on the shift space: a value for every valid word
// over a fixed coordinate window [lo, hi].

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rigidity/errors.hpp"
#include "rigidity/sft.hpp"

namespace rigidity {

/// Coordinate window [lo, hi] with lo <= 0 <= hi.
struct Window {
  int lo = 0;
  int hi = 0;

  int width() const { return hi - lo + 1; }
  bool operator==(const Window&) const = default;
};

/// Largest table the dense encoding accepts.
inline constexpr std::size_t kMaxTableEntries = std::size_t{1} << 22;

template <class T>
class WindowTable {
 public:
  WindowTable(Sft sft, Window window) : sft_(std::move(sft)), window_(window) {
    require(window.lo <= 0 && window.hi >= 0, ErrorCode::InvalidArgument,
            "window must contain coordinate 0, got [" + std::to_string(window.lo) + ", " +
                std::to_string(window.hi) + "]");
    std::size_t n = 1;
    for (int i = 0; i < window.width(); ++i) {
      n *= sft_.alphabet_size();
      require(n <= kMaxTableEntries, ErrorCode::InvalidArgument, "window too wide for a dense table");
    }
    values_.resize(n);
    present_.assign(n, 0);
    words_ = valid_words(sft_, window.width());
  }

  /// Fill every valid word from `f(word)`.
  template <class F>
  static WindowTable build(const Sft& sft, Window window, F&& f) {
    WindowTable t(sft, window);
    for (const auto& w : t.words_) t.set(w, f(w));
    return t;
  }

  const Sft& sft() const { return sft_; }
  Window window() const { return window_; }
  const std::vector<SymbolString>& words() const { return words_; }

  std::size_t code(const Symbol* first) const {
    std::size_t c = 0;
    for (int i = 0; i < window_.width(); ++i) c = c * sft_.alphabet_size() + static_cast<std::size_t>(first[i]);
    return c;
  }

  void set(const SymbolString& word, T value) {
    require(static_cast<int>(word.size()) == window_.width() && is_valid(sft_, word), ErrorCode::InvalidWord,
            "table key [" + format_symbols(word) + "] is not a valid window word");
    const std::size_t c = code(word.data());
    values_[c] = std::move(value);
    present_[c] = 1;
  }

  bool contains(const SymbolString& word) const {
    return static_cast<int>(word.size()) == window_.width() && present_[code(word.data())] != 0;
  }

  /// Valid window words with no entry.
  std::vector<SymbolString> missing() const {
    std::vector<SymbolString> out;
    for (const auto& w : words_)
      if (!present_[code(w.data())]) out.push_back(w);
    return out;
  }

  bool complete() const { return missing().empty(); }

  const T& at(const SymbolString& word) const { return lookup(word.data()); }

  /// Entry for the window word starting at `first` (width symbols).
  const T& lookup(const Symbol* first) const {
    const std::size_t c = code(first);
    require(present_[c] != 0, ErrorCode::InvalidWord, "no table entry for window word");
    return values_[c];
  }

  /// Value at f^n(x), i.e. keyed by x_{n+lo} .. x_{n+hi}.
  const T& at(const SymbolicPoint& x, long n = 0) const {
    Symbol buf[64];
    std::vector<Symbol> heap;
    Symbol* p = buf;
    if (window_.width() > 64) {
      heap.resize(static_cast<std::size_t>(window_.width()));
      p = heap.data();
    }
    for (int i = 0; i < window_.width(); ++i) p[i] = x[n + window_.lo + i];
    return lookup(p);
  }

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<decltype(f(std::declval<const T&>()))>;
    WindowTable<U> out(sft_, window_);
    for (const auto& w : words_)
      if (contains(w)) out.set(w, f(at(w)));
    return out;
  }

 private:
  Sft sft_;
  Window window_;
  std::vector<T> values_;
  std::vector<char> present_;
  std::vector<SymbolString> words_;
};

/// Smallest window containing both.
inline Window window_union(Window a, Window b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

}  // namespace rigidity
