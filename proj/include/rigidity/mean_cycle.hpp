#pragma once

// Maximum mean cycle (Karp) and maximal walk excess on small weighted digraphs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rigidity/errors.hpp"

namespace rigidity {

struct WeightedEdge {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

class WeightedDigraph {
 public:
  explicit WeightedDigraph(int vertices) : n_(vertices) {}

  int vertices() const { return n_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  void add_edge(int from, int to, double weight) { edges_.push_back({from, to, weight}); }

  WeightedDigraph reversed() const {
    WeightedDigraph r(n_);
    for (const auto& e : edges_) r.add_edge(e.to, e.from, e.weight);
    return r;
  }

  /// Keep only the heaviest of parallel edges.
  void collapse_parallel() {
    std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
      if (a.from != b.from) return a.from < b.from;
      if (a.to != b.to) return a.to < b.to;
      return a.weight > b.weight;
    });
    edges_.erase(std::unique(edges_.begin(), edges_.end(),
                             [](const WeightedEdge& a, const WeightedEdge& b) {
                               return a.from == b.from && a.to == b.to;
                             }),
                 edges_.end());
  }

 private:
  int n_;
  std::vector<WeightedEdge> edges_;
};

/// Karp's theorem with D_0 = 0 at every vertex:
///   max mean = max_v min_k (D_n(v) - D_k(v)) / (n - k),
/// where D_k(v) is the heaviest walk of exactly k edges ending at v.
/// nullopt when the graph has no cycle.
inline std::optional<double> max_mean_cycle(const WeightedDigraph& g) {
  const int n = g.vertices();
  if (n == 0) return std::nullopt;
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist(static_cast<std::size_t>(n) + 1, std::vector<double>(n, ninf));
  std::fill(dist[0].begin(), dist[0].end(), 0.0);
  for (int k = 1; k <= n; ++k)
    for (const auto& e : g.edges())
      if (dist[k - 1][e.from] != ninf) dist[k][e.to] = std::max(dist[k][e.to], dist[k - 1][e.from] + e.weight);
  std::optional<double> best;
  for (int v = 0; v < n; ++v) {
    if (dist[n][v] == ninf) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k)
      if (dist[k][v] != ninf) worst = std::min(worst, (dist[n][v] - dist[k][v]) / (n - k));
    if (!best || worst > *best) best = worst;
  }
  return best;
}

/// sup over finite walks of sum(w - mean). Finite exactly when mean is at
/// least the maximum cycle mean; nullopt when a positive cycle remains
/// (Bellman-Ford still relaxing after n rounds).
inline std::optional<double> max_walk_excess(const WeightedDigraph& g, double mean, double slack = 1e-12) {
  const int n = g.vertices();
  std::vector<double> best(static_cast<std::size_t>(n), 0.0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (const auto& e : g.edges()) {
      const double cand = best[e.from] + e.weight - mean;
      if (cand > best[e.to] + slack * std::max(1.0, std::abs(best[e.to]))) {
        best[e.to] = cand;
        changed = true;
      }
    }
    if (!changed) return *std::max_element(best.begin(), best.end());
  }
  return std::nullopt;
}

}  // namespace rigidity
