#pragma once

// Brute-force reference implementations for small inputs. Both enumerate
// every simple path explicitly; they share no code with the production
// Dijkstra / Brandes routines.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "roles.hpp"
#include "tracegraph.hpp"

namespace orgcoupling {

inline constexpr std::size_t kOracleMaxNodes = 12;
inline constexpr std::size_t kOracleMaxDevelopers = 8;

// Files reachable from `dev` along some simple path that avoids other
// developers and whose summed distance stays within theta.
inline std::set<std::string> oracle_reachability(const TraceGraph& g, const std::string& dev, double theta) {
  std::size_t non_dev = 0;
  for (const auto& n : g.nodes()) non_dev += n.kind != NodeKind::Developer;
  if (non_dev + 1 > kOracleMaxNodes) {
    throw Error(ErrorKind::GraphTooLarge, "oracle limited to " + std::to_string(kOracleMaxNodes) + " nodes");
  }
  std::set<std::string> out;
  const auto src = g.find_developer(dev);
  if (!src) return out;

  std::vector<char> visited(g.node_count(), 0);
  std::vector<double> best(g.node_count(), std::numeric_limits<double>::infinity());
  auto walk = [&](auto&& self, NodeId at, double dist) -> void {
    best[at] = std::min(best[at], dist);
    visited[at] = 1;
    for (const auto& nb : g.neighbors(at)) {
      if (visited[nb.node] || g.is_developer(nb.node)) continue;
      self(self, nb.node, dist + g.edges()[nb.edge].distance);
    }
    visited[at] = 0;
  };
  walk(walk, *src, 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    if (g.node(i).kind == NodeKind::File && best[i] <= theta + kDistanceSlack) out.insert(g.node(i).key());
  }
  return out;
}

// Normalized weighted betweenness: for every unordered pair, list all simple
// paths, keep those tied with the minimum length, and credit each interior
// developer with its share of them.
inline std::vector<double> oracle_betweenness(const DevProjection& p) {
  const std::size_t n = p.size();
  if (n > kOracleMaxDevelopers) {
    throw Error(ErrorKind::GraphTooLarge, "oracle limited to " + std::to_string(kOracleMaxDevelopers) + " developers");
  }
  std::vector<double> score(n, 0.0);
  if (n < 3) return score;
  const double none = -1.0;
  std::vector<std::vector<double>> w(n, std::vector<double>(n, none));
  for (const auto& e : p.edges) w[e.u][e.v] = w[e.v][e.u] = e.rsrd;

  struct Path {
    double length;
    std::vector<std::size_t> nodes;
  };
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      std::vector<Path> paths;
      std::vector<std::size_t> trail{s};
      std::vector<char> used(n, 0);
      used[s] = 1;
      auto walk = [&](auto&& self, std::size_t at, double len) -> void {
        if (at == t) {
          paths.push_back({len, trail});
          return;
        }
        for (std::size_t nx = 0; nx < n; ++nx) {
          if (used[nx] || w[at][nx] == none) continue;
          used[nx] = 1;
          trail.push_back(nx);
          self(self, nx, len + w[at][nx]);
          trail.pop_back();
          used[nx] = 0;
        }
      };
      walk(walk, s, 0.0);
      if (paths.empty()) continue;
      double shortest = std::numeric_limits<double>::infinity();
      for (const auto& q : paths) shortest = std::min(shortest, q.length);
      const double tol = kPathTieTolerance * std::max(1.0, shortest);
      std::vector<const Path*> tied;
      for (const auto& q : paths) {
        if (q.length - shortest <= tol) tied.push_back(&q);
      }
      for (std::size_t v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        std::size_t through = 0;
        for (const auto* q : tied) through += std::count(q->nodes.begin(), q->nodes.end(), v);
        score[v] += static_cast<double>(through) / static_cast<double>(tied.size());
      }
    }
  }
  const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0;
  for (auto& x : score) x /= pairs;
  return score;
}

}  // namespace orgcoupling
