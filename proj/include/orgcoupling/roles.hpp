#pragma once

// Jack (file coverage), Maven (mavenness) and Connector (projection
// betweenness) scores, and the Role Stacking Index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "tracegraph.hpp"
#include "window.hpp"

namespace orgcoupling {

// Absolute slack applied to every "distance <= theta" test so that sums which
// equal theta analytically are not lost to rounding.
inline constexpr double kDistanceSlack = 1e-9;

// Relative tolerance under which two projection path lengths count as equal.
inline constexpr double kPathTieTolerance = 1e-9;

struct ReachabilitySet {
  std::string developer;
  std::vector<NodeId> files;  // sorted node ids
  double theta = 0.0;

  bool contains(NodeId f) const { return std::binary_search(files.begin(), files.end(), f); }
  std::size_t size() const { return files.size(); }
};

inline NodeId require_developer(const TraceGraph& g, const std::string& dev) {
  auto n = g.find_developer(dev);
  if (!n) throw Error(ErrorKind::UnknownDeveloper, "'" + dev + "' has no node in window " + std::to_string(g.window().index));
  return *n;
}

// Shortest admissible distances from `source`: other developer nodes are
// never entered. Files with distance <= theta are reachable.
inline ReachabilitySet reachable_files(const TraceGraph& g, NodeId source, double theta) {
  ReachabilitySet out{g.node(source).id, {}, theta};
  const double limit = theta + kDistanceSlack;
  std::vector<double> dist(g.node_count(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, n] = pq.top();
    pq.pop();
    if (d > dist[n]) continue;
    if (g.node(n).kind == NodeKind::File) out.files.push_back(n);
    for (const auto& nb : g.neighbors(n)) {
      if (g.is_developer(nb.node)) continue;
      const double nd = d + g.edges()[nb.edge].distance;
      if (nd <= limit && nd < dist[nb.node]) {
        dist[nb.node] = nd;
        pq.push({nd, nb.node});
      }
    }
  }
  std::sort(out.files.begin(), out.files.end());
  return out;
}

inline ReachabilitySet reachable_files(const TraceGraph& g, const std::string& dev, double theta) {
  return reachable_files(g, require_developer(g, dev), theta);
}

inline double coverage_ratio(std::size_t reachable, std::size_t all_files) {
  if (all_files == 0) throw Error(ErrorKind::EmptyProject, "window has no files");
  return static_cast<double>(reachable) / static_cast<double>(all_files);
}

inline double coverage(const TraceGraph& g, const std::string& dev, double theta) {
  const auto files = g.files().size();
  if (files == 0) throw Error(ErrorKind::EmptyProject, "window has no files");
  return coverage_ratio(reachable_files(g, dev, theta).size(), files);
}

// Reachability of every developer in the window, plus per-file reach counts.
class ReachIndex {
 public:
  ReachIndex(const TraceGraph& g, double theta) : developers_(g.developers()), reached_by_(g.node_count(), 0) {
    sets_.reserve(developers_.size());
    for (NodeId d : developers_) {
      sets_.push_back(reachable_files(g, d, theta));
      for (NodeId f : sets_.back().files) ++reached_by_[f];
    }
    file_count_ = g.files().size();
  }

  const std::vector<NodeId>& developers() const { return developers_; }
  const ReachabilitySet& set(std::size_t i) const { return sets_[i]; }
  std::size_t reached_by(NodeId file) const { return reached_by_[file]; }
  std::size_t file_count() const { return file_count_; }

  // Files with 1 <= |R_f| <= k.
  std::vector<NodeId> rare_files(int k) const {
    std::vector<NodeId> out;
    for (NodeId n = 0; n < reached_by_.size(); ++n) {
      if (reached_by_[n] >= 1 && reached_by_[n] <= static_cast<std::size_t>(k)) out.push_back(n);
    }
    return out;
  }

  std::size_t rare_reach(std::size_t i, int k) const {
    std::size_t c = 0;
    for (NodeId f : sets_[i].files) {
      if (reached_by_[f] <= static_cast<std::size_t>(k)) ++c;
    }
    return c;
  }

 private:
  std::vector<NodeId> developers_;
  std::vector<ReachabilitySet> sets_;
  std::vector<std::size_t> reached_by_;
  std::size_t file_count_ = 0;
};

inline std::vector<NodeId> rare_files(const TraceGraph& g, double theta, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "rare_k must be >= 1");
  return ReachIndex(g, theta).rare_files(k);
}

// Share of the window's rare files the developer reaches; 0 when there are
// no rare files at all.
inline double mavenness(const TraceGraph& g, const std::string& dev, double theta, int k) {
  const NodeId d = require_developer(g, dev);
  ReachIndex idx(g, theta);
  const auto rare = idx.rare_files(k);
  if (rare.empty()) return 0.0;
  const auto pos = std::lower_bound(idx.developers().begin(), idx.developers().end(), d,
                                    [&](NodeId a, NodeId b) { return g.node(a).id < g.node(b).id; }) -
                   idx.developers().begin();
  return static_cast<double>(idx.rare_reach(static_cast<std::size_t>(pos), k)) / static_cast<double>(rare.size());
}

// ---------------------------------------------------------------------------
// Developer projection

struct ProjectionEdge {
  std::size_t u;  // index into DevProjection::developers, u < v
  std::size_t v;
  double rsrd;
  std::uint64_t paths;  // paths aggregated (after the cap)
};

struct DevProjection {
  std::vector<std::string> developers;  // sorted ids
  std::vector<ProjectionEdge> edges;    // sorted by (u, v)
  std::size_t capped_pairs = 0;

  std::size_t size() const { return developers.size(); }

  std::optional<double> rsrd(const std::string& a, const std::string& b) const {
    auto ia = std::lower_bound(developers.begin(), developers.end(), a);
    auto ib = std::lower_bound(developers.begin(), developers.end(), b);
    if (ia == developers.end() || *ia != a || ib == developers.end() || *ib != b) return std::nullopt;
    auto u = static_cast<std::size_t>(ia - developers.begin());
    auto v = static_cast<std::size_t>(ib - developers.begin());
    if (u > v) std::swap(u, v);
    for (const auto& e : edges) {
      if (e.u == u && e.v == v) return e.rsrd;
    }
    return std::nullopt;
  }
};

// Aggregates a multiset of hop counts, given as counts per length, into
// (sum 1/len)^-1 using at most `cap` of the shortest paths.
inline std::pair<double, std::uint64_t> aggregate_rsrd(const std::vector<std::uint64_t>& count_by_len, std::size_t cap,
                                                       bool* capped = nullptr) {
  double inv = 0.0;
  std::uint64_t used = 0;
  for (std::size_t len = 1; len < count_by_len.size(); ++len) {
    if (count_by_len[len] == 0) continue;
    const std::uint64_t take = std::min<std::uint64_t>(count_by_len[len], cap - used);
    inv += static_cast<double>(take) / static_cast<double>(len);
    used += take;
    if (used == cap) {
      if (capped) {
        std::uint64_t total = 0;
        for (auto c : count_by_len) total += c;
        *capped = total > cap;
      }
      break;
    }
  }
  return {used == 0 ? 0.0 : 1.0 / inv, used};
}

// Enumerates simple paths of at most `max_hops` unit-length edges between
// developer pairs without passing through a third developer node.
inline DevProjection developer_projection(const TraceGraph& g, int max_hops, std::size_t path_cap = 10000) {
  if (max_hops < 2) throw Error(ErrorKind::InvalidConfig, "max_hops must be >= 2");
  DevProjection proj;
  const auto devs = g.developers();
  std::vector<std::size_t> dev_index(g.node_count(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < devs.size(); ++i) {
    proj.developers.push_back(g.node(devs[i]).id);
    dev_index[devs[i]] = i;
  }

  const std::size_t hops = static_cast<std::size_t>(max_hops);
  std::vector<char> on_path(g.node_count(), 0);
  // counts[target] = paths by hop length from the current source
  std::vector<std::vector<std::uint64_t>> counts(devs.size());

  for (std::size_t s = 0; s < devs.size(); ++s) {
    for (auto& c : counts) c.assign(hops + 1, 0);
    const NodeId source = devs[s];
    on_path[source] = 1;
    // Iterative DFS: frame = (node, next neighbor position, depth).
    struct Frame {
      NodeId node;
      std::size_t next;
      std::size_t depth;
    };
    std::vector<Frame> stack{{source, 0, 0}};
    while (!stack.empty()) {
      auto& top = stack.back();
      const auto& nbs = g.neighbors(top.node);
      if (top.depth == hops || top.next == nbs.size()) {
        on_path[top.node] = 0;
        stack.pop_back();
        continue;
      }
      const NodeId nxt = nbs[top.next++].node;
      if (on_path[nxt]) continue;
      const std::size_t depth = top.depth + 1;
      if (g.is_developer(nxt)) {
        const auto t = dev_index[nxt];
        if (t > s) ++counts[t][depth];
        continue;
      }
      on_path[nxt] = 1;
      stack.push_back({nxt, 0, depth});
    }
    on_path[source] = 0;
    for (std::size_t t = s + 1; t < devs.size(); ++t) {
      bool capped = false;
      auto [rsrd, used] = aggregate_rsrd(counts[t], path_cap, &capped);
      if (used == 0) continue;
      if (capped) ++proj.capped_pairs;
      proj.edges.push_back({s, t, rsrd, used});
    }
  }
  return proj;
}

// ---------------------------------------------------------------------------
// Weighted betweenness (Brandes) on the projection, rsrd as edge length.

inline std::vector<double> connector_centrality(const DevProjection& p) {
  const std::size_t n = p.size();
  std::vector<double> cb(n, 0.0);
  if (n < 3) return cb;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : p.edges) {
    adj[e.u].push_back({e.v, e.rsrd});
    adj[e.v].push_back({e.u, e.rsrd});
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n), sigma(n), delta(n);
  std::vector<std::vector<std::size_t>> pred(n);
  std::vector<std::size_t> settled;
  std::vector<char> done(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(done.begin(), done.end(), 0);
    for (auto& pr : pred) pr.clear();
    settled.clear();
    dist[s] = 0.0;
    sigma[s] = 1.0;
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (done[v] || d > dist[v]) continue;
      done[v] = 1;
      settled.push_back(v);
      for (auto [w, len] : adj[v]) {
        if (done[w]) continue;
        const double nd = d + len;
        const double tol = kPathTieTolerance * std::max(1.0, nd);
        if (nd < dist[w] - tol) {
          dist[w] = nd;
          sigma[w] = sigma[v];
          pred[w].assign(1, v);
          pq.push({nd, w});
        } else if (std::abs(nd - dist[w]) <= tol) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = settled.rbegin(); it != settled.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (auto& c : cb) c /= norm;
  return cb;
}

// ---------------------------------------------------------------------------
// Scores

struct RoleScores {
  std::string developer;
  int window = 0;
  double coverage = 0.0;
  double mavenness = 0.0;
  double betweenness = 0.0;
  double j_norm = 0.0;
  double m_norm = 0.0;
  double c_norm = 0.0;
  double rsi = 0.0;
};

inline double rsi(double j_norm, double m_norm, double c_norm) {
  return std::cbrt(j_norm * m_norm * c_norm);
}

// Divides each score vector by its window maximum; all-zero vectors stay
// zero. Recomputes RSI from the normalized values.
inline void normalize_role_scores(std::vector<RoleScores>& scores) {
  double jm = 0.0, mm = 0.0, cm = 0.0;
  for (const auto& s : scores) {
    jm = std::max(jm, s.coverage);
    mm = std::max(mm, s.mavenness);
    cm = std::max(cm, s.betweenness);
  }
  for (auto& s : scores) {
    s.j_norm = jm > 0.0 ? s.coverage / jm : 0.0;
    s.m_norm = mm > 0.0 ? s.mavenness / mm : 0.0;
    s.c_norm = cm > 0.0 ? s.betweenness / cm : 0.0;
    s.rsi = rsi(s.j_norm, s.m_norm, s.c_norm);
  }
}

struct RoleAnalysis {
  std::vector<RoleScores> scores;  // sorted by developer id
  std::size_t capped_pairs = 0;
  std::size_t rare_files = 0;
};

// All three raw scores for every developer node in the graph, normalized.
inline RoleAnalysis compute_roles(const TraceGraph& g, const AnalysisConfig& cfg) {
  RoleAnalysis out;
  const ReachIndex idx(g, cfg.theta);
  const auto rare = idx.rare_files(cfg.rare_k);
  out.rare_files = rare.size();
  const auto proj = developer_projection(g, cfg.max_hops, cfg.path_cap);
  out.capped_pairs = proj.capped_pairs;
  const auto between = connector_centrality(proj);
  const auto& devs = idx.developers();
  for (std::size_t i = 0; i < devs.size(); ++i) {
    RoleScores s;
    s.developer = g.node(devs[i]).id;
    s.window = g.window().index;
    s.coverage = idx.file_count() ? coverage_ratio(idx.set(i).size(), idx.file_count()) : 0.0;
    s.mavenness = rare.empty() ? 0.0 : static_cast<double>(idx.rare_reach(i, cfg.rare_k)) / static_cast<double>(rare.size());
    s.betweenness = between[i];
    out.scores.push_back(std::move(s));
  }
  normalize_role_scores(out.scores);
  return out;
}

// ---------------------------------------------------------------------------
// Per-service rankings

enum class Role { Jack, Maven, Connector };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Jack: return "jack";
    case Role::Maven: return "maven";
    case Role::Connector: return "connector";
  }
  return "";
}

inline double raw_score(const RoleScores& s, Role r) {
  switch (r) {
    case Role::Jack: return s.coverage;
    case Role::Maven: return s.mavenness;
    case Role::Connector: return s.betweenness;
  }
  return 0.0;
}

struct RankedDeveloper {
  std::string developer;
  double score;
};

// Highest raw score first, ties by developer id ascending.
inline std::vector<RankedDeveloper> rank_by(const std::vector<RoleScores>& scores, Role role, std::size_t top_n) {
  std::vector<RankedDeveloper> all;
  for (const auto& s : scores) all.push_back({s.developer, raw_score(s, role)});
  std::sort(all.begin(), all.end(), [](const RankedDeveloper& a, const RankedDeveloper& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.developer < b.developer;
  });
  if (all.size() > top_n) all.resize(top_n);
  return all;
}

struct TopRolesRow {
  std::string service;
  std::vector<RankedDeveloper> jacks;
  std::vector<RankedDeveloper> mavens;
  std::vector<RankedDeveloper> connectors;
};

// One row per service that has scored developers, sorted by service id.
inline std::vector<TopRolesRow> top_roles(const std::map<std::string, std::vector<RoleScores>>& by_service, int top_n) {
  std::vector<TopRolesRow> rows;
  for (const auto& [service, scores] : by_service) {
    if (scores.empty()) continue;
    const auto n = static_cast<std::size_t>(top_n);
    rows.push_back({service, rank_by(scores, Role::Jack, n), rank_by(scores, Role::Maven, n),
                    rank_by(scores, Role::Connector, n)});
  }
  return rows;
}

// Text table: "service | jack (0.228) | maven (0.137) | connector (0.426)",
// one line per rank, service name on the first line only.
inline std::string format_top_roles(const std::vector<TopRolesRow>& rows) {
  std::size_t width = 7;
  for (const auto& r : rows) width = std::max(width, r.service.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - std::min(width, s.size()), ' '); };
  auto cell = [](const std::vector<RankedDeveloper>& v, std::size_t i) {
    if (i >= v.size()) return std::string{};
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.3f)", v[i].score);
    return v[i].developer + buf;
  };
  std::string out = pad("Service") + " | Jack (Coverage) | Maven (Mavenness) | Connector (Centrality)\n";
  for (const auto& r : rows) {
    const std::size_t depth = std::max({r.jacks.size(), r.mavens.size(), r.connectors.size()});
    for (std::size_t i = 0; i < depth; ++i) {
      out += pad(i == 0 ? r.service : std::string{}) + " | " + cell(r.jacks, i) + " | " + cell(r.mavens, i) + " | " +
             cell(r.connectors, i) + "\n";
    }
  }
  return out;
}

}  // namespace orgcoupling
