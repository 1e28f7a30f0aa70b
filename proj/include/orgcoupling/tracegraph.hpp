#pragma once

// Per-window undirected artifact traceability graph. Nodes are developers,
// commits, files and issues; each edge carries the recency distance 1/r of the
// event that introduced it.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ingest.hpp"
#include "window.hpp"

namespace orgcoupling {

enum class NodeKind : std::uint8_t { Developer, Commit, File, Issue };

inline const char* node_prefix(NodeKind k) {
  switch (k) {
    case NodeKind::Developer: return "dev:";
    case NodeKind::Commit: return "commit:";
    case NodeKind::File: return "file:";
    case NodeKind::Issue: return "issue:";
  }
  return "";
}

using NodeId = std::uint32_t;

struct Node {
  NodeKind kind;
  std::string id;       // developer id, commit id, path or issue id
  std::string service;  // files and issues only

  std::string key() const {
    switch (kind) {
      case NodeKind::File: return std::string(node_prefix(kind)) + service + ":" + id;
      case NodeKind::Issue: return std::string(node_prefix(kind)) + service + "#" + id;
      default: return std::string(node_prefix(kind)) + id;
    }
  }
};

struct Edge {
  NodeId a;
  NodeId b;
  double distance;
  std::string provenance;
};

struct Neighbor {
  NodeId node;
  std::uint32_t edge;
};

struct BuildReport {
  std::size_t change_events = 0;
  std::size_t timeline_events = 0;
  std::size_t dangling_refs = 0;
};

class TraceGraph {
 public:
  TraceGraph() = default;
  explicit TraceGraph(Window w) : window_(w) {}

  const Window& window() const { return window_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Node& node(NodeId n) const { return nodes_[n]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Neighbor>& neighbors(NodeId n) const { return adjacency_[n]; }
  bool is_developer(NodeId n) const { return nodes_[n].kind == NodeKind::Developer; }

  std::optional<NodeId> find(NodeKind kind, const std::string& id, const std::string& service = {}) const {
    auto it = index_.find(Node{kind, id, service}.key());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<NodeId> find_developer(const std::string& dev) const { return find(NodeKind::Developer, dev); }

  // Node ids of one kind, ordered by key.
  std::vector<NodeId> nodes_of(NodeKind kind) const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].kind == kind) out.push_back(i);
    }
    std::sort(out.begin(), out.end(), [&](NodeId x, NodeId y) { return nodes_[x].id < nodes_[y].id ||
                                                                       (nodes_[x].id == nodes_[y].id && nodes_[x].service < nodes_[y].service); });
    return out;
  }

  std::vector<NodeId> developers() const { return nodes_of(NodeKind::Developer); }
  std::vector<NodeId> files() const { return nodes_of(NodeKind::File); }

  NodeId add_node(NodeKind kind, const std::string& id, const std::string& service = {}) {
    Node n{kind, id, kind == NodeKind::File || kind == NodeKind::Issue ? service : std::string{}};
    auto [it, inserted] = index_.emplace(n.key(), static_cast<NodeId>(nodes_.size()));
    if (inserted) {
      nodes_.push_back(std::move(n));
      adjacency_.emplace_back();
    }
    return it->second;
  }

  // Parallel edges collapse, keeping the minimum distance.
  void add_edge(NodeId a, NodeId b, double distance, const std::string& provenance) {
    if (a == b) return;
    if (is_developer(a) && is_developer(b)) return;
    auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    auto [it, inserted] = edge_index_.emplace(key, static_cast<std::uint32_t>(edges_.size()));
    if (inserted) {
      edges_.push_back(Edge{key.first, key.second, distance, provenance});
      adjacency_[a].push_back({b, it->second});
      adjacency_[b].push_back({a, it->second});
    } else if (distance < edges_[it->second].distance) {
      edges_[it->second].distance = distance;
      edges_[it->second].provenance = provenance;
    }
  }

  // "node_a<TAB>node_b<TAB>distance" per edge, in insertion order.
  void dump(std::ostream& out) const {
    char buf[32];
    for (const auto& e : edges_) {
      std::snprintf(buf, sizeof buf, "%.6f", e.distance);
      out << nodes_[e.a].key() << '\t' << nodes_[e.b].key() << '\t' << buf << '\n';
    }
  }

 private:
  Window window_{};
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::unordered_map<std::string, NodeId> index_;
  std::map<std::pair<NodeId, NodeId>, std::uint32_t> edge_index_;
};

struct GraphBuild {
  TraceGraph graph;
  BuildReport report;
};

namespace detail {

inline std::string timeline_provenance(const TimelineEvent& ev) {
  return "issue:" + ev.service + "#" + ev.issue_id + "/" + to_string(ev.kind) + "/" + std::to_string(to_unix(ev.timestamp));
}

}  // namespace detail

// Builds the graph from the events that fall inside the window. When
// `service` is given only that service's events contribute.
inline GraphBuild build_graph(const std::vector<ChangeEvent>& changes, const std::vector<TimelineEvent>& timeline,
                              const Window& window, const AnalysisConfig& cfg,
                              const std::optional<std::string>& service = std::nullopt) {
  GraphBuild out{TraceGraph(window), {}};
  auto& g = out.graph;

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    if (window.contains(changes[i].timestamp) && (!service || changes[i].service == *service)) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return change_order(changes[x], changes[y]); });
  for (auto i : order) {
    const auto& ev = changes[i];
    const double d = edge_distance(ev.timestamp, window, cfg);
    const NodeId dev = g.add_node(NodeKind::Developer, ev.author);
    const NodeId commit = g.add_node(NodeKind::Commit, ev.commit_id);
    g.add_edge(dev, commit, d, ev.commit_id);
    for (const auto& f : ev.files) {
      const NodeId file = g.add_node(NodeKind::File, f.path, ev.service);
      g.add_edge(commit, file, d, ev.commit_id);
    }
  }
  out.report.change_events = order.size();

  order.clear();
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    if (window.contains(timeline[i].timestamp) && (!service || timeline[i].service == *service)) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return timeline_order(timeline[x], timeline[y]); });
  for (auto i : order) {
    const auto& ev = timeline[i];
    const double d = edge_distance(ev.timestamp, window, cfg);
    if (ev.kind == TimelineKind::CommitRef) {
      auto commit = g.find(NodeKind::Commit, *ev.linked_commit);
      if (!commit) {
        ++out.report.dangling_refs;
        continue;
      }
      const NodeId issue = g.add_node(NodeKind::Issue, ev.issue_id, ev.service);
      g.add_edge(*commit, issue, d, detail::timeline_provenance(ev));
    } else {
      const NodeId dev = g.add_node(NodeKind::Developer, ev.actor);
      const NodeId issue = g.add_node(NodeKind::Issue, ev.issue_id, ev.service);
      g.add_edge(dev, issue, d, detail::timeline_provenance(ev));
    }
  }
  out.report.timeline_events = order.size();
  return out;
}

struct GraphStats {
  std::size_t developers = 0;
  std::size_t commits = 0;
  std::size_t files = 0;
  std::size_t issues = 0;
  std::size_t edges = 0;
  std::size_t components = 0;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

inline GraphStats graph_stats(const TraceGraph& g) {
  GraphStats s;
  for (const auto& n : g.nodes()) {
    switch (n.kind) {
      case NodeKind::Developer: ++s.developers; break;
      case NodeKind::Commit: ++s.commits; break;
      case NodeKind::File: ++s.files; break;
      case NodeKind::Issue: ++s.issues; break;
    }
  }
  s.edges = g.edge_count();
  std::vector<char> seen(g.node_count(), 0);
  std::vector<NodeId> stack;
  for (NodeId start = 0; start < g.node_count(); ++start) {
    if (seen[start]) continue;
    ++s.components;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(n)) {
        if (!seen[nb.node]) {
          seen[nb.node] = 1;
          stack.push_back(nb.node);
        }
      }
    }
  }
  return s;
}

}  // namespace orgcoupling
