#pragma once

// Random small fixtures for the oracle comparisons.

#include <random>
#include <string>

#include <orgcoupling/roles.hpp>
#include <orgcoupling/tracegraph.hpp>

namespace fixtures {

// A trace graph with at most `max_nodes` non-developer nodes plus a few
// developers, random edges and distances drawn from [1, 6].
inline orgcoupling::TraceGraph random_trace_graph(std::mt19937_64& rng, std::size_t max_nodes = 11,
                                                  std::size_t max_devs = 4) {
  using namespace orgcoupling;
  TraceGraph g(Window{0, make_instant(2020, 1, 1), make_instant(2021, 1, 1)});
  std::uniform_int_distribution<std::size_t> n_art(2, max_nodes), n_dev(1, max_devs);
  std::uniform_real_distribution<double> dist(1.0, 6.0), coin(0.0, 1.0);
  const std::size_t artifacts = n_art(rng), devs = n_dev(rng);
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < devs; ++i) ids.push_back(g.add_node(NodeKind::Developer, "d" + std::to_string(i)));
  for (std::size_t i = 0; i < artifacts; ++i) {
    const auto kind = static_cast<NodeKind>(1 + rng() % 3);
    ids.push_back(g.add_node(kind, "n" + std::to_string(i), "s"));
  }
  const double density = 0.2 + 0.3 * coin(rng);
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      if (coin(rng) < density) g.add_edge(ids[a], ids[b], dist(rng), "e");
    }
  }
  return g;
}

// A projection over `n` developers. Weights come from a small set so that
// tied shortest paths are common.
inline orgcoupling::DevProjection random_projection(std::mt19937_64& rng, std::size_t n) {
  orgcoupling::DevProjection p;
  for (std::size_t i = 0; i < n; ++i) p.developers.push_back("d" + std::to_string(i));
  static const double weights[] = {1.0, 4.0 / 3.0, 2.0, 2.0 / 3.0, 1.5, 4.0};
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double density = 0.3 + 0.5 * coin(rng);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (coin(rng) < density) p.edges.push_back({u, v, weights[rng() % 6], 1});
    }
  }
  return p;
}

}  // namespace fixtures
