#include <catch_amalgamated.hpp>

#include <orgcoupling/oracle.hpp>
#include <orgcoupling/roles.hpp>

#include "random_graphs.hpp"

using namespace orgcoupling;

namespace {

auto kind_is(ErrorKind k) {
  return Catch::Matchers::Predicate<Error>([k](const Error& e) { return e.kind() == k; });
}

struct Builder {
  TraceGraph g{Window{0, make_instant(2020, 1, 1), make_instant(2021, 1, 1)}};
  NodeId dev(const std::string& id) { return g.add_node(NodeKind::Developer, id); }
  NodeId commit(const std::string& id) { return g.add_node(NodeKind::Commit, id); }
  NodeId file(const std::string& id) { return g.add_node(NodeKind::File, id, "s"); }
  void link(NodeId a, NodeId b, double d = 1.0) { g.add_edge(a, b, d, "x"); }
};

std::vector<std::string> keys(const TraceGraph& g, const ReachabilitySet& r) {
  std::vector<std::string> out;
  for (auto f : r.files) out.push_back(g.node(f).key());
  std::sort(out.begin(), out.end());
  return out;
}

DevProjection projection(std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> edges) {
  DevProjection p;
  for (std::size_t i = 0; i < n; ++i) p.developers.push_back("d" + std::to_string(i));
  for (auto [u, v, w] : edges) p.edges.push_back({u, v, w, 1});
  return p;
}

// Two developers with disjoint halves of 10 files.
TraceGraph split_fixture() {
  Builder b;
  const auto a = b.dev("a"), z = b.dev("z");
  for (int i = 0; i < 10; ++i) b.link(i < 5 ? a : z, b.file("f" + std::to_string(i)));
  return b.g;
}

}  // namespace

TEST_CASE("reachability along a chain depends on the budget") {
  Builder b;
  const auto d = b.dev("d");
  const auto c1 = b.commit("c1"), c2 = b.commit("c2"), c3 = b.commit("c3");
  const auto f = b.file("far");
  b.link(d, c1, 2.0);
  b.link(c1, c2, 2.0);
  b.link(c2, c3, 2.0);
  b.link(c3, f, 2.0);
  CHECK(reachable_files(b.g, "d", 10.0).size() == 1);
  CHECK(reachable_files(b.g, "d", 8.0).size() == 1);
  CHECK(reachable_files(b.g, "d", 3.0).size() == 0);
}

TEST_CASE("reachability never passes through another developer") {
  // dev1-c1-f1-c2-dev2 with f2 hanging off c2: dev1 reaches f2 through c2,
  // but a file reachable only through dev2 stays out of range.
  Builder b;
  const auto d1 = b.dev("dev1"), d2 = b.dev("dev2");
  const auto c1 = b.commit("c1"), c2 = b.commit("c2"), c3 = b.commit("c3");
  const auto f1 = b.file("f1"), f2 = b.file("f2"), f3 = b.file("f3");
  b.link(d1, c1);
  b.link(c1, f1);
  b.link(f1, c2);
  b.link(c2, d2);
  b.link(c2, f2);
  b.link(d2, c3);
  b.link(c3, f3);
  const auto r = reachable_files(b.g, "dev1", 10.0);
  CHECK(keys(b.g, r) == std::vector<std::string>{"file:s:f1", "file:s:f2"});
  CHECK(oracle_reachability(b.g, "dev1", 10.0) == std::set<std::string>{"file:s:f1", "file:s:f2"});
  CHECK(oracle_reachability(b.g, "dev1", 3.9) == std::set<std::string>{"file:s:f1"});
  CHECK(keys(b.g, reachable_files(b.g, "dev1", 3.9)) == std::vector<std::string>{"file:s:f1"});
}

TEST_CASE("unknown developers are reported") {
  Builder b;
  b.link(b.dev("a"), b.file("f"));
  CHECK_THROWS_MATCHES(reachable_files(b.g, "nobody", 10.0), Error, kind_is(ErrorKind::UnknownDeveloper));
  CHECK_THROWS_MATCHES(mavenness(b.g, "nobody", 10.0, 1), Error, kind_is(ErrorKind::UnknownDeveloper));
}

TEST_CASE("coverage") {
  CHECK(coverage_ratio(5, 5) == 1.0);
  CHECK(coverage_ratio(0, 5) == 0.0);
  CHECK(coverage_ratio(2, 8) == 0.25);
  CHECK_THROWS_MATCHES(coverage_ratio(0, 0), Error, kind_is(ErrorKind::EmptyProject));

  Builder b;
  const auto d = b.dev("d"), e = b.dev("e");
  const auto c = b.commit("c");
  b.link(d, c);
  for (int i = 0; i < 8; ++i) {
    const auto f = b.file("f" + std::to_string(i));
    if (i < 2) b.link(c, f);
    else b.link(e, f);
  }
  CHECK(coverage(b.g, "d", 10.0) == 0.25);
  CHECK(coverage(b.g, "e", 10.0) == 0.75);

  Builder empty;
  empty.dev("lonely");
  CHECK_THROWS_MATCHES(coverage(empty.g, "lonely", 10.0), Error, kind_is(ErrorKind::EmptyProject));
}

TEST_CASE("rare files and mavenness") {
  Builder b;
  const auto a = b.dev("a"), z = b.dev("z");
  const auto solo = b.file("solo"), shared = b.file("shared");
  b.link(a, solo);
  b.link(a, shared);
  b.link(z, shared);
  const auto rare = rare_files(b.g, 10.0, 1);
  CHECK(rare == std::vector<NodeId>{solo});
  CHECK(rare_files(b.g, 10.0, 2).size() == 2);
  CHECK(rare_files(TraceGraph{}, 10.0, 1).empty());
  CHECK_THROWS_MATCHES(rare_files(b.g, 10.0, 0), Error, kind_is(ErrorKind::InvalidConfig));

  Builder one;
  const auto d = one.dev("d");
  for (int i = 0; i < 4; ++i) one.link(d, one.file("f" + std::to_string(i)));
  CHECK(mavenness(one.g, "d", 10.0, 1) == 1.0);

  // Independent count: each developer exclusively reaches 5 of the 10 rare files.
  const auto split = split_fixture();
  std::map<std::string, std::size_t> exclusive;
  for (auto f : split.files()) {
    std::vector<std::string> who;
    for (const std::string dev : {"a", "z"}) {
      if (oracle_reachability(split, dev, 10.0).count(split.node(f).key())) who.push_back(dev);
    }
    if (who.size() == 1) ++exclusive[who[0]];
  }
  CHECK(exclusive["a"] == 5);
  CHECK(mavenness(split, "a", 10.0, 1) == static_cast<double>(exclusive["a"]) / 10.0);
  CHECK(mavenness(split, "z", 10.0, 1) == 0.5);

  Builder both;
  const auto x = both.dev("x"), y = both.dev("y");
  for (int i = 0; i < 3; ++i) {
    const auto f = both.file("f" + std::to_string(i));
    both.link(x, f);
    both.link(y, f);
  }
  CHECK(mavenness(both.g, "x", 10.0, 1) == 0.0);
}

TEST_CASE("rsrd aggregation over path lengths") {
  CHECK(aggregate_rsrd({0, 0, 1}, 10000).first == 2.0);
  CHECK(aggregate_rsrd({0, 0, 1, 0, 1}, 10000).first == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(aggregate_rsrd({0, 0, 0, 0, 0}, 10000).second == 0);
  bool capped = false;
  auto [r, used] = aggregate_rsrd({0, 0, 3, 0, 5}, 4, &capped);
  CHECK(capped);
  CHECK(used == 4);
  CHECK(r == Catch::Approx(1.0 / (3.0 / 2.0 + 1.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("developer projection") {
  SECTION("one shared commit") {
    Builder b;
    const auto c = b.commit("c");
    b.link(b.dev("dev1"), c, 1.7);
    b.link(b.dev("dev2"), c, 1.2);
    const auto p = developer_projection(b.g, 4);
    REQUIRE(p.edges.size() == 1);
    CHECK(p.rsrd("dev1", "dev2") == 2.0);
  }
  SECTION("paths of two and four hops") {
    Builder b;
    const auto a = b.dev("a"), z = b.dev("z");
    const auto c = b.commit("c"), c1 = b.commit("c1"), c2 = b.commit("c2");
    const auto f = b.file("f");
    b.link(a, c);
    b.link(c, z);
    b.link(a, c1);
    b.link(c1, f);
    b.link(f, c2);
    b.link(c2, z);
    CHECK(*developer_projection(b.g, 4).rsrd("a", "z") == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(*developer_projection(b.g, 3).rsrd("a", "z") == 2.0);
  }
  SECTION("no short path, no edge") {
    Builder b;
    const auto a = b.dev("a"), z = b.dev("z");
    NodeId prev = a;
    for (int i = 0; i < 4; ++i) {
      const auto n = b.commit("c" + std::to_string(i));
      b.link(prev, n);
      prev = n;
    }
    b.link(prev, z);
    CHECK(developer_projection(b.g, 4).edges.empty());
    CHECK(developer_projection(b.g, 5).edges.size() == 1);
  }
  SECTION("paths through a third developer are not counted") {
    Builder b;
    const auto a = b.dev("a"), m = b.dev("m"), z = b.dev("z");
    const auto c1 = b.commit("c1"), c2 = b.commit("c2");
    b.link(a, c1);
    b.link(c1, m);
    b.link(m, c2);
    b.link(c2, z);
    const auto p = developer_projection(b.g, 4);
    CHECK_FALSE(p.rsrd("a", "z").has_value());
    CHECK(p.rsrd("a", "m") == 2.0);
  }
  CHECK_THROWS_MATCHES(developer_projection(TraceGraph{}, 1), Error, kind_is(ErrorKind::InvalidConfig));
}

TEST_CASE("connector centrality") {
  const auto path = connector_centrality(projection(3, {{0, 1, 2.0}, {1, 2, 2.0}}));
  CHECK(path == std::vector<double>{0.0, 1.0, 0.0});

  const auto star_p = projection(5, {{0, 1, 2.0}, {0, 2, 2.0}, {0, 3, 2.0}, {0, 4, 2.0}});
  const auto star = connector_centrality(star_p);
  const auto star_oracle = oracle_betweenness(star_p);
  CHECK(star_oracle[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(star[0] == Catch::Approx(1.0).epsilon(1e-12));
  for (int i = 1; i < 5; ++i) CHECK(star[i] == 0.0);

  CHECK(connector_centrality(projection(3, {{0, 1, 2.0}, {1, 2, 2.0}, {0, 2, 2.0}})) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(connector_centrality(projection(2, {{0, 1, 2.0}})) == std::vector<double>{0.0, 0.0});
  CHECK(connector_centrality(projection(0, {})).empty());

  // Two equal shortest routes split the credit.
  const auto square = connector_centrality(projection(4, {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}}));
  const double expected = 0.5 / 3.0;
  for (auto v : square) CHECK(v == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("normalization and the role-strength index") {
  std::vector<RoleScores> s(2);
  s[0].developer = "a";
  s[1].developer = "b";
  s[0].coverage = 0.2;
  s[1].coverage = 0.1;
  s[0].betweenness = 0.3;
  normalize_role_scores(s);
  CHECK(s[0].j_norm == 1.0);
  CHECK(s[1].j_norm == 0.5);
  CHECK(s[0].m_norm == 0.0);
  CHECK(s[1].m_norm == 0.0);
  CHECK(s[0].c_norm == 1.0);

  std::vector<RoleScores> single(1);
  single[0].coverage = 0.3;
  single[0].mavenness = 0.01;
  single[0].betweenness = 0.0;
  normalize_role_scores(single);
  CHECK(single[0].j_norm == 1.0);
  CHECK(single[0].m_norm == 1.0);
  CHECK(single[0].c_norm == 0.0);

  CHECK(rsi(1, 1, 1) == 1.0);
  CHECK(std::abs(rsi(0.5, 0.5, 0.5) - 0.5) <= 1e-12);
  CHECK(rsi(1, 1, 0) == 0.0);
}

TEST_CASE("rankings and the table format") {
  std::vector<RoleScores> s(3);
  s[0].developer = "zed";
  s[1].developer = "amy";
  s[2].developer = "bob";
  s[0].coverage = s[1].coverage = 0.4;
  s[2].coverage = 0.1;
  s[2].mavenness = 0.137;
  s[0].betweenness = 0.426;
  const auto jacks = rank_by(s, Role::Jack, 3);
  CHECK(jacks[0].developer == "amy");
  CHECK(jacks[1].developer == "zed");
  CHECK(rank_by(s, Role::Jack, 1).size() == 1);

  std::map<std::string, std::vector<RoleScores>> by_service{{"clouddriver", s}, {"idle", {}}};
  const auto rows = top_roles(by_service, 1);
  REQUIRE(rows.size() == 1);
  CHECK(format_top_roles(rows) ==
        "Service     | Jack (Coverage) | Maven (Mavenness) | Connector (Centrality)\n"
        "clouddriver | amy (0.400) | bob (0.137) | zed (0.426)\n");

  std::vector<RoleScores> one(1);
  one[0].developer = "solo";
  const auto r1 = top_roles({{"svc", one}}, 3);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].jacks.size() == 1);
  CHECK(r1[0].mavens.size() == 1);
  CHECK(r1[0].connectors.size() == 1);
}

TEST_CASE("reachability is monotone in the budget and agrees with the oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = fixtures::random_trace_graph(rng);
    for (auto d : g.developers()) {
      const auto& id = g.node(d).id;
      std::vector<std::string> prev;
      for (double theta : {2.0, 4.0, 6.0, 10.0, 20.0}) {
        const auto fast = keys(g, reachable_files(g, id, theta));
        const auto slow = oracle_reachability(g, id, theta);
        CHECK(fast == std::vector<std::string>(slow.begin(), slow.end()));
        CHECK(std::includes(fast.begin(), fast.end(), prev.begin(), prev.end()));
        prev = fast;
      }
    }
  }
}

TEST_CASE("score bounds, disjoint rare reach and scale invariance") {
  std::mt19937_64 rng(23);
  AnalysisConfig cfg;
  cfg.theta = 6.0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = fixtures::random_trace_graph(rng, 11, 5);
    auto ra = compute_roles(g, cfg);
    double maven_sum = 0.0;
    for (const auto& s : ra.scores) {
      CHECK(s.coverage >= 0.0);
      CHECK(s.coverage <= 1.0);
      CHECK(s.mavenness >= 0.0);
      CHECK(s.mavenness <= 1.0);
      CHECK(s.rsi >= 0.0);
      CHECK(s.rsi <= 1.0 + 1e-12);
      maven_sum += s.mavenness;
    }
    CHECK(maven_sum <= 1.0 + 1e-12);

    auto scaled = ra.scores;
    for (auto& s : scaled) {
      s.coverage *= 3.7;
      s.betweenness *= 0.01;
    }
    normalize_role_scores(scaled);
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      CHECK(std::abs(scaled[i].rsi - ra.scores[i].rsi) <= 1e-12);
    }
    auto top = [](const std::vector<RoleScores>& v) {
      return std::max_element(v.begin(), v.end(), [](const RoleScores& a, const RoleScores& b) { return a.rsi < b.rsi; }) -
             v.begin();
    };
    if (!scaled.empty()) CHECK(top(scaled) == top(ra.scores));

    const auto proj = developer_projection(g, cfg.max_hops);
    const auto fast = connector_centrality(proj);
    const auto slow = oracle_betweenness(proj);
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - slow[i]) <= 1e-9);
  }
}

TEST_CASE("betweenness agrees with the oracle on tie-heavy projections") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = fixtures::random_projection(rng, 3 + trial % 6);
    const auto fast = connector_centrality(p);
    const auto slow = oracle_betweenness(p);
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i] >= 0.0);
      CHECK(fast[i] <= 1.0 + 1e-12);
      CHECK(std::abs(fast[i] - slow[i]) <= 1e-9);
    }
  }
}

TEST_CASE("the oracles refuse large inputs") {
  Builder b;
  b.dev("d");
  for (int i = 0; i < 12; ++i) b.file("f" + std::to_string(i));
  CHECK_THROWS_MATCHES(oracle_reachability(b.g, "d", 10.0), Error, kind_is(ErrorKind::GraphTooLarge));
  CHECK_THROWS_MATCHES(oracle_betweenness(projection(9, {})), Error, kind_is(ErrorKind::GraphTooLarge));
  CHECK(oracle_betweenness(projection(2, {{0, 1, 1.0}})) == std::vector<double>{0.0, 0.0});
}
