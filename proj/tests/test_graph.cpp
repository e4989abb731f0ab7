#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <queue>
#include <sstream>

#include "sparsemis/graph.hpp"

using namespace sparsemis;

namespace {

Graph parse(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

// Independent oracle: union-find with path halving.
struct UnionFind {
  std::vector<NodeId> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  NodeId find(NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(NodeId a, NodeId b) { parent[find(a)] = find(b); }
};

std::vector<int> bfs_distances(const Graph& g, NodeId src) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<NodeId> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (NodeId u : g.neighbors(v))
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
  }
  return dist;
}

}  // namespace

TEST(LoadGraph, SingleEdge) {
  Graph g = parse("2 1\n0 1");
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 0));
}

TEST(LoadGraph, EmptyGraph) {
  Graph g = parse("3 0");
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(g.max_degree(), 0u);
}

TEST(LoadGraph, Triangle) {
  Graph g = parse("3 3\n0 1\n1 2\n2 0");
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_EQ(g.max_degree(), 2u);
}

TEST(LoadGraph, DuplicateAndReversedEdgesMerge) {
  Graph g = parse("3 3\n0 1\n1 0\n1 2");
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(LoadGraph, Errors) {
  EXPECT_THROW(parse("2 1\n0 0"), Error);
  EXPECT_THROW(parse("2 1\n0 5"), Error);
  try {
    parse("3 2\n0 1\n1 x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("3 2\n0 1"), ParseError);
}

TEST(LoadGraph, SaveRoundTrip) {
  Graph g = make_gnp(60, 0.1, 5);
  const auto path = std::filesystem::path(SPARSEMIS_SCRATCH_DIR) / "roundtrip.txt";
  save_graph(path, g);
  Graph h = load_graph(path);
  EXPECT_EQ(g, h);
  std::ostringstream a, b;
  write_edge_list(a, g);
  write_edge_list(b, h);
  EXPECT_EQ(a.str(), b.str());
  std::filesystem::remove(path);
}

TEST(Generate, Star) {
  Graph g = generate_graph({GraphModel::Star, 5});
  EXPECT_EQ(g.node_count(), 5u);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(g.max_degree(), 4u);
  EXPECT_EQ(g.degree(0), 4u);
}

TEST(Generate, GnpZero) {
  Graph g = generate_graph({GraphModel::Gnp, 100, 0.0, 0, 7});
  EXPECT_EQ(g.node_count(), 100u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Generate, DRegularDegreeHistogram) {
  Graph g = generate_graph({GraphModel::DRegular, 10, 0.0, 3, 1});
  for (NodeId v = 0; v < 10; ++v) EXPECT_EQ(g.degree(v), 3u);
  EXPECT_EQ(g.edge_count(), 15u);
}

TEST(Generate, DRegularDense) {
  for (auto [n, d] : {std::pair<std::size_t, std::size_t>{200, 64}, {20, 15}, {12, 10}, {300, 256}})
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      Graph g = make_d_regular(n, d, seed);
      ASSERT_EQ(g.edge_count(), n * d / 2);
      for (NodeId v = 0; v < n; ++v) ASSERT_EQ(g.degree(v), d);
    }
}

TEST(Generate, DRegularInfeasible) {
  EXPECT_THROW(make_d_regular(5, 3, 1), ConfigError);
  EXPECT_THROW(make_d_regular(4, 4, 1), ConfigError);
}

TEST(Generate, Deterministic) {
  EXPECT_EQ(make_gnp(300, 0.03, 9), make_gnp(300, 0.03, 9));
  EXPECT_NE(make_gnp(300, 0.03, 9), make_gnp(300, 0.03, 10));
  EXPECT_EQ(make_d_regular(200, 8, 4), make_d_regular(200, 8, 4));
}

TEST(Generate, GnpEdgeDensity) {
  // mean n(n-1)/2 * p = 999.5, sd about 31.6
  Graph g = make_gnp(2000, 0.0005, 3);
  EXPECT_NEAR(static_cast<double>(g.edge_count()), 999.5, 5 * 31.6);
}

TEST(Generate, GraphInvariants) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Graph g = make_gnp(150, 0.06, seed);
    std::size_t maxd = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      auto nb = g.neighbors(v);
      EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
      EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
      for (NodeId u : nb) {
        EXPECT_NE(u, v);
        EXPECT_TRUE(g.has_edge(u, v));
      }
      maxd = std::max(maxd, nb.size());
    }
    EXPECT_EQ(maxd, g.max_degree());
  }
}

TEST(LineGraph, Path) {
  LineGraph lg = line_graph(make_path(3));
  EXPECT_EQ(lg.graph.node_count(), 2u);
  EXPECT_EQ(lg.graph.edge_count(), 1u);
  EXPECT_EQ(lg.edge_of[0], (Edge{0, 1}));
  EXPECT_EQ(lg.edge_of[1], (Edge{1, 2}));
}

TEST(LineGraph, TriangleAndStar) {
  EXPECT_EQ(line_graph(make_complete(3)).graph, make_complete(3));
  EXPECT_EQ(line_graph(make_star(5)).graph, make_complete(4));
}

TEST(LineGraph, DegreeProperty) {
  Graph g = make_gnp(80, 0.08, 2);
  LineGraph lg = line_graph(g);
  ASSERT_EQ(lg.graph.node_count(), g.edge_count());
  for (NodeId e = 0; e < lg.graph.node_count(); ++e) {
    auto [u, v] = lg.edge_of[e];
    EXPECT_EQ(lg.graph.degree(e), g.degree(u) + g.degree(v) - 2);
  }
}

TEST(Components, PathRestricted) {
  Graph g = make_path(3);
  auto parts = connected_components(g, NodeSet(3, {0, 2}));
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], std::vector<NodeId>{0});
  EXPECT_EQ(parts[1], std::vector<NodeId>{2});
  EXPECT_TRUE(connected_components(g, NodeSet(3)).empty());
}

TEST(Components, MatchesUnionFind) {
  Graph g = make_gnp(200, 0.005, 3);
  NodeSet all(200);
  for (NodeId v = 0; v < 200; ++v) all.insert(v);
  auto parts = connected_components(g, all);
  UnionFind uf(200);
  for (auto [u, v] : g.edges()) uf.unite(u, v);
  std::size_t covered = 0;
  for (const auto& part : parts) {
    covered += part.size();
    for (NodeId v : part) EXPECT_EQ(uf.find(v), uf.find(part.front()));
  }
  EXPECT_EQ(covered, 200u);
  std::vector<NodeId> roots;
  for (NodeId v = 0; v < 200; ++v) roots.push_back(uf.find(v));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  EXPECT_EQ(parts.size(), roots.size());
}

TEST(Components, PartitionOfRandomRestriction) {
  Graph g = make_gnp(300, 0.01, 8);
  NodeSet r(300);
  for (NodeId v = 0; v < 300; v += 2) r.insert(v);
  auto parts = connected_components(g, r);
  std::vector<int> seen(300, 0);
  for (const auto& p : parts)
    for (NodeId v : p) ++seen[v];
  for (NodeId v = 0; v < 300; ++v) EXPECT_EQ(seen[v], r.contains(v) ? 1 : 0);
}

TEST(Ball, Basics) {
  Graph g = make_path(4);
  Ball b0 = k_hop_ball(g, 2, 0);
  EXPECT_EQ(b0.nodes, std::vector<NodeId>{2});
  Ball b = k_hop_ball(g, 0, 2);
  EXPECT_EQ(b.nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(b.distance, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(b.induced.edge_count(), 2u);
}

TEST(Ball, MatchesBfs) {
  Graph g = make_gnp(250, 0.015, 4);
  for (NodeId v : {0u, 17u, 101u})
    for (std::size_t r : {1u, 2u, 3u, 5u}) {
      Ball b = k_hop_ball(g, v, r);
      auto dist = bfs_distances(g, v);
      std::vector<NodeId> expect;
      for (NodeId u = 0; u < g.node_count(); ++u)
        if (dist[u] >= 0 && dist[u] <= static_cast<int>(r)) expect.push_back(u);
      ASSERT_EQ(b.nodes, expect);
      for (std::size_t i = 0; i < b.nodes.size(); ++i) EXPECT_EQ(static_cast<int>(b.distance[i]), dist[b.nodes[i]]);
      EXPECT_EQ(b.induced, induced_subgraph(g, b.nodes));
    }
}

TEST(VerifyMis, Examples) {
  Graph edge = make_path(2);
  EXPECT_TRUE(is_valid(verify_mis(edge, NodeSet(2, {0}))));
  EXPECT_EQ(verify_mis(edge, NodeSet(2, {0, 1})), MisVerdict(NotIndependent{{0, 1}}));
  EXPECT_EQ(verify_mis(make_complete(3), NodeSet(3)), MisVerdict(NotMaximalNode{0}));
}

TEST(VerifyMatching, Examples) {
  EXPECT_TRUE(is_valid(verify_matching(make_path(3), EdgeSet({{0, 1}}), true)));
  EXPECT_EQ(verify_matching(make_path(4), EdgeSet({{0, 1}, {1, 2}}), false), MatchingVerdict(Overlapping{1}));
  EXPECT_EQ(verify_matching(make_path(5), EdgeSet({{1, 2}}), true), MatchingVerdict(NotMaximalEdge{{3, 4}}));
  EXPECT_TRUE(is_valid(verify_matching(make_path(5), EdgeSet({{1, 2}}), false)));
  EXPECT_EQ(verify_matching(make_path(5), EdgeSet({{0, 2}}), false), MatchingVerdict(NotAnEdge{{0, 2}}));
}

TEST(VerifyMis, IndependenceSurvivesInducedSubgraph) {
  Graph g = make_gnp(120, 0.05, 6);
  // greedy MIS as the independent set
  NodeSet s(120);
  for (NodeId v = 0; v < 120; ++v) {
    bool ok = true;
    for (NodeId u : g.neighbors(v)) ok = ok && !s.contains(u);
    if (ok) s.insert(v);
  }
  ASSERT_TRUE(is_valid(verify_mis(g, s)));
  std::vector<NodeId> closed;
  for (NodeId v : s.members()) {
    closed.push_back(v);
    for (NodeId u : g.neighbors(v)) closed.push_back(u);
  }
  std::sort(closed.begin(), closed.end());
  closed.erase(std::unique(closed.begin(), closed.end()), closed.end());
  Graph h = induced_subgraph(g, closed);
  NodeSet local(closed.size());
  for (std::size_t i = 0; i < closed.size(); ++i)
    if (s.contains(closed[i])) local.insert(static_cast<NodeId>(i));
  EXPECT_FALSE(std::holds_alternative<NotIndependent>(verify_mis(h, local)));
}
