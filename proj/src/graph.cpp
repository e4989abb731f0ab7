#include "sparsemis/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace sparsemis {

// --- NodeSet ---------------------------------------------------------------

NodeSet::NodeSet(std::size_t universe, std::initializer_list<NodeId> members) : bits_(universe, false) {
  for (NodeId v : members) insert(v);
}

void NodeSet::insert(NodeId v) {
  if (v >= bits_.size()) throw Error("NodeSet::insert: node " + std::to_string(v) + " out of range");
  bits_[v] = true;
}

void NodeSet::erase(NodeId v) {
  if (v < bits_.size()) bits_[v] = false;
}

std::size_t NodeSet::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

std::vector<NodeId> NodeSet::members() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < bits_.size(); ++v)
    if (bits_[v]) out.push_back(static_cast<NodeId>(v));
  return out;
}

// --- EdgeSet ---------------------------------------------------------------

EdgeSet::EdgeSet(std::vector<Edge> edges) : edges_(std::move(edges)) {
  for (auto& e : edges_) e = canonical(e.first, e.second);
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

void EdgeSet::insert(NodeId u, NodeId v) {
  Edge e = canonical(u, v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (it == edges_.end() || *it != e) edges_.insert(it, e);
}

bool EdgeSet::contains(NodeId u, NodeId v) const {
  return std::binary_search(edges_.begin(), edges_.end(), canonical(u, v));
}

// --- Graph -----------------------------------------------------------------

Graph Graph::from_edges(std::size_t node_count, std::span<const Edge> edges) {
  std::vector<Edge> canon;
  canon.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= node_count || v >= node_count)
      throw Error("edge {" + std::to_string(u) + "," + std::to_string(v) + "} out of range for n=" +
                  std::to_string(node_count));
    if (u == v) throw Error("self-loop at node " + std::to_string(u));
    canon.push_back(canonical(u, v));
  }
  std::sort(canon.begin(), canon.end());
  canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

  Graph g;
  std::vector<std::size_t> deg(node_count, 0);
  for (auto [u, v] : canon) {
    ++deg[u];
    ++deg[v];
  }
  g.offsets_.assign(node_count + 1, 0);
  for (std::size_t v = 0; v < node_count; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
  g.targets_.resize(g.offsets_[node_count]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : canon) {
    g.targets_[fill[u]++] = v;
    g.targets_[fill[v]++] = u;
  }
  for (std::size_t v = 0; v < node_count; ++v) {
    std::sort(g.targets_.begin() + g.offsets_[v], g.targets_.begin() + g.offsets_[v + 1]);
    g.max_degree_ = std::max(g.max_degree_, deg[v]);
  }
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

// --- I/O -------------------------------------------------------------------

namespace {

bool parse_u64(const std::string& tok, std::uint64_t& out) {
  if (tok.empty()) return false;
  std::uint64_t v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  out = v;
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> toks;
  std::string t;
  while (ss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_content_line = [&](std::vector<std::string>& toks) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      toks = split_ws(line);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_content_line(toks)) throw ParseError("missing header \"n m\"", lineno + 1);
  std::uint64_t n = 0, m = 0;
  if (toks.size() != 2 || !parse_u64(toks[0], n) || !parse_u64(toks[1], m))
    throw ParseError("header must be \"n m\"", lineno);

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!next_content_line(toks))
      throw ParseError("expected " + std::to_string(m) + " edges, found " + std::to_string(i), lineno + 1);
    std::uint64_t u = 0, v = 0;
    if (toks.size() != 2 || !parse_u64(toks[0], u) || !parse_u64(toks[1], v))
      throw ParseError("edge line must be \"u v\"", lineno);
    if (u >= n || v >= n) throw ParseError("node identifier out of range", lineno);
    if (u == v) throw ParseError("self-loop rejected", lineno);
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  if (next_content_line(toks)) throw ParseError("trailing content after edge list", lineno);
  return Graph::from_edges(n, edges);
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open graph file " + path.string());
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write graph file " + path.string());
  write_edge_list(out, g);
}

void write_edge_set(std::ostream& out, std::size_t node_count, const EdgeSet& m) {
  out << node_count << ' ' << m.size() << '\n';
  for (auto [u, v] : m.edges()) out << u << ' ' << v << '\n';
}

// --- Generators ------------------------------------------------------------

namespace {

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // Lemire-free rejection sampling; bound > 0.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace

Graph make_gnp(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gnp: p must lie in [0,1]");
  std::vector<Edge> edges;
  if (n < 2 || p == 0.0) return Graph::from_edges(n, edges);
  std::mt19937_64 rng(seed);
  if (p == 1.0) return make_complete(n);
  // Geometric skipping over the lower triangle (Batagelj-Brandes).
  const double log_q = std::log1p(-p);
  long long v = 1, w = -1;
  const long long nn = static_cast<long long>(n);
  while (v < nn) {
    double r = unit_double(rng);
    w += 1 + static_cast<long long>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
  }
  return Graph::from_edges(n, edges);
}

Graph make_d_regular(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (d >= n && !(n == 0 && d == 0)) throw ConfigError("d_regular: need d < n");
  if ((n * d) % 2 != 0) throw ConfigError("d_regular: n*d must be even");
  std::mt19937_64 rng(seed);
  // Pairing with rejection of unsuitable pairs (Steger-Wormald style); restart when stuck.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<NodeId> points;
    points.reserve(n * d);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < d; ++i) points.push_back(static_cast<NodeId>(v));
    std::vector<std::vector<NodeId>> adj(n);
    auto adjacent = [&](NodeId a, NodeId b) {
      return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
    };
    bool stuck = false;
    while (!points.empty() && !stuck) {
      bool paired = false;
      for (int tries = 0; tries < 64 && !paired; ++tries) {
        std::size_t i = uniform_below(rng, points.size());
        std::size_t j = uniform_below(rng, points.size());
        NodeId a = points[i], b = points[j];
        if (i == j || a == b || adjacent(a, b)) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
        if (i < j) std::swap(i, j);
        points[i] = points.back();
        points.pop_back();
        points[j] = points.back();
        points.pop_back();
        paired = true;
      }
      if (!paired) {
        // Exhaustive check for any suitable pair before giving up on this attempt.
        bool any = false;
        for (std::size_t i = 0; i < points.size() && !any; ++i)
          for (std::size_t j = i + 1; j < points.size() && !any; ++j)
            if (points[i] != points[j] && !adjacent(points[i], points[j])) any = true;
        if (!any) stuck = true;
      }
    }
    // Leftover points are resolved by switches: for a stuck pair (a, b), replace
    // an edge x-y by a-x and b-y.
    for (int tries = 0; stuck && tries < 4096; ++tries) {
      const NodeId a = points[points.size() - 1], b = points[points.size() - 2];
      const NodeId x = static_cast<NodeId>(uniform_below(rng, n));
      if (adj[x].empty()) continue;
      const NodeId y = adj[x][uniform_below(rng, adj[x].size())];
      if (x == a || x == b || y == a || y == b || adjacent(a, x) || adjacent(b, y)) continue;
      std::erase(adj[x], y);
      std::erase(adj[y], x);
      adj[a].push_back(x);
      adj[x].push_back(a);
      adj[b].push_back(y);
      adj[y].push_back(b);
      points.resize(points.size() - 2);
      stuck = !points.empty();
    }
    if (stuck) continue;
    std::vector<Edge> edges;
    for (std::size_t v = 0; v < n; ++v)
      for (NodeId u : adj[v])
        if (v < u) edges.emplace_back(static_cast<NodeId>(v), u);
    return Graph::from_edges(n, edges);
  }
  throw ConfigError("d_regular: failed to generate a simple graph");
}

Graph make_star(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.emplace_back(0, static_cast<NodeId>(v));
  return Graph::from_edges(n, edges);
}

Graph make_path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.emplace_back(static_cast<NodeId>(v - 1), static_cast<NodeId>(v));
  return Graph::from_edges(n, edges);
}

Graph make_complete(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  return Graph::from_edges(n, edges);
}

Graph generate_graph(const GraphSpec& spec) {
  switch (spec.model) {
    case GraphModel::Gnp: return make_gnp(spec.n, spec.p, spec.seed);
    case GraphModel::DRegular: return make_d_regular(spec.n, spec.d, spec.seed);
    case GraphModel::Star: return make_star(spec.n);
    case GraphModel::Path: return make_path(spec.n);
    case GraphModel::Complete: return make_complete(spec.n);
  }
  throw ConfigError("unknown graph model");
}

std::optional<GraphModel> parse_graph_model(std::string_view name) {
  if (name == "gnp") return GraphModel::Gnp;
  if (name == "d_regular") return GraphModel::DRegular;
  if (name == "star") return GraphModel::Star;
  if (name == "path") return GraphModel::Path;
  if (name == "complete") return GraphModel::Complete;
  return std::nullopt;
}

std::string_view to_string(GraphModel model) {
  switch (model) {
    case GraphModel::Gnp: return "gnp";
    case GraphModel::DRegular: return "d_regular";
    case GraphModel::Star: return "star";
    case GraphModel::Path: return "path";
    case GraphModel::Complete: return "complete";
  }
  return "?";
}

// --- Derived graphs ----------------------------------------------------------

LineGraph line_graph(const Graph& g) {
  LineGraph lg;
  lg.edge_of = g.edges();
  const std::size_t m = lg.edge_of.size();
  // Edge index lookup: edges are sorted, so position by binary search.
  auto index_of = [&](NodeId a, NodeId b) {
    auto it = std::lower_bound(lg.edge_of.begin(), lg.edge_of.end(), canonical(a, b));
    return static_cast<NodeId>(it - lg.edge_of.begin());
  };
  std::vector<Edge> ledges;
  for (NodeId x = 0; x < g.node_count(); ++x) {
    auto nb = g.neighbors(x);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) ledges.emplace_back(index_of(x, nb[i]), index_of(x, nb[j]));
  }
  lg.graph = Graph::from_edges(m, ledges);
  return lg;
}

std::vector<std::vector<NodeId>> connected_components(const Graph& g, const NodeSet& restrict) {
  std::vector<std::vector<NodeId>> parts;
  std::vector<bool> seen(g.node_count(), false);
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (!restrict.contains(s) || seen[s]) continue;
    std::vector<NodeId> comp{s};
    seen[s] = true;
    for (std::size_t head = 0; head < comp.size(); ++head)
      for (NodeId u : g.neighbors(comp[head]))
        if (restrict.contains(u) && !seen[u]) {
          seen[u] = true;
          comp.push_back(u);
        }
    std::sort(comp.begin(), comp.end());
    parts.push_back(std::move(comp));
  }
  return parts;
}

std::optional<std::size_t> Ball::local_id(NodeId v) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
  if (it == nodes.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<NodeId> sorted(nodes.begin(), nodes.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (NodeId u : g.neighbors(sorted[i])) {
      auto it = std::lower_bound(sorted.begin(), sorted.end(), u);
      if (it != sorted.end() && *it == u) {
        auto j = static_cast<std::size_t>(it - sorted.begin());
        if (i < j) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  return Graph::from_edges(sorted.size(), edges);
}

Ball k_hop_ball(const Graph& g, NodeId v, std::size_t radius) {
  std::vector<std::pair<NodeId, std::uint32_t>> found{{v, 0}};
  std::vector<std::uint32_t> dist(g.node_count(), UINT32_MAX);
  dist[v] = 0;
  for (std::size_t head = 0; head < found.size(); ++head) {
    auto [u, du] = found[head];
    if (du == radius) continue;
    for (NodeId w : g.neighbors(u))
      if (dist[w] == UINT32_MAX) {
        dist[w] = du + 1;
        found.emplace_back(w, du + 1);
      }
  }
  std::sort(found.begin(), found.end());
  Ball b;
  for (auto [u, du] : found) {
    b.nodes.push_back(u);
    b.distance.push_back(du);
  }
  b.induced = induced_subgraph(g, b.nodes);
  return b;
}

// --- Verifiers ---------------------------------------------------------------

MisVerdict verify_mis(const Graph& g, const NodeSet& s) {
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (!s.contains(u)) continue;
    for (NodeId v : g.neighbors(u))
      if (u < v && s.contains(v)) return NotIndependent{{u, v}};
  }
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (s.contains(u)) continue;
    auto nb = g.neighbors(u);
    if (std::none_of(nb.begin(), nb.end(), [&](NodeId v) { return s.contains(v); })) return NotMaximalNode{u};
  }
  return Valid{};
}

MatchingVerdict verify_matching(const Graph& g, const EdgeSet& m, bool require_maximal) {
  std::vector<bool> covered(g.node_count(), false);
  for (auto [u, v] : m.edges()) {
    if (!g.has_edge(u, v)) return NotAnEdge{{u, v}};
    if (covered[u]) return Overlapping{u};
    if (covered[v]) return Overlapping{v};
    covered[u] = covered[v] = true;
  }
  if (require_maximal)
    for (auto [u, v] : g.edges())
      if (!covered[u] && !covered[v]) return NotMaximalEdge{{u, v}};
  return Valid{};
}

std::string describe(const MisVerdict& v) {
  if (std::holds_alternative<Valid>(v)) return "valid";
  if (auto* e = std::get_if<NotIndependent>(&v))
    return "not_independent({" + std::to_string(e->witness.first) + "," + std::to_string(e->witness.second) + "})";
  return "not_maximal(" + std::to_string(std::get<NotMaximalNode>(v).witness) + ")";
}

std::string describe(const MatchingVerdict& v) {
  if (std::holds_alternative<Valid>(v)) return "valid";
  if (auto* o = std::get_if<Overlapping>(&v)) return "overlapping(" + std::to_string(o->witness) + ")";
  if (auto* e = std::get_if<NotMaximalEdge>(&v))
    return "not_maximal({" + std::to_string(e->witness.first) + "," + std::to_string(e->witness.second) + "})";
  auto w = std::get<NotAnEdge>(v).witness;
  return "not_an_edge({" + std::to_string(w.first) + "," + std::to_string(w.second) + "})";
}

}  // namespace sparsemis
