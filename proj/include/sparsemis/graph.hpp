#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sparsemis {

using NodeId = std::uint32_t;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Membership bit-vector over node identifiers 0..size()-1.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t universe) : bits_(universe, false) {}
  NodeSet(std::size_t universe, std::initializer_list<NodeId> members);

  std::size_t universe() const noexcept { return bits_.size(); }
  bool contains(NodeId v) const { return v < bits_.size() && bits_[v]; }
  void insert(NodeId v);
  void erase(NodeId v);
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<NodeId> members() const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<bool> bits_;
};

using Edge = std::pair<NodeId, NodeId>;

/// Canonical edge sequence: min id first, sorted, deduplicated.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(std::vector<Edge> edges);

  void insert(NodeId u, NodeId v);
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  bool contains(NodeId u, NodeId v) const;

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  std::vector<Edge> edges_;
};

inline Edge canonical(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// Immutable simple undirected graph in compressed adjacency form.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary edge list; duplicates and reversed pairs merge.
  /// Throws Error on self-loops or out-of-range endpoints.
  static Graph from_edges(std::size_t node_count, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  std::size_t max_degree() const noexcept { return max_degree_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  /// Canonical edge list (u < v, sorted).
  std::vector<Edge> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::size_t max_degree_ = 0;
};

// ---------------------------------------------------------------------------
// Edge-list I/O: first line "n m", then m lines "u v".

Graph read_edge_list(std::istream& in);
Graph load_graph(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const Graph& g);
void save_graph(const std::filesystem::path& path, const Graph& g);
void write_edge_set(std::ostream& out, std::size_t node_count, const EdgeSet& m);

// ---------------------------------------------------------------------------
// Generators. Deterministic for fixed (model, params, seed).

enum class GraphModel { Gnp, DRegular, Star, Path, Complete };

struct GraphSpec {
  GraphModel model = GraphModel::Gnp;
  std::size_t n = 0;
  double p = 0.0;        // gnp edge probability
  std::size_t d = 0;     // d-regular degree
  std::uint64_t seed = 0;
};

Graph generate_graph(const GraphSpec& spec);
Graph make_gnp(std::size_t n, double p, std::uint64_t seed);
Graph make_d_regular(std::size_t n, std::size_t d, std::uint64_t seed);
Graph make_star(std::size_t n);
Graph make_path(std::size_t n);
Graph make_complete(std::size_t n);

std::optional<GraphModel> parse_graph_model(std::string_view name);
std::string_view to_string(GraphModel model);

// ---------------------------------------------------------------------------
// Derived graphs.

struct LineGraph {
  Graph graph;
  std::vector<Edge> edge_of;  // line-graph node -> original edge
};

LineGraph line_graph(const Graph& g);

/// Components of the subgraph induced by `restrict`, each sorted ascending,
/// ordered by smallest member.
std::vector<std::vector<NodeId>> connected_components(const Graph& g, const NodeSet& restrict);

struct Ball {
  std::vector<NodeId> nodes;          // sorted ascending (original ids)
  std::vector<std::uint32_t> distance;  // parallel to nodes
  Graph induced;                      // on local ids 0..nodes.size()-1
  std::optional<std::size_t> local_id(NodeId v) const;
};

Ball k_hop_ball(const Graph& g, NodeId v, std::size_t radius);

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

// ---------------------------------------------------------------------------
// Verifiers.

struct Valid {
  friend bool operator==(const Valid&, const Valid&) = default;
};
struct NotIndependent {
  Edge witness;
  friend bool operator==(const NotIndependent&, const NotIndependent&) = default;
};
struct NotMaximalNode {
  NodeId witness;
  friend bool operator==(const NotMaximalNode&, const NotMaximalNode&) = default;
};
struct Overlapping {
  NodeId witness;
  friend bool operator==(const Overlapping&, const Overlapping&) = default;
};
struct NotMaximalEdge {
  Edge witness;
  friend bool operator==(const NotMaximalEdge&, const NotMaximalEdge&) = default;
};
struct NotAnEdge {
  Edge witness;
  friend bool operator==(const NotAnEdge&, const NotAnEdge&) = default;
};

using MisVerdict = std::variant<Valid, NotIndependent, NotMaximalNode>;
using MatchingVerdict = std::variant<Valid, Overlapping, NotMaximalEdge, NotAnEdge>;

MisVerdict verify_mis(const Graph& g, const NodeSet& s);
MatchingVerdict verify_matching(const Graph& g, const EdgeSet& m, bool require_maximal);

inline bool is_valid(const MisVerdict& v) { return std::holds_alternative<Valid>(v); }
inline bool is_valid(const MatchingVerdict& v) { return std::holds_alternative<Valid>(v); }
std::string describe(const MisVerdict& v);
std::string describe(const MatchingVerdict& v);

}  // namespace sparsemis
