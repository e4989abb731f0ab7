#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "sparsemis/mis.hpp"

namespace sparsemis {

enum class GoodnessMode { OracleGoodness, DeferBad };

/// Per-node classification at the opening of a leaf window.
struct NodeClass {
  bool live = false;
  bool relevant = false;
  bool light = false;    // d_{t-1} < 2^{2L+1}
  bool stalled = false;  // stalls through the whole window after the window-start decisions
  bool good = true;
  Weight d = 0;
  std::uint32_t dhat = 0;
  NodeState decided;  // state after the window-start decisions

  bool vertex() const { return live && relevant && good && !stalled; }
  bool copy() const { return live && relevant && stalled; }
};

struct Classification {
  Window window;
  std::vector<NodeClass> nodes;
};

/// What a node knows locally: its own state and its neighbors' states.
struct LocalView {
  NodeId node = 0;
  NodeState state;
  std::vector<NodeId> neighbors;
  std::vector<NodeState> neighbor_states;
};

LocalView local_view(const Graph& g, std::span<const NodeState> snapshot, NodeId v);

/// Classification of one node from its local view (goodness provisionally true).
NodeClass classify_node(const LocalView& view, const TapeSpec& tape, const RunPlan& plan, const Window& leaf);

/// `reference` is required in oracle mode: goodness = reference estimates stay <= 2^{3L+2} in the window.
Classification classify_nodes(const Graph& g, std::span<const NodeState> snapshot, const TapeSpec& tape,
                              const RunPlan& plan, const Window& leaf, GoodnessMode mode,
                              const ExecutionTrace* reference = nullptr);

struct VertexLabel {
  NodeState state;             // after the window-start decisions
  std::vector<Fraction> tape;  // per iteration of the window: mark slot, then samples 1..k
  friend bool operator==(const VertexLabel&, const VertexLabel&) = default;
};

struct SparseVertex {
  NodeId origin = 0;
  std::uint32_t copy_index = 0;  // 0 = light vertex; >= 1 = copy of a stalled node
  VertexLabel label;
  friend bool operator==(const SparseVertex&, const SparseVertex&) = default;
};

struct SparseGraph {
  Window window;
  std::uint32_t repetitions = 1;
  int precision_bits = 64;
  std::vector<SparseVertex> vertices;  // ordered by (origin, copy_index)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // canonical, sorted

  std::vector<std::vector<std::uint32_t>> adjacency() const;
  /// Word count: one per vertex record, per label element, per edge.
  std::size_t words() const;
  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;
};

/// Missing randomness in a label.
class LabelError : public Error {
 public:
  using Error::Error;
};

SparseGraph build_sparse_graph(const Graph& g, const Classification& cls, const TapeSpec& tape);
/// Same graph assembled from each node's local view and its neighbors' classes only.
SparseGraph build_sparse_graph_from_views(std::span<const LocalView> views, std::span<const NodeClass> classes,
                                          const TapeSpec& tape, const Window& leaf);

/// Per-iteration trajectory of one node inside a window.
struct Trajectory {
  Window window;
  std::vector<std::uint8_t> p_before;  // p exponent at the start of each iteration
  std::vector<std::uint8_t> live;      // live at the start of each iteration
  std::vector<std::uint8_t> marked;
  std::vector<std::uint8_t> joined;
  std::vector<std::uint32_t> dhat;
  std::vector<std::uint16_t> sampled;  // own sampled repetitions
  std::vector<std::uint8_t> p_after;
  std::vector<std::uint8_t> stalled;
  std::vector<Status> status_after;
  NodeState final_state;
};

struct SparseOutcome {
  NodeId origin = 0;
  int p_exp = 1;  // p_{t'}
  bool joined = false;
  bool deferred = false;  // deferral scheduled or applied
  Trajectory trajectory;
};

/// Replays the window on H alone: light vertices fully, copies as stalling.
/// Outcomes for light vertices, ordered by origin.
std::vector<SparseOutcome> simulate_phase_on_sparse(const SparseGraph& h);

/// Trajectory of a stalling node: p halves, never marks, stays live.
Trajectory predicted_stall(const NodeState& decided, const Window& w, int precision_bits);

/// Runs one node through the window against its neighbors' trajectories
/// (nullptr = neighbor not live in the window).
Trajectory follow_trajectory(NodeId v, const NodeState& decided, std::span<const NodeId> neighbors,
                             std::span<const Trajectory* const> neighbor_traj, const TapeSpec& tape,
                             const Window& w);

/// What neighbors observe of a live node that is not a light vertex of H.
Trajectory outside_view(const NodeClass& c, const Window& w, int precision_bits);

VertexLabel make_label(const TapeSpec& tape, NodeId v, const NodeState& decided, const Window& w);

/// End-of-window states from the light-vertex outcomes of H: every other
/// node follows its neighbors' trajectories. Also returns every node's trajectory.
struct WindowResult {
  std::vector<NodeState> states;
  std::vector<Trajectory> trajectories;  // empty for nodes not Active at the window start
};
WindowResult complete_window(const Graph& g, std::span<const NodeState> snapshot, const Classification& cls,
                             std::vector<SparseOutcome> outcomes, const TapeSpec& tape);

/// Trace rows of the window, ordered by (iteration, node).
std::vector<TraceRow> window_rows(const WindowResult& r);

/// Every node's state at the end of the window, computed through H (defer mode).
std::vector<NodeState> advance_window(const Graph& g, std::span<const NodeState> snapshot, const TapeSpec& tape,
                                      const RunPlan& plan, const Window& leaf);

/// Whole run where every phase goes through H (defer mode); same trace
/// contents as run_plan without phase starts.
ExecutionTrace run_via_sparse(const Graph& g, const TapeSpec& tape, const RunPlan& plan);

struct DegreeReport {
  std::size_t max_light_degree = 0;
  std::map<std::size_t, std::size_t> histogram;  // light degree -> count
  std::uint64_t bound = 0;                       // k * L * 2^{3L+2}
  std::size_t light_violations = 0;
  std::size_t copy_violations = 0;  // copies of degree != 1, not attached to a light vertex, or adjacent twins
};

DegreeReport check_degree_bound(const SparseGraph& h, std::uint32_t k);

/// Nodes classified non-relevant that nonetheless sample or mark inside the window (should be empty).
std::vector<NodeId> relevance_audit(const Classification& cls, const ExecutionTrace& trace);

void write_sparse_graph(std::ostream& out, const SparseGraph& h);
SparseGraph read_sparse_graph(std::istream& in);

}  // namespace sparsemis
