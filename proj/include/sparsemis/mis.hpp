#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sparsemis/dynamics.hpp"
#include "sparsemis/graph.hpp"
#include "sparsemis/tape.hpp"

namespace sparsemis {

enum class Variant { Base, Sparsified, Recursive };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct MisParams {
  double alpha = 0.5;
  double c_iterations = 4.0;          // T = ceil(c * log2 Delta)
  double C_sampling = 1.0;            // k = ceil(12 * C * log2 Delta)
  std::uint32_t phase_length_R = 0;   // 0 = auto
  std::uint32_t recursion_base = 0;   // 0 = auto
  std::uint32_t iterations = 0;       // 0 = derived from c
  std::uint32_t repetitions = 0;      // 0 = derived from C
  bool degree_steps = false;

  void validate() const;
  friend bool operator==(const MisParams&, const MisParams&) = default;
};

std::uint32_t derived_iterations(double c, std::size_t max_degree);
std::uint32_t derived_repetitions(double C, std::size_t max_degree);
std::uint32_t auto_phase_length(double alpha, std::size_t max_degree);
std::uint32_t auto_recursion_base(std::size_t max_degree, std::uint32_t T);

/// Thresholds floor(Delta^{2^-i}), deduplicated, ending at 1 (the step that takes every remaining node).
std::vector<std::size_t> plan_degree_steps(std::size_t max_degree);

/// One degree step: iterations [first, last]; participants are the Active
/// nodes with at least `threshold` Active neighbors at its start, or all
/// Active nodes when `takes_all`.
struct Segment {
  std::uint32_t first = 1;
  std::uint32_t last = 1;
  std::size_t threshold = 0;
  bool takes_all = true;
  std::vector<Window> windows;  // every window, ordered by (start, level)
  std::vector<Window> leaves;   // partition of [first, last]
};

struct RunPlan {
  Variant variant = Variant::Base;
  std::uint32_t total_iterations = 1;
  std::uint32_t repetitions = 1;
  std::uint32_t phase_length = 1;    // Sparsified
  std::uint32_t recursion_base = 1;  // Recursive
  bool strict_stall = false;
  std::vector<Segment> segments;

  const Segment& segment_at(std::uint32_t t) const;
  /// Windows whose first iteration is t, coarse to fine.
  std::vector<Window> starting_at(std::uint32_t t) const;
  const Window& leaf_at(std::uint32_t t) const;
};

/// Degree-step boundary: picks the step's participants, puts the others to
/// sleep and resets the participants' probability to 1/2.
void begin_segment(const Graph& g, const Segment& seg, std::vector<NodeState>& states);
inline bool segmented(const RunPlan& plan) { return plan.segments.size() > 1 || !plan.segments.front().takes_all; }

RunPlan make_plan(const Graph& g, const MisParams& params, Variant variant);
/// Algorithm 1 for exactly T iterations.
RunPlan make_base_plan(std::uint32_t T);

/// Tape wide enough for the plan, validated against the graph.
TapeSpec make_tape_spec(std::uint64_t seed, const RunPlan& plan, const Graph& g, int precision_bits = 64);

/// Nested halving of [first, last] (first half ceil(L/2)) down to length <= base.
std::vector<Window> window_tree(std::uint32_t first, std::uint32_t last, std::uint32_t base);

struct TraceRow {
  std::uint32_t iteration = 0;
  NodeId node = 0;
  std::uint8_t p_exp = 1;     // p_t = 2^-p_exp
  std::uint32_t dhat = 0;     // estimate d^_{t-1}; floor(d_{t-1}) for Algorithm 1
  std::uint16_t sampled = 0;  // repetitions in which the node was sampled
  bool marked = false;
  bool stalled = false;
  Status status = Status::Active;  // after iteration t
  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// States (as at the end of iteration leaf.start - 1) before a leaf window opens.
struct PhaseStart {
  Window leaf;
  std::vector<NodeState> states;
};

struct ExecutionTrace {
  std::size_t node_count = 0;
  std::uint32_t iterations = 0;  // planned T
  std::uint32_t executed = 0;    // iterations actually run before no live node remained
  std::vector<TraceRow> rows;    // ordered by (iteration, node)
  std::vector<NodeState> final_states;
  NodeSet mis;
  NodeSet survivors;  // Active or Deferred after the main run
  NodeSet post_shatter_joined;
  bool post_shattered = false;
  std::vector<PhaseStart> phase_starts;

  friend bool operator==(const ExecutionTrace& a, const ExecutionTrace& b) {
    return a.node_count == b.node_count && a.iterations == b.iterations && a.executed == b.executed &&
           a.rows == b.rows && a.final_states == b.final_states && a.mis == b.mis &&
           a.survivors == b.survivors && a.post_shatter_joined == b.post_shatter_joined &&
           a.post_shattered == b.post_shattered;
  }
};

/// Raised when an engine observes a violated invariant.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

struct RunOptions {
  unsigned workers = 1;
  bool record_rows = true;
  bool record_phase_starts = false;
  bool check_invariants = true;
};

ExecutionTrace run_base_mis(const Graph& g, const TapeSpec& tape, std::uint32_t T, const RunOptions& opt = {});
ExecutionTrace run_sparsified_mis(const Graph& g, const TapeSpec& tape, const MisParams& params,
                                  const RunOptions& opt = {});
ExecutionTrace run_recursive_mis(const Graph& g, const TapeSpec& tape, const MisParams& params,
                                 const RunOptions& opt = {});
/// Runs any plan; the three entry points above delegate here.
ExecutionTrace run_plan(const Graph& g, const TapeSpec& tape, const RunPlan& plan, const RunOptions& opt = {});

ExecutionTrace post_shatter(const Graph& g, ExecutionTrace trace);

/// Median estimate for live node v against the given start-of-iteration states.
std::uint32_t estimate_dhat(const Graph& g, NodeId v, std::span<const NodeState> snapshot, const TapeSpec& tape,
                            std::uint32_t t);

/// Recomputes the Algorithm 1 rows of iteration t from the rows of t-1
/// (p and Active set at t-1 read off the trace).
std::vector<TraceRow> replay_base_iteration(const Graph& g, const TapeSpec& tape, const ExecutionTrace& trace,
                                            std::uint32_t t);

// Serialization.
void write_trace_csv(std::ostream& out, const ExecutionTrace& trace);
void write_trace_binary(std::ostream& out, const ExecutionTrace& trace);
/// Reads rows and summary sets; final states, phase starts are not stored.
ExecutionTrace read_trace_binary(std::istream& in);

}  // namespace sparsemis
