#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_set>
#include <variant>
#include <vector>

#include "sparsemis/mis.hpp"
#include "sparsemis/sparsifier.hpp"

namespace sparsemis {

enum class ProbeMode { Faithful, Memoized };
enum class LcaVariant { Chained, Recursive };
enum class AnswerPath { MainRun, PostShatter };

std::string_view to_string(ProbeMode m);
std::string_view to_string(LcaVariant v);
std::string_view to_string(AnswerPath p);
std::optional<LcaVariant> parse_lca_variant(std::string_view name);

/// Probe counts. Counters saturate at UINT64_MAX: faithful recursive
/// accounting outgrows 64 bits quickly.
struct QueryLedger {
  std::uint64_t total = 0;
  std::vector<std::uint64_t> by_level;
  std::map<NodeId, std::uint64_t> by_node;

  void charge(std::size_t level, std::uint64_t count);
};

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b);

/// Query access to a graph: probe(v) returns v's adjacency and is debited
/// once per call (Faithful) or once per distinct node (Memoized).
class GraphAccess {
 public:
  GraphAccess(const Graph& g, QueryLedger& ledger, ProbeMode mode = ProbeMode::Faithful);

  std::span<const NodeId> probe(NodeId v, std::size_t level = 0);
  /// Debits `count` probes at once (replayed cost of a pure sub-evaluation).
  void charge(std::size_t level, std::uint64_t count) { ledger_->charge(level, count); }
  bool probed(NodeId v) const { return seen_[v] != 0; }
  /// Memoized mode: records that a cached evaluation's probes were already
  /// debited here; returns false if it was.
  bool first_replay(std::uint64_t token) { return replayed_.insert(token).second; }

  ProbeMode mode() const { return mode_; }
  const Graph& graph() const { return *g_; }
  QueryLedger& ledger() { return *ledger_; }

 private:
  const Graph* g_;
  QueryLedger* ledger_;
  ProbeMode mode_;
  std::vector<std::uint8_t> seen_;
  std::unordered_set<std::uint64_t> replayed_;
};

struct PhaseOutcome {
  NodeState state;  // at the end of the phase
  int p_exp = 1;
  bool joined = false;
  bool deferred = false;
  friend bool operator==(const PhaseOutcome&, const PhaseOutcome&) = default;
};

struct LcaAnswer {
  NodeId node = 0;
  bool in_mis = false;
  std::uint64_t probes_used = 0;
  std::vector<std::uint64_t> probes_by_level;  // one per phase, then post-shattering
  AnswerPath path = AnswerPath::MainRun;
  friend bool operator==(const LcaAnswer&, const LcaAnswer&) = default;
};

/// Phase oracles over one (graph, tape, params). Results of pure
/// sub-evaluations are cached; each query replays their probe cost into its
/// own GraphAccess, so answers and probe counts do not depend on query order.
class LcaOracle {
 public:
  LcaOracle(const Graph& g, const TapeSpec& tape, const MisParams& params, LcaVariant variant);

  const RunPlan& plan() const { return plan_; }
  std::size_t phase_count() const { return phases_.size(); }
  const Window& phase(std::size_t i) const { return phases_[i]; }

  /// O_i: v's state at the end of phase i.
  PhaseOutcome oracle_phase(std::size_t i, NodeId v, GraphAccess& access);
  /// v's state at the end of window w of the recursion tree.
  PhaseOutcome recursive_oracle(NodeId v, const Window& w, GraphAccess& access);
  LcaAnswer answer(NodeId v, GraphAccess& access);

 private:
  struct Key {
    std::vector<std::uint32_t> deps;
    std::vector<std::uint64_t> cost;  // faithful probes per level, memoized
    bool probe = false;               // class keys of live nodes probe their node
    bool done = false;
  };

  std::uint32_t class_key(std::size_t i, NodeId v) const { return static_cast<std::uint32_t>(i * n_ + v); }
  std::uint32_t traj_key(std::size_t i, NodeId v) const {
    return static_cast<std::uint32_t>((phases_.size() + i) * n_ + v);
  }
  const NodeState& start_state(std::size_t i, NodeId v, std::vector<std::uint32_t>& deps);
  const NodeClass& node_class(std::size_t i, NodeId v);
  const Trajectory& trajectory(std::size_t i, NodeId v);
  const NodeState& end_state(std::size_t i, NodeId v) { return trajectory(i, v).final_state; }
  const std::vector<std::uint64_t>& cost(std::uint32_t key);
  /// Debits the probes of evaluating `root` from scratch; returns them per level.
  std::vector<std::uint64_t> replay(std::uint32_t root, GraphAccess& access);
  PhaseOutcome outcome(const NodeState& s) const;

  const Graph& g_;
  std::uint64_t id_;  // distinguishes oracles sharing one access
  TapeSpec tape_;
  RunPlan plan_;
  std::vector<Window> phases_;
  std::size_t n_;
  NodeState initial_;
  std::vector<Key> keys_;
  std::vector<NodeClass> classes_;
  std::vector<Trajectory> trajectories_;
};

LcaAnswer lca_answer(NodeId v, GraphAccess& access, const TapeSpec& tape, const MisParams& params,
                     LcaVariant variant);

/// Reads the (3T-2)-ball of v (everything v's Algorithm 1 membership after T
/// iterations depends on) and runs Algorithm 1 on it.
LcaAnswer parnas_ron_baseline(NodeId v, GraphAccess& access, const TapeSpec& tape, std::uint32_t T);

struct Consistent {
  friend bool operator==(const Consistent&, const Consistent&) = default;
};
struct Conflict {
  std::vector<NodeId> witness;  // an adjacent pair, or an undominated non-member
  friend bool operator==(const Conflict&, const Conflict&) = default;
};
using Consistency = std::variant<Consistent, Conflict>;

Consistency consistency_audit(std::span<const LcaAnswer> answers, const Graph& g);

}  // namespace sparsemis
