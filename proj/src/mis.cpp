#include "sparsemis/mis.hpp"

#include <algorithm>

#include "sparsemis/parallel.hpp"

namespace sparsemis {

namespace {

struct Scratch {
  std::vector<NodeId> live;                    // ascending
  std::vector<std::vector<std::uint16_t>> samples;
  std::vector<NodeState> next;                 // parallel to live
  std::vector<std::uint32_t> dhat;
  std::vector<std::uint8_t> marked, joined;
  std::vector<std::uint8_t> is_live, is_marked;   // indexed by node
};

void check_joins(const Graph& g, const std::vector<NodeState>& states, const std::vector<NodeId>& joiners) {
  for (NodeId v : joiners)
    for (NodeId u : g.neighbors(v))
      if (states[u].status == Status::InMIS)
        throw InvariantViolation("adjacent MIS nodes " + std::to_string(u) + "," + std::to_string(v));
}

}  // namespace

void begin_segment(const Graph& g, const Segment& seg, std::vector<NodeState>& states) {
  std::vector<std::uint8_t> participates(states.size(), 0);
  for (NodeId v = 0; v < states.size(); ++v) {
    if (states[v].status != Status::Active) continue;
    if (seg.takes_all) {
      participates[v] = 1;
      continue;
    }
    std::size_t deg = 0;
    for (NodeId u : g.neighbors(v)) deg += states[u].status == Status::Active;
    participates[v] = deg >= seg.threshold;
  }
  for (NodeId v = 0; v < states.size(); ++v) {
    NodeState& s = states[v];
    if (s.status != Status::Active) continue;
    s.asleep = !participates[v];
    if (participates[v]) {
      s.p_exp = 1;
      s.stall_end = 0;
      s.defer_at = 0;
      s.light_windows.clear();
    }
  }
}

ExecutionTrace run_plan(const Graph& g, const TapeSpec& tape, const RunPlan& plan, const RunOptions& opt) {
  const std::size_t n = g.node_count();
  const int B = tape.precision_bits;
  const std::uint32_t k = tape.repetitions;
  const bool sampled_variant = plan.variant != Variant::Base;

  ExecutionTrace trace;
  trace.node_count = n;
  trace.iterations = plan.total_iterations;
  std::vector<NodeState> states(n);

  Scratch sc;
  sc.is_live.assign(n, 0);
  sc.is_marked.assign(n, 0);
  std::vector<std::uint32_t> slot_of(n, 0);

  for (const Segment& seg : plan.segments) {
    if (segmented(plan)) begin_segment(g, seg, states);
    for (std::uint32_t t = seg.first; t <= seg.last; ++t) {
      sc.live.clear();
      for (NodeId v = 0; v < n; ++v)
        if (states[v].live()) sc.live.push_back(v);
      if (sc.live.empty()) break;
      trace.executed = t;

      const auto& leaf = plan.leaf_at(t);
      if (opt.record_phase_starts && sampled_variant && leaf.start == t) trace.phase_starts.push_back({leaf, states});
      const std::vector<Window> starting = sampled_variant ? plan.starting_at(t) : std::vector<Window>{};

      const std::size_t m = sc.live.size();
      for (std::size_t i = 0; i < m; ++i) {
        sc.is_live[sc.live[i]] = 1;
        slot_of[sc.live[i]] = static_cast<std::uint32_t>(i);
      }
      sc.samples.assign(m, {});
      sc.next.assign(m, {});
      sc.dhat.assign(m, 0);
      sc.marked.assign(m, 0);
      sc.joined.assign(m, 0);

      if (sampled_variant)
        detail::parallel_for(opt.workers, m, [&](std::size_t i) {
          const NodeId v = sc.live[i];
          sc.samples[i] = sampled_repetitions(tape, v, t, states[v].p_exp);
        });

      detail::parallel_for(opt.workers, m, [&](std::size_t i) {
        const NodeId v = sc.live[i];
        NodeState s = states[v];
        Weight d = 0;
        for (NodeId u : g.neighbors(v))
          if (sc.is_live[u]) d += weight_of(states[u].p_exp);
        bool halve = false, stalled = false;
        if (sampled_variant) {
          std::vector<std::uint32_t> sums(k, 0);
          for (NodeId u : g.neighbors(v))
            if (sc.is_live[u])
              for (auto j : sc.samples[slot_of[u]]) ++sums[j];
          const std::uint32_t dh = lower_median(std::move(sums));
          sc.dhat[i] = dh;
          if (!starting.empty()) apply_window_starts(s, d, dh, starting, plan.strict_stall);
          apply_goodness_check(s, dh);
          stalled = s.stalled_at(t);
          halve = dh >= 2 || stalled;
        } else {
          sc.dhat[i] = weight_floor(d);
          halve = weight_at_least_pow2(d, 1);
        }
        s.p_exp = updated_exponent(s.p_exp, halve, B);
        if (!stalled) sc.marked[i] = below_scaled(B, s.p_exp, tape_value(tape, v, t, Slot::mark()));
        sc.next[i] = std::move(s);
      });

      for (std::size_t i = 0; i < m; ++i) sc.is_marked[sc.live[i]] = sc.marked[i];
      detail::parallel_for(opt.workers, m, [&](std::size_t i) {
        if (!sc.marked[i]) return;
        for (NodeId u : g.neighbors(sc.live[i]))
          if (sc.is_marked[u]) return;
        sc.joined[i] = 1;
      });

      // commit
      std::vector<NodeId> joiners;
      for (std::size_t i = 0; i < m; ++i) {
        states[sc.live[i]] = std::move(sc.next[i]);
        if (sc.joined[i]) joiners.push_back(sc.live[i]);
      }
      if (opt.check_invariants) check_joins(g, states, joiners);
      for (NodeId v : joiners) {
        states[v].status = Status::InMIS;
        states[v].decided_at = t;
        states[v].pending_removal = false;
      }
      for (NodeId v : joiners)
        for (NodeId u : g.neighbors(v)) dominate(states[u], t);
      for (NodeId v : sc.live) finish_iteration(states[v], t);

      if (opt.check_invariants)
        for (NodeId v : sc.live)
          if (states[v].p_exp < 1 || states[v].p_exp > B)
            throw InvariantViolation("probability exponent out of range at node " + std::to_string(v));

      if (opt.record_rows)
        for (std::size_t i = 0; i < m; ++i) {
          const NodeId v = sc.live[i];
          const NodeState& s = states[v];
          trace.rows.push_back({t, v, static_cast<std::uint8_t>(s.p_exp), sc.dhat[i],
                                static_cast<std::uint16_t>(sc.samples.empty() ? 0 : sc.samples[i].size()),
                                sc.marked[i] != 0, sampled_variant && s.stalled_at(t), s.status});
        }
      for (NodeId v : sc.live) {
        sc.is_live[v] = 0;
        sc.is_marked[v] = 0;
      }
    }
  }

  trace.mis = NodeSet(n);
  trace.survivors = NodeSet(n);
  trace.post_shatter_joined = NodeSet(n);
  for (NodeId v = 0; v < n; ++v) {
    if (states[v].status == Status::InMIS) trace.mis.insert(v);
    if (states[v].status == Status::Active || states[v].status == Status::Deferred) trace.survivors.insert(v);
  }
  trace.final_states = std::move(states);
  return trace;
}

ExecutionTrace run_base_mis(const Graph& g, const TapeSpec& tape, std::uint32_t T, const RunOptions& opt) {
  return run_plan(g, tape, make_base_plan(T), opt);
}

ExecutionTrace run_sparsified_mis(const Graph& g, const TapeSpec& tape, const MisParams& params,
                                  const RunOptions& opt) {
  return run_plan(g, tape, make_plan(g, params, Variant::Sparsified), opt);
}

ExecutionTrace run_recursive_mis(const Graph& g, const TapeSpec& tape, const MisParams& params,
                                 const RunOptions& opt) {
  return run_plan(g, tape, make_plan(g, params, Variant::Recursive), opt);
}

ExecutionTrace post_shatter(const Graph& g, ExecutionTrace trace) {
  const std::size_t n = g.node_count();
  if (trace.post_shatter_joined.universe() != n) trace.post_shatter_joined = NodeSet(n);
  for (NodeId v : trace.survivors.members()) {
    bool blocked = false;
    for (NodeId u : g.neighbors(v))
      if (trace.mis.contains(u)) {
        blocked = true;
        break;
      }
    if (blocked) continue;
    trace.mis.insert(v);
    trace.post_shatter_joined.insert(v);
  }
  trace.post_shattered = true;
  return trace;
}

std::uint32_t estimate_dhat(const Graph& g, NodeId v, std::span<const NodeState> snapshot, const TapeSpec& tape,
                            std::uint32_t t) {
  std::vector<std::uint32_t> sums(tape.repetitions, 0);
  for (NodeId u : g.neighbors(v)) {
    if (!snapshot[u].live()) continue;
    for (auto j : sampled_repetitions(tape, u, t, snapshot[u].p_exp)) ++sums[j];
  }
  return lower_median(std::move(sums));
}

std::vector<TraceRow> replay_base_iteration(const Graph& g, const TapeSpec& tape, const ExecutionTrace& trace,
                                            std::uint32_t t) {
  const std::size_t n = g.node_count();
  std::vector<std::uint8_t> active(n, 0);
  std::vector<int> p_exp(n, 1);
  if (t == 1) {
    std::fill(active.begin(), active.end(), 1);
  } else {
    for (const TraceRow& r : trace.rows)
      if (r.iteration == t - 1 && r.status == Status::Active) {
        active[r.node] = 1;
        p_exp[r.node] = r.p_exp;
      }
  }
  std::vector<std::uint8_t> marked(n, 0);
  std::vector<TraceRow> rows;
  for (NodeId v = 0; v < n; ++v) {
    if (!active[v]) continue;
    Weight d = 0;
    for (NodeId u : g.neighbors(v))
      if (active[u]) d += weight_of(p_exp[u]);
    TraceRow r;
    r.iteration = t;
    r.node = v;
    r.p_exp = static_cast<std::uint8_t>(updated_exponent(p_exp[v], weight_at_least_pow2(d, 1), tape.precision_bits));
    r.dhat = weight_floor(d);
    r.marked = below_scaled(tape.precision_bits, r.p_exp, tape_value(tape, v, t, Slot::mark()));
    marked[v] = r.marked;
    rows.push_back(r);
  }
  std::vector<std::uint8_t> joined(n, 0);
  for (const TraceRow& r : rows) {
    if (!r.marked) continue;
    bool alone = true;
    for (NodeId u : g.neighbors(r.node)) alone = alone && !marked[u];
    joined[r.node] = alone;
  }
  for (TraceRow& r : rows) {
    if (joined[r.node]) {
      r.status = Status::InMIS;
      continue;
    }
    for (NodeId u : g.neighbors(r.node))
      if (joined[u]) r.status = Status::Removed;
  }
  return rows;
}

}  // namespace sparsemis
