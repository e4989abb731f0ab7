#include "sparsemis/sparsifier.hpp"

#include <algorithm>
#include <istream>
#include <json.hpp>
#include <ostream>

namespace sparsemis {

namespace {

using json = nlohmann::json;

std::vector<Fraction> tape_slice(const TapeSpec& tape, NodeId v, const Window& w) {
  std::vector<Fraction> out;
  out.reserve(static_cast<std::size_t>(w.length()) * (tape.repetitions + 1));
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    const std::uint64_t prefix = tape_prefix(tape, v, i);
    for (std::uint32_t j = 0; j <= tape.repetitions; ++j) out.push_back(tape_draw(tape, prefix, Slot{j}));
  }
  return out;
}

bool is_relevant(const TapeSpec& tape, NodeId v, int p_exp, const Window& w) {
  const int L = static_cast<int>(w.length());
  const int B = tape.precision_bits;
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    const std::uint64_t prefix = tape_prefix(tape, v, i);
    if (below_scaled(B, p_exp - L - 1, tape_draw(tape, prefix, Slot::mark()))) return true;
    for (std::uint32_t j = 1; j <= tape.repetitions; ++j)
      if (below_scaled(B, p_exp - L, tape_draw(tape, prefix, Slot::sample(j)))) return true;
  }
  return false;
}

template <class NeighborsOf, class IsVertex, class IsCopy, class Decided>
SparseGraph assemble(std::size_t n, const Window& leaf, const TapeSpec& tape, NeighborsOf neighbors_of,
                     IsVertex is_vertex, IsCopy is_copy, Decided decided) {
  SparseGraph h;
  h.window = leaf;
  h.repetitions = tape.repetitions;
  h.precision_bits = tape.precision_bits;
  std::vector<std::uint32_t> light_index(n, UINT32_MAX);
  std::vector<std::pair<NodeId, NodeId>> copy_of;  // (origin, light neighbor), parallel to vertices
  for (NodeId v = 0; v < n; ++v) {
    if (is_vertex(v)) {
      light_index[v] = static_cast<std::uint32_t>(h.vertices.size());
      h.vertices.push_back({v, 0, {decided(v), tape_slice(tape, v, leaf)}});
      copy_of.emplace_back(v, v);
    } else if (is_copy(v)) {
      std::uint32_t index = 0;
      for (NodeId u : neighbors_of(v)) {
        if (!is_vertex(u)) continue;
        h.vertices.push_back({v, ++index, {decided(v), tape_slice(tape, v, leaf)}});
        copy_of.emplace_back(v, u);
      }
    }
  }
  for (std::uint32_t a = 0; a < h.vertices.size(); ++a) {
    const NodeId v = h.vertices[a].origin;
    if (h.vertices[a].copy_index == 0) {
      for (NodeId u : neighbors_of(v))
        if (u > v && light_index[u] != UINT32_MAX) h.edges.emplace_back(a, light_index[u]);
    } else {
      const std::uint32_t b = light_index[copy_of[a].second];
      h.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(h.edges.begin(), h.edges.end());
  return h;
}

Trajectory make_trajectory(const Window& w) {
  Trajectory t;
  t.window = w;
  const std::size_t L = w.length();
  t.p_before.assign(L, 0);
  t.live.assign(L, 0);
  t.marked.assign(L, 0);
  t.joined.assign(L, 0);
  t.dhat.assign(L, 0);
  t.sampled.assign(L, 0);
  t.p_after.assign(L, 0);
  t.stalled.assign(L, 0);
  t.status_after.assign(L, Status::Active);
  return t;
}

}  // namespace

LocalView local_view(const Graph& g, std::span<const NodeState> snapshot, NodeId v) {
  LocalView view;
  view.node = v;
  view.state = snapshot[v];
  for (NodeId u : g.neighbors(v)) {
    view.neighbors.push_back(u);
    view.neighbor_states.push_back(snapshot[u]);
  }
  return view;
}

NodeClass classify_node(const LocalView& view, const TapeSpec& tape, const RunPlan& plan, const Window& leaf) {
  NodeClass c;
  c.decided = view.state;
  c.live = view.state.live();
  if (!c.live) return c;
  const std::uint32_t L = leaf.length();
  std::vector<std::uint32_t> sums(tape.repetitions, 0);
  for (std::size_t i = 0; i < view.neighbors.size(); ++i) {
    const NodeState& s = view.neighbor_states[i];
    if (!s.live()) continue;
    c.d += weight_of(s.p_exp);
    for (auto j : sampled_repetitions(tape, view.neighbors[i], leaf.start, s.p_exp)) ++sums[j];
  }
  c.dhat = lower_median(std::move(sums));
  const auto starting = plan.starting_at(leaf.start);
  apply_window_starts(c.decided, c.d, c.dhat, starting, plan.strict_stall);
  c.stalled = c.decided.stalled_at(leaf.start);
  c.light = !weight_at_least_pow2(c.d, static_cast<int>(2 * L + 1));
  c.relevant = is_relevant(tape, view.node, view.state.p_exp, leaf);
  return c;
}

Classification classify_nodes(const Graph& g, std::span<const NodeState> snapshot, const TapeSpec& tape,
                              const RunPlan& plan, const Window& leaf, GoodnessMode mode,
                              const ExecutionTrace* reference) {
  Classification cls;
  cls.window = leaf;
  cls.nodes.reserve(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) cls.nodes.push_back(classify_node(local_view(g, snapshot, v), tape, plan, leaf));
  if (mode == GoodnessMode::OracleGoodness) {
    if (!reference) throw ConfigError("oracle-goodness classification needs a reference trace");
    const std::uint32_t bound_exp = 3 * leaf.length() + 2;
    auto lo = std::lower_bound(reference->rows.begin(), reference->rows.end(), leaf.start,
                               [](const TraceRow& r, std::uint32_t t) { return r.iteration < t; });
    for (; lo != reference->rows.end() && lo->iteration <= leaf.end; ++lo)
      if (above_pow2(lo->dhat, bound_exp)) cls.nodes[lo->node].good = false;
  }
  return cls;
}

std::vector<std::vector<std::uint32_t>> SparseGraph::adjacency() const {
  std::vector<std::vector<std::uint32_t>> adj(vertices.size());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

std::size_t SparseGraph::words() const {
  std::size_t w = edges.size();
  for (const auto& v : vertices) w += 1 + v.label.tape.size();
  return w;
}

SparseGraph build_sparse_graph(const Graph& g, const Classification& cls, const TapeSpec& tape) {
  return assemble(
      g.node_count(), cls.window, tape, [&](NodeId v) { return g.neighbors(v); },
      [&](NodeId v) { return cls.nodes[v].vertex(); }, [&](NodeId v) { return cls.nodes[v].copy(); },
      [&](NodeId v) { return cls.nodes[v].decided; });
}

SparseGraph build_sparse_graph_from_views(std::span<const LocalView> views, std::span<const NodeClass> classes,
                                          const TapeSpec& tape, const Window& leaf) {
  return assemble(
      views.size(), leaf, tape, [&](NodeId v) { return std::span<const NodeId>(views[v].neighbors); },
      [&](NodeId v) { return classes[v].vertex(); }, [&](NodeId v) { return classes[v].copy(); },
      [&](NodeId v) { return classes[v].decided; });
}

std::vector<SparseOutcome> simulate_phase_on_sparse(const SparseGraph& h) {
  const std::size_t nv = h.vertices.size();
  const Window& w = h.window;
  const std::uint32_t L = w.length(), k = h.repetitions;
  const int B = h.precision_bits;
  const auto adj = h.adjacency();
  for (const auto& v : h.vertices)
    if (v.label.tape.size() != static_cast<std::size_t>(L) * (k + 1))
      throw LabelError("label of node " + std::to_string(v.origin) + " does not cover the window");

  std::vector<NodeState> st(nv);
  std::vector<Trajectory> traj;
  std::vector<std::uint32_t> traj_of(nv, UINT32_MAX);
  for (std::uint32_t a = 0; a < nv; ++a) {
    st[a] = h.vertices[a].label.state;
    if (h.vertices[a].copy_index == 0) {
      traj_of[a] = static_cast<std::uint32_t>(traj.size());
      traj.push_back(make_trajectory(w));
    }
  }

  std::vector<std::vector<std::uint16_t>> samples(nv);
  std::vector<std::uint8_t> live(nv), marked(nv), joined(nv);
  std::vector<std::uint32_t> dhat(nv), sums(k);
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    const std::size_t base = static_cast<std::size_t>(i - w.start) * (k + 1);
    for (std::uint32_t a = 0; a < nv; ++a) {
      live[a] = st[a].live();
      samples[a].clear();
      marked[a] = joined[a] = 0;
      if (!live[a]) continue;
      for (std::uint32_t j = 1; j <= k; ++j)
        if (below_scaled(B, st[a].p_exp, h.vertices[a].label.tape[base + j])) samples[a].push_back(static_cast<std::uint16_t>(j - 1));
    }
    for (std::uint32_t a = 0; a < nv; ++a) {
      if (traj_of[a] != UINT32_MAX) {
        auto& tr = traj[traj_of[a]];
        tr.p_before[i - w.start] = static_cast<std::uint8_t>(st[a].p_exp);
        tr.live[i - w.start] = live[a];
      }
      if (!live[a]) continue;
      std::fill(sums.begin(), sums.end(), 0);
      for (auto b : adj[a])
        if (live[b])
          for (auto j : samples[b]) ++sums[j];
      dhat[a] = lower_median_in_place(sums);
    }
    for (std::uint32_t a = 0; a < nv; ++a) {
      if (!live[a]) continue;
      NodeState& s = st[a];
      apply_goodness_check(s, dhat[a]);
      const bool stalled = s.stalled_at(i);
      s.p_exp = updated_exponent(s.p_exp, dhat[a] >= 2 || stalled, B);
      if (!stalled) marked[a] = below_scaled(B, s.p_exp, h.vertices[a].label.tape[base]);
    }
    for (std::uint32_t a = 0; a < nv; ++a) {
      if (!marked[a]) continue;
      bool alone = true;
      for (auto b : adj[a]) alone = alone && !marked[b];
      joined[a] = alone;
    }
    for (std::uint32_t a = 0; a < nv; ++a)
      if (joined[a]) {
        st[a].status = Status::InMIS;
        st[a].decided_at = i;
        st[a].pending_removal = false;
      }
    for (std::uint32_t a = 0; a < nv; ++a)
      if (joined[a])
        for (auto b : adj[a]) dominate(st[b], i);
    for (std::uint32_t a = 0; a < nv; ++a) {
      if (!live[a]) continue;
      finish_iteration(st[a], i);
      if (traj_of[a] != UINT32_MAX) {
        auto& tr = traj[traj_of[a]];
        const std::size_t idx = i - w.start;
        tr.marked[idx] = marked[a];
        tr.joined[idx] = joined[a];
        tr.dhat[idx] = dhat[a];
        tr.sampled[idx] = static_cast<std::uint16_t>(samples[a].size());
        tr.p_after[idx] = static_cast<std::uint8_t>(st[a].p_exp);
        tr.stalled[idx] = st[a].stalled_at(i);
        tr.status_after[idx] = st[a].status;
      }
    }
  }

  std::vector<SparseOutcome> out;
  for (std::uint32_t a = 0; a < nv; ++a) {
    if (traj_of[a] == UINT32_MAX) continue;
    SparseOutcome o;
    o.origin = h.vertices[a].origin;
    o.p_exp = st[a].p_exp;
    o.joined = st[a].status == Status::InMIS;
    o.deferred = st[a].status == Status::Deferred ||
                 (st[a].status == Status::Active && st[a].defer_at != 0 && !st[a].pending_removal);
    o.trajectory = std::move(traj[traj_of[a]]);
    o.trajectory.final_state = st[a];
    out.push_back(std::move(o));
  }
  return out;
}

Trajectory predicted_stall(const NodeState& decided, const Window& w, int precision_bits) {
  Trajectory t = make_trajectory(w);
  NodeState s = decided;
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    t.p_before[i - w.start] = static_cast<std::uint8_t>(s.p_exp);
    t.live[i - w.start] = s.live();
    if (!s.live()) continue;
    s.p_exp = updated_exponent(s.p_exp, true, precision_bits);
    finish_iteration(s, i);
    t.p_after[i - w.start] = static_cast<std::uint8_t>(s.p_exp);
    t.stalled[i - w.start] = 1;
    t.status_after[i - w.start] = s.status;
  }
  t.final_state = s;
  return t;
}

Trajectory follow_trajectory(NodeId v, const NodeState& decided, std::span<const NodeId> neighbors,
                             std::span<const Trajectory* const> neighbor_traj, const TapeSpec& tape,
                             const Window& w) {
  Trajectory t = make_trajectory(w);
  NodeState s = decided;
  const int B = tape.precision_bits;
  auto neighbor_live = [&](std::size_t n, std::size_t idx) { return neighbor_traj[n] && neighbor_traj[n]->live[idx]; };
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    const std::size_t idx = i - w.start;
    t.p_before[idx] = static_cast<std::uint8_t>(s.p_exp);
    t.live[idx] = s.live();
    bool dominated = false;
    for (std::size_t n = 0; n < neighbors.size(); ++n)
      dominated = dominated || (neighbor_traj[n] && neighbor_traj[n]->joined[idx]);
    if (s.status == Status::Active && s.asleep) {
      if (dominated) dominate(s, i);
      continue;
    }
    if (!s.live()) continue;
    std::vector<std::uint32_t> sums(tape.repetitions, 0);
    for (std::size_t n = 0; n < neighbors.size(); ++n)
      if (neighbor_live(n, idx))
        for (auto j : sampled_repetitions(tape, neighbors[n], i, neighbor_traj[n]->p_before[idx])) ++sums[j];
    const std::uint32_t dh = lower_median(std::move(sums));
    t.dhat[idx] = dh;
    t.sampled[idx] = static_cast<std::uint16_t>(sampled_repetitions(tape, v, i, s.p_exp).size());
    apply_goodness_check(s, dh);
    const bool stalled = s.stalled_at(i);
    s.p_exp = updated_exponent(s.p_exp, dh >= 2 || stalled, B);
    bool mark = !stalled && below_scaled(B, s.p_exp, tape_value(tape, v, i, Slot::mark()));
    t.marked[idx] = mark;
    if (mark) {
      bool alone = true;
      for (std::size_t n = 0; n < neighbors.size(); ++n)
        alone = alone && !(neighbor_live(n, idx) && neighbor_traj[n]->marked[idx]);
      if (alone) {
        t.joined[idx] = 1;
        s.status = Status::InMIS;
        s.decided_at = i;
        s.pending_removal = false;
      }
    }
    if (!t.joined[idx] && dominated) dominate(s, i);
    finish_iteration(s, i);
    t.p_after[idx] = static_cast<std::uint8_t>(s.p_exp);
    t.stalled[idx] = s.stalled_at(i);
    t.status_after[idx] = s.status;
  }
  t.final_state = s;
  return t;
}

Trajectory outside_view(const NodeClass& c, const Window& w, int precision_bits) {
  if (c.stalled) return predicted_stall(c.decided, w, precision_bits);
  // never sampled and never marks in this window, so p is immaterial to neighbors
  Trajectory t = make_trajectory(w);
  std::fill(t.p_before.begin(), t.p_before.end(), static_cast<std::uint8_t>(c.decided.p_exp));
  std::fill(t.live.begin(), t.live.end(), 1);
  return t;
}

VertexLabel make_label(const TapeSpec& tape, NodeId v, const NodeState& decided, const Window& w) {
  return {decided, tape_slice(tape, v, w)};
}

WindowResult complete_window(const Graph& g, std::span<const NodeState> snapshot, const Classification& cls,
                             std::vector<SparseOutcome> outcomes, const TapeSpec& tape) {
  const std::size_t n = g.node_count();
  const Window& leaf = cls.window;
  WindowResult res;
  res.trajectories.resize(n);
  auto& traj = res.trajectories;
  std::vector<std::uint8_t> have(n, 0);
  for (auto& o : outcomes) {
    traj[o.origin] = std::move(o.trajectory);
    have[o.origin] = 1;
  }
  // what neighbors see of nodes outside H
  std::vector<Trajectory> seen(n);
  for (NodeId v = 0; v < n; ++v) {
    const NodeClass& c = cls.nodes[v];
    if (!c.live || have[v]) continue;
    seen[v] = outside_view(c, leaf, tape.precision_bits);
  }
  res.states.assign(snapshot.begin(), snapshot.end());
  std::vector<const Trajectory*> nb;
  for (NodeId v = 0; v < n; ++v) {
    if (have[v]) {
      res.states[v] = traj[v].final_state;
      continue;
    }
    if (snapshot[v].status != Status::Active) continue;
    nb.clear();
    for (NodeId u : g.neighbors(v)) {
      if (!cls.nodes[u].live) nb.push_back(nullptr);
      else nb.push_back(have[u] ? &traj[u] : &seen[u]);
    }
    traj[v] = follow_trajectory(v, cls.nodes[v].decided, g.neighbors(v), nb, tape, leaf);
    res.states[v] = traj[v].final_state;
  }
  return res;
}

std::vector<TraceRow> window_rows(const WindowResult& r) {
  std::vector<TraceRow> rows;
  if (r.trajectories.empty()) return rows;
  auto first = std::find_if(r.trajectories.begin(), r.trajectories.end(),
                            [](const Trajectory& t) { return !t.live.empty(); });
  if (first == r.trajectories.end()) return rows;
  const Window w = first->window;
  for (std::uint32_t i = w.start; i <= w.end; ++i) {
    const std::size_t idx = i - w.start;
    for (NodeId v = 0; v < r.trajectories.size(); ++v) {
      const Trajectory& t = r.trajectories[v];
      if (t.live.empty() || !t.live[idx]) continue;
      rows.push_back({i, v, t.p_after[idx], t.dhat[idx], t.sampled[idx], t.marked[idx] != 0, t.stalled[idx] != 0,
                      t.status_after[idx]});
    }
  }
  return rows;
}

std::vector<NodeState> advance_window(const Graph& g, std::span<const NodeState> snapshot, const TapeSpec& tape,
                                      const RunPlan& plan, const Window& leaf) {
  const Classification cls = classify_nodes(g, snapshot, tape, plan, leaf, GoodnessMode::DeferBad);
  return complete_window(g, snapshot, cls, simulate_phase_on_sparse(build_sparse_graph(g, cls, tape)), tape).states;
}

ExecutionTrace run_via_sparse(const Graph& g, const TapeSpec& tape, const RunPlan& plan) {
  if (plan.variant == Variant::Base) throw ConfigError("the sparse-graph engine runs the sparsified or recursive variant");
  const std::size_t n = g.node_count();
  ExecutionTrace trace;
  trace.node_count = n;
  trace.iterations = plan.total_iterations;
  std::vector<NodeState> states(n);
  for (const Segment& seg : plan.segments) {
    if (segmented(plan)) begin_segment(g, seg, states);
    for (const Window& leaf : seg.leaves) {
      if (std::none_of(states.begin(), states.end(), [](const NodeState& s) { return s.live(); })) break;
      const Classification cls = classify_nodes(g, states, tape, plan, leaf, GoodnessMode::DeferBad);
      const WindowResult wr =
          complete_window(g, states, cls, simulate_phase_on_sparse(build_sparse_graph(g, cls, tape)), tape);
      for (TraceRow& r : window_rows(wr)) {
        trace.executed = std::max(trace.executed, r.iteration);
        trace.rows.push_back(r);
      }
      states = wr.states;
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

DegreeReport check_degree_bound(const SparseGraph& h, std::uint32_t k) {
  DegreeReport r;
  const std::uint64_t L = h.window.length();
  r.bound = k * L * (std::uint64_t{1} << (3 * L + 2));
  const auto adj = h.adjacency();
  for (std::uint32_t a = 0; a < h.vertices.size(); ++a) {
    const auto& v = h.vertices[a];
    if (v.copy_index == 0) {
      const std::size_t deg = adj[a].size();
      r.max_light_degree = std::max(r.max_light_degree, deg);
      ++r.histogram[deg];
      if (deg > r.bound) ++r.light_violations;
    } else if (adj[a].size() != 1 || h.vertices[adj[a][0]].copy_index != 0) {
      ++r.copy_violations;
    }
  }
  for (auto [a, b] : h.edges)
    if (h.vertices[a].origin == h.vertices[b].origin) ++r.copy_violations;
  return r;
}

std::vector<NodeId> relevance_audit(const Classification& cls, const ExecutionTrace& trace) {
  std::vector<NodeId> bad;
  for (const TraceRow& r : trace.rows) {
    if (!cls.window.contains(r.iteration)) continue;
    const NodeClass& c = cls.nodes[r.node];
    if (c.live && !c.relevant && (r.sampled > 0 || r.marked)) bad.push_back(r.node);
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  return bad;
}

namespace {

json state_json(const NodeState& s) {
  json lw = json::array();
  for (const auto& w : s.light_windows) lw.push_back({w.end, w.length});
  return {{"status", static_cast<int>(s.status)}, {"p_exp", s.p_exp},
          {"stall_end", s.stall_end},           {"defer_at", s.defer_at},
          {"pending", s.pending_removal},       {"asleep", s.asleep},
          {"decided_at", s.decided_at},         {"light_windows", lw}};
}

NodeState state_from(const json& j) {
  NodeState s;
  s.status = static_cast<Status>(j.at("status").get<int>());
  s.p_exp = j.at("p_exp").get<int>();
  s.stall_end = j.at("stall_end").get<std::uint32_t>();
  s.defer_at = j.at("defer_at").get<std::uint32_t>();
  s.pending_removal = j.at("pending").get<bool>();
  s.asleep = j.at("asleep").get<bool>();
  s.decided_at = j.at("decided_at").get<std::uint32_t>();
  for (const auto& w : j.at("light_windows")) s.light_windows.push_back({w.at(0).get<std::uint32_t>(), w.at(1).get<std::uint32_t>()});
  return s;
}

}  // namespace

void write_sparse_graph(std::ostream& out, const SparseGraph& h) {
  json j;
  j["window"] = {h.window.start, h.window.end, h.window.level};
  j["repetitions"] = h.repetitions;
  j["precision_bits"] = h.precision_bits;
  json vs = json::array();
  for (const auto& v : h.vertices) {
    json tape = json::array();
    for (auto f : v.label.tape) tape.push_back(f.numerator);
    vs.push_back({{"origin", v.origin}, {"copy", v.copy_index}, {"state", state_json(v.label.state)}, {"tape", tape}});
  }
  j["vertices"] = std::move(vs);
  j["edges"] = h.edges;
  out << j.dump() << '\n';
}

SparseGraph read_sparse_graph(std::istream& in) {
  json j;
  try {
    in >> j;
    SparseGraph h;
    h.window = {j.at("window").at(0).get<std::uint32_t>(), j.at("window").at(1).get<std::uint32_t>(),
                j.at("window").at(2).get<std::uint32_t>()};
    h.repetitions = j.at("repetitions").get<std::uint32_t>();
    h.precision_bits = j.at("precision_bits").get<int>();
    for (const auto& v : j.at("vertices")) {
      SparseVertex sv;
      sv.origin = v.at("origin").get<NodeId>();
      sv.copy_index = v.at("copy").get<std::uint32_t>();
      sv.label.state = state_from(v.at("state"));
      for (const auto& f : v.at("tape")) sv.label.tape.push_back(Fraction{f.get<std::uint64_t>()});
      h.vertices.push_back(std::move(sv));
    }
    h.edges = j.at("edges").get<std::vector<std::pair<std::uint32_t, std::uint32_t>>>();
    return h;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed sparse graph: ") + e.what());
  }
}

}  // namespace sparsemis
