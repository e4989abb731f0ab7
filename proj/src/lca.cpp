#include "sparsemis/lca.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace sparsemis {

std::string_view to_string(ProbeMode m) { return m == ProbeMode::Faithful ? "faithful" : "memoized"; }
std::string_view to_string(LcaVariant v) { return v == LcaVariant::Chained ? "chained" : "recursive"; }
std::string_view to_string(AnswerPath p) { return p == AnswerPath::MainRun ? "main_run" : "post_shatter"; }

std::optional<LcaVariant> parse_lca_variant(std::string_view name) {
  if (name == "chained" || name == "lca-chained") return LcaVariant::Chained;
  if (name == "recursive" || name == "lca-recursive") return LcaVariant::Recursive;
  return std::nullopt;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

void QueryLedger::charge(std::size_t level, std::uint64_t count) {
  if (count == 0) return;
  if (by_level.size() <= level) by_level.resize(level + 1, 0);
  by_level[level] = saturating_add(by_level[level], count);
  total = saturating_add(total, count);
}

GraphAccess::GraphAccess(const Graph& g, QueryLedger& ledger, ProbeMode mode)
    : g_(&g), ledger_(&ledger), mode_(mode), seen_(g.node_count(), 0) {}

std::span<const NodeId> GraphAccess::probe(NodeId v, std::size_t level) {
  if (v >= g_->node_count()) throw Error("probe of unknown node " + std::to_string(v));
  if (mode_ == ProbeMode::Faithful || !seen_[v]) ledger_->charge(level, 1);
  seen_[v] = 1;
  return g_->neighbors(v);
}

namespace {
std::uint64_t next_oracle_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace

LcaOracle::LcaOracle(const Graph& g, const TapeSpec& tape, const MisParams& params, LcaVariant variant)
    : g_(g), id_(next_oracle_id()), tape_(tape), n_(g.node_count()) {
  if (params.degree_steps) throw ConfigError("the LCA oracles do not support degree steps");
  plan_ = make_plan(g, params, variant == LcaVariant::Chained ? Variant::Sparsified : Variant::Recursive);
  phases_ = plan_.segments.front().leaves;
  keys_.resize(2 * phases_.size() * n_);
  classes_.resize(phases_.size() * n_);
  trajectories_.resize(phases_.size() * n_);
}

const NodeState& LcaOracle::start_state(std::size_t i, NodeId v, std::vector<std::uint32_t>& deps) {
  if (i == 0) return initial_;
  deps.push_back(traj_key(i - 1, v));
  return end_state(i - 1, v);
}

const NodeClass& LcaOracle::node_class(std::size_t i, NodeId v) {
  const std::uint32_t key = class_key(i, v);
  if (keys_[key].done) return classes_[key];
  std::vector<std::uint32_t> deps;
  LocalView view;
  view.node = v;
  view.state = start_state(i, v, deps);
  const bool live = view.state.live();
  if (live)
    for (NodeId u : g_.neighbors(v)) {
      view.neighbors.push_back(u);
      view.neighbor_states.push_back(start_state(i, u, deps));
    }
  classes_[key] = classify_node(view, tape_, plan_, phases_[i]);
  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  keys_[key].deps = std::move(deps);
  keys_[key].probe = live;
  keys_[key].done = true;
  return classes_[key];
}

const Trajectory& LcaOracle::trajectory(std::size_t i, NodeId v) {
  const std::uint32_t key = traj_key(i, v);
  Trajectory& out = trajectories_[i * n_ + v];
  if (keys_[key].done) return out;
  const Window& w = phases_[i];
  std::vector<std::uint32_t> deps;
  const NodeState start = start_state(i, v, deps);

  if (!start.live()) {
    out.window = w;
    out.final_state = start;
  } else {
    deps.push_back(class_key(i, v));
    const NodeClass& c = node_class(i, v);
    if (c.vertex()) {
      // learn v's ball in H, then replay the window on it
      const std::uint32_t radius = 3 * w.length();
      std::vector<NodeId> light{v};
      std::unordered_map<NodeId, std::uint32_t> dist{{v, 0}};
      std::vector<std::pair<NodeId, NodeId>> copies;  // (stalled node, light neighbor)
      for (std::size_t head = 0; head < light.size(); ++head) {
        const NodeId x = light[head];
        const std::uint32_t dx = dist[x];
        if (dx == radius) continue;
        for (NodeId u : g_.neighbors(x)) {
          deps.push_back(class_key(i, u));
          const NodeClass& cu = node_class(i, u);
          if (cu.vertex()) {
            if (dist.emplace(u, dx + 1).second) light.push_back(u);
          } else if (cu.copy()) {
            copies.emplace_back(u, x);
          }
        }
      }
      std::sort(copies.begin(), copies.end());

      struct Entry {
        NodeId origin;
        std::uint32_t copy_index;
        NodeId attach;
      };
      std::vector<Entry> entries;
      for (NodeId x : light) entries.push_back({x, 0, x});
      for (std::size_t a = 0; a < copies.size(); ++a) {
        const std::uint32_t index = a > 0 && copies[a - 1].first == copies[a].first ? entries.back().copy_index + 1 : 1;
        entries.push_back({copies[a].first, index, copies[a].second});
      }
      std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::pair(a.origin, a.copy_index) < std::pair(b.origin, b.copy_index);
      });
      SparseGraph h;
      h.window = w;
      h.repetitions = tape_.repetitions;
      h.precision_bits = tape_.precision_bits;
      std::unordered_map<NodeId, std::uint32_t> index_of;
      for (std::uint32_t a = 0; a < entries.size(); ++a) {
        const Entry& e = entries[a];
        h.vertices.push_back({e.origin, e.copy_index, make_label(tape_, e.origin, node_class(i, e.origin).decided, w)});
        if (e.copy_index == 0) index_of[e.origin] = a;
      }
      for (std::uint32_t a = 0; a < entries.size(); ++a) {
        const Entry& e = entries[a];
        if (e.copy_index != 0) {
          const std::uint32_t b = index_of[e.attach];
          h.edges.emplace_back(std::min(a, b), std::max(a, b));
          continue;
        }
        for (NodeId u : g_.neighbors(e.origin)) {
          auto it = index_of.find(u);
          if (u > e.origin && it != index_of.end()) h.edges.emplace_back(a, it->second);
        }
      }
      std::sort(h.edges.begin(), h.edges.end());
      for (SparseOutcome& o : simulate_phase_on_sparse(h))
        if (o.origin == v) out = std::move(o.trajectory);
    } else {
      const auto nbrs = g_.neighbors(v);
      std::vector<Trajectory> seen;
      seen.reserve(nbrs.size());
      std::vector<const Trajectory*> nb;
      for (NodeId u : nbrs) {
        deps.push_back(class_key(i, u));
        const NodeClass& cu = node_class(i, u);
        if (!cu.live) {
          nb.push_back(nullptr);
        } else if (cu.vertex()) {
          deps.push_back(traj_key(i, u));
          nb.push_back(&trajectory(i, u));
        } else {
          seen.push_back(outside_view(cu, w, tape_.precision_bits));
          nb.push_back(&seen.back());
        }
      }
      out = follow_trajectory(v, c.decided, nbrs, nb, tape_, w);
    }
  }
  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  keys_[key].deps = std::move(deps);
  keys_[key].done = true;
  return out;
}

const std::vector<std::uint64_t>& LcaOracle::cost(std::uint32_t key) {
  Key& k = keys_[key];
  if (!k.cost.empty()) return k.cost;
  std::vector<std::uint64_t> c(phases_.size() + 1, 0);
  if (k.probe) c[key / n_] = 1;
  for (std::uint32_t d : k.deps) {
    const auto& cd = cost(d);
    for (std::size_t l = 0; l < c.size(); ++l) c[l] = saturating_add(c[l], cd[l]);
  }
  keys_[key].cost = std::move(c);
  return keys_[key].cost;
}

std::vector<std::uint64_t> LcaOracle::replay(std::uint32_t root, GraphAccess& access) {
  std::vector<std::uint64_t> debited(phases_.size() + 1, 0);
  if (access.mode() == ProbeMode::Faithful) {
    debited = cost(root);
    for (std::size_t l = 0; l < debited.size(); ++l) access.charge(l, debited[l]);
    return debited;
  }
  auto token = [&](std::uint32_t key) { return (id_ << 32) | key; };
  if (!access.first_replay(token(root))) return debited;
  std::vector<std::uint32_t> stack{root};
  while (!stack.empty()) {
    const std::uint32_t key = stack.back();
    stack.pop_back();
    const Key& k = keys_[key];
    if (k.probe) {
      const NodeId v = static_cast<NodeId>(key % n_);
      const std::size_t level = key / n_;
      if (!access.probed(v)) ++debited[level];
      access.probe(v, level);
    }
    for (auto it = k.deps.rbegin(); it != k.deps.rend(); ++it)
      if (access.first_replay(token(*it))) stack.push_back(*it);
  }
  return debited;
}

PhaseOutcome LcaOracle::outcome(const NodeState& s) const {
  PhaseOutcome o;
  o.state = s;
  o.p_exp = s.p_exp;
  o.joined = s.status == Status::InMIS;
  o.deferred = s.status == Status::Deferred || (s.status == Status::Active && s.defer_at != 0 && !s.pending_removal);
  return o;
}

PhaseOutcome LcaOracle::oracle_phase(std::size_t i, NodeId v, GraphAccess& access) {
  if (i >= phases_.size()) throw ConfigError("phase " + std::to_string(i) + " is beyond the plan");
  const NodeState s = end_state(i, v);
  replay(traj_key(i, v), access);
  return outcome(s);
}

PhaseOutcome LcaOracle::recursive_oracle(NodeId v, const Window& w, GraphAccess& access) {
  const auto& windows = plan_.segments.front().windows;
  if (std::find(windows.begin(), windows.end(), w) == windows.end())
    throw ConfigError("window [" + std::to_string(w.start) + "," + std::to_string(w.end) + "] at level " +
                      std::to_string(w.level) + " is not in the recursion tree");
  for (std::size_t i = 0; i < phases_.size(); ++i)
    if (phases_[i] == w) return oracle_phase(i, v, access);
  // the second half ends where w ends; its start states come from the first half
  for (const Window& child : windows)
    if (child.level == w.level + 1 && child.end == w.end) return recursive_oracle(v, child, access);
  throw ConfigError("window has no children in the recursion tree");
}

LcaAnswer LcaOracle::answer(NodeId v, GraphAccess& access) {
  const std::size_t P = phases_.size(), last = P - 1;
  LcaAnswer a;
  a.node = v;
  a.probes_by_level.assign(P + 1, 0);
  auto add = [&](const std::vector<std::uint64_t>& d) {
    for (std::size_t l = 0; l < d.size(); ++l) a.probes_by_level[l] = saturating_add(a.probes_by_level[l], d[l]);
  };
  const NodeState end = end_state(last, v);
  add(replay(traj_key(last, v), access));

  auto survives = [](const NodeState& s) { return s.status == Status::Active || s.status == Status::Deferred; };
  if (!survives(end)) {
    a.in_mis = end.status == Status::InMIS;
    a.path = AnswerPath::MainRun;
  } else {
    a.path = AnswerPath::PostShatter;
    std::vector<NodeId> comp{v};
    std::unordered_set<NodeId> in_comp{v}, known{v};
    for (std::size_t head = 0; head < comp.size(); ++head) {
      const NodeId x = comp[head];
      if (access.mode() == ProbeMode::Faithful || !access.probed(x)) ++a.probes_by_level[P];
      for (NodeId u : access.probe(x, P)) {
        if (known.insert(u).second) add(replay(traj_key(last, u), access));
        if (survives(end_state(last, u)) && in_comp.insert(u).second) comp.push_back(u);
      }
    }
    std::sort(comp.begin(), comp.end());
    std::unordered_set<NodeId> chosen;
    for (NodeId x : comp) {
      bool blocked = false;
      for (NodeId u : g_.neighbors(x))
        blocked = blocked || chosen.count(u) || end_state(last, u).status == Status::InMIS;
      if (!blocked) chosen.insert(x);
    }
    a.in_mis = chosen.count(v) != 0;
  }
  for (auto c : a.probes_by_level) a.probes_used = saturating_add(a.probes_used, c);
  access.ledger().by_node[v] = saturating_add(access.ledger().by_node[v], a.probes_used);
  return a;
}

LcaAnswer lca_answer(NodeId v, GraphAccess& access, const TapeSpec& tape, const MisParams& params,
                     LcaVariant variant) {
  LcaOracle oracle(access.graph(), tape, params, variant);
  return oracle.answer(v, access);
}

LcaAnswer parnas_ron_baseline(NodeId v, GraphAccess& access, const TapeSpec& tape, std::uint32_t T) {
  if (T < 1) throw ConfigError("the baseline needs T >= 1");
  const Graph& g = access.graph();
  const std::uint32_t radius = 3 * T - 2;
  LcaAnswer a;
  a.node = v;
  a.probes_by_level.assign(1, 0);
  std::vector<NodeId> ball{v};
  std::unordered_map<NodeId, std::uint32_t> dist{{v, 0}};
  std::vector<Edge> edges;
  for (std::size_t head = 0; head < ball.size(); ++head) {
    const NodeId x = ball[head];
    if (access.mode() == ProbeMode::Faithful || !access.probed(x)) ++a.probes_by_level[0];
    for (NodeId u : access.probe(x, 0)) {
      edges.emplace_back(x, u);
      if (dist[x] < radius && dist.emplace(u, dist[x] + 1).second) ball.push_back(u);
    }
  }
  RunOptions opt;
  opt.record_rows = false;
  const ExecutionTrace tr = run_base_mis(Graph::from_edges(g.node_count(), edges), tape, T, opt);
  a.in_mis = tr.mis.contains(v);
  a.probes_used = a.probes_by_level[0];
  access.ledger().by_node[v] = saturating_add(access.ledger().by_node[v], a.probes_used);
  return a;
}

Consistency consistency_audit(std::span<const LcaAnswer> answers, const Graph& g) {
  std::map<NodeId, bool> member;
  for (const LcaAnswer& a : answers) {
    auto [it, fresh] = member.emplace(a.node, a.in_mis);
    if (!fresh && it->second != a.in_mis) return Conflict{{a.node}};
  }
  for (const auto& [v, in] : member) {
    bool all_answered = true, dominated = false;
    for (NodeId u : g.neighbors(v)) {
      auto it = member.find(u);
      if (it == member.end()) {
        all_answered = false;
        continue;
      }
      if (in && it->second) return Conflict{{std::min(u, v), std::max(u, v)}};
      dominated = dominated || it->second;
    }
    if (!in && all_answered && !dominated) return Conflict{{v}};
  }
  return Consistent{};
}

}  // namespace sparsemis
