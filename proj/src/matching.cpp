#include "sparsemis/matching.hpp"

#include <algorithm>
#include <cmath>

namespace sparsemis {

namespace {

using u128 = unsigned __int128;

u128 pow2(unsigned e) { return u128{1} << e; }

struct Alive {
  explicit Alive(std::size_t n) : flag(n, 1), count(n) {}
  bool operator[](NodeId v) const { return flag[v] != 0; }
  void remove(NodeId v) {
    if (flag[v]) {
      flag[v] = 0;
      --count;
    }
  }
  std::vector<std::uint8_t> flag;
  std::size_t count;
};

std::size_t alive_degree(const Graph& g, const Alive& alive, NodeId v) {
  std::size_t d = 0;
  for (NodeId u : g.neighbors(v)) d += alive[u];
  return d;
}

// Isolated marked edges: no other marked edge shares an endpoint.
std::vector<Edge> isolated(std::size_t n, const std::vector<Edge>& marked) {
  std::vector<std::uint32_t> touches(n, 0);
  for (auto [u, v] : marked) ++touches[u], ++touches[v];
  std::vector<Edge> out;
  for (auto [u, v] : marked)
    if (touches[u] == 1 && touches[v] == 1) out.push_back({u, v});
  return out;
}

std::vector<Edge> match_and_remove(std::size_t n, const std::vector<Edge>& marked, Alive& alive,
                                   EdgeSet& matching) {
  auto matched = isolated(n, marked);
  for (auto [u, v] : matched) {
    matching.insert(u, v);
    alive.remove(u);
    alive.remove(v);
  }
  return matched;
}

std::size_t greedy_extend(const Graph& g, EdgeSet& matching) {
  std::vector<std::uint8_t> used(g.node_count(), 0);
  for (auto [u, v] : matching.edges()) used[u] = used[v] = 1;
  std::size_t added = 0;
  for (auto [u, v] : g.edges()) {
    if (used[u] || used[v]) continue;
    used[u] = used[v] = 1;
    matching.insert(u, v);
    ++added;
  }
  return added;
}

}  // namespace

void MatchParams::validate() const {
  if (!std::isfinite(kappa) || kappa <= 0) throw ConfigError("kappa must be positive and finite");
}

std::uint32_t ceil_log2(std::size_t x) {
  std::uint32_t r = 0;
  while ((std::size_t{1} << r) < x) ++r;
  return r;
}

MatchSchedule make_match_schedule(const MatchParams& params, std::size_t max_degree) {
  params.validate();
  MatchSchedule s;
  s.delta = max_degree;
  const double lg = max_degree > 1 ? std::log2(static_cast<double>(max_degree)) : 0.0;
  s.K = params.amplification ? params.amplification
                             : static_cast<std::uint32_t>(std::ceil(params.kappa * lg - 1e-9));
  s.K = std::max<std::uint32_t>(s.K, 1);
  s.iterations = ceil_log2(max_degree);
  s.phase_length = params.phase_length ? params.phase_length
                                       : static_cast<std::uint32_t>(std::ceil(std::sqrt(lg) / 2 - 1e-9));
  s.phase_length = std::max<std::uint32_t>(s.phase_length, 1);
  return s;
}

double MatchSchedule::d(std::uint32_t i) const { return std::ldexp(static_cast<double>(delta), -int(i) - 1); }
double MatchSchedule::p(std::uint32_t i) const { return std::ldexp(1.0, int(i)) / (4.0 * double(delta)); }
double MatchSchedule::p_prime(std::uint32_t i) const { return capped(i) ? 1.0 : K * p(i); }

bool MatchSchedule::capped(std::uint32_t i) const { return u128{K} * pow2(i) >= u128{4} * delta; }

bool MatchSchedule::marks(int bits, Fraction r, std::uint32_t i) const {
  return u128{r.numerator} * (u128{4} * delta) < pow2(i + bits);
}

bool MatchSchedule::includes(int bits, Fraction r, std::uint32_t i) const {
  if (capped(i)) return true;
  return u128{r.numerator} * (u128{4} * delta) < u128{K} * pow2(i + bits);
}

bool MatchSchedule::at_least_d(std::size_t degree, std::uint32_t i) const {
  return u128{degree} * pow2(i + 1) >= u128{delta};
}

bool MatchSchedule::exceeds_h_threshold(std::size_t degree, std::uint32_t i) const {
  // d_i p'_i is d_i when capped and K/8 otherwise
  if (capped(i)) return u128{degree} * pow2(i + 1) > u128{delta};
  return u128{degree} * 8 > u128{K};
}

MatchingResult run_base_matching(const Graph& g, const TapeSpec& tape, const MatchParams& params) {
  MatchingResult res;
  res.schedule = make_match_schedule(params, g.max_degree());
  const auto& s = res.schedule;
  const std::size_t n = g.node_count();
  const auto edges = g.edges();
  Alive alive(n);

  for (std::uint32_t i = 0; i < s.iterations; ++i) {
    MatchIterationLog entry;
    entry.iteration = i;
    std::vector<std::uint8_t> heavy(n, 0);
    for (NodeId v = 0; v < n; ++v) heavy[v] = alive[v] && s.at_least_d(alive_degree(g, alive, v), i);

    std::vector<Edge> marked;
    for (auto [u, v] : edges) {
      if (!alive[u] || !alive[v] || !(heavy[u] || heavy[v])) continue;
      if (s.marks(tape.precision_bits, edge_tape_value(tape, u, v, i), i)) marked.push_back({u, v});
    }
    entry.marked = marked.size();
    entry.matched = match_and_remove(n, marked, alive, res.matching);

    for (NodeId v = 0; v < n; ++v)
      if (alive[v] && s.at_least_d(alive_degree(g, alive, v), i)) entry.removed_high.push_back(v);
    for (NodeId v : entry.removed_high) alive.remove(v);
    entry.alive_after = alive.count;
    res.log.push_back(std::move(entry));
  }
  if (params.final_greedy) res.greedy_added = greedy_extend(g, res.matching);
  return res;
}

MatchingResult run_sparse_matching(const Graph& g, const TapeSpec& tape, const MatchParams& params) {
  MatchingResult res;
  res.schedule = make_match_schedule(params, g.max_degree());
  const auto& s = res.schedule;
  const std::size_t n = g.node_count();
  const auto edges = g.edges();
  Alive alive(n);

  for (std::uint32_t first = 0; first < s.iterations; first += s.phase_length) {
    const std::uint32_t last = std::min(first + s.phase_length, s.iterations) - 1;
    MatchPhase phase;
    phase.first = first;
    phase.last = last;

    // Sampled at the phase start, all iterations at once. Each included edge
    // keeps its tape value so marking can reuse it.
    std::vector<std::vector<std::pair<Edge, Fraction>>> sampled(last - first + 1);
    for (auto [u, v] : edges) {
      if (!alive[u] || !alive[v]) continue;
      for (std::uint32_t i = first; i <= last; ++i) {
        Fraction r = edge_tape_value(tape, u, v, i);
        if (s.includes(tape.precision_bits, r, i)) sampled[i - first].push_back({{u, v}, r});
      }
    }
    std::vector<Edge> all;
    for (auto& list : sampled) {
      std::vector<Edge> hi;
      for (auto& [e, r] : list) hi.push_back(e), all.push_back(e);
      phase.per_iteration.emplace_back(std::move(hi));
    }
    phase.h = EdgeSet(std::move(all));
    phase.h_degree.assign(n, 0);
    for (auto [u, v] : phase.h.edges()) ++phase.h_degree[u], ++phase.h_degree[v];

    for (std::uint32_t i = first; i <= last; ++i) {
      const auto& hi = sampled[i - first];
      MatchIterationLog entry;
      entry.iteration = i;
      std::vector<Edge> marked;
      for (auto& [e, r] : hi)
        if (alive[e.first] && alive[e.second] && s.marks(tape.precision_bits, r, i)) marked.push_back(e);
      entry.marked = marked.size();
      entry.matched = match_and_remove(n, marked, alive, res.matching);

      std::vector<std::size_t> hdeg(n, 0);
      for (auto& [e, r] : hi)
        if (alive[e.first] && alive[e.second]) ++hdeg[e.first], ++hdeg[e.second];
      for (NodeId v = 0; v < n; ++v)
        if (alive[v] && s.exceeds_h_threshold(hdeg[v], i)) entry.removed_high.push_back(v);
      for (NodeId v : entry.removed_high) alive.remove(v);
      entry.alive_after = alive.count;

      if (i == last) {
        for (NodeId v = 0; v < n; ++v)
          if (alive[v] && s.at_least_d(alive_degree(g, alive, v), last)) entry.removed_phase_end.push_back(v);
        for (NodeId v : entry.removed_phase_end) alive.remove(v);
      }
      res.log.push_back(std::move(entry));
    }
    res.phases.push_back(std::move(phase));
  }
  if (params.final_greedy) res.greedy_added = greedy_extend(g, res.matching);
  return res;
}

EdgeSet maximal_matching_via_line_mis(const Graph& g, const TapeSpec& tape, const MisParams& params) {
  if (g.edge_count() == 0) return {};
  LineGraph lg = line_graph(g);
  RunPlan plan = make_plan(lg.graph, params, Variant::Sparsified);
  TapeSpec t = make_tape_spec(tape.seed, plan, lg.graph, tape.precision_bits);
  ExecutionTrace trace = post_shatter(lg.graph, run_plan(lg.graph, t, plan, RunOptions{.record_rows = false}));
  std::vector<Edge> out;
  for (NodeId x : trace.mis.members()) out.push_back(lg.edge_of[x]);
  return EdgeSet(std::move(out));
}

NodeSet vertex_cover_2approx(const Graph& g, const EdgeSet& m) {
  auto verdict = verify_matching(g, m, true);
  if (!is_valid(verdict)) throw Error("vertex cover needs a maximal matching: " + describe(verdict));
  NodeSet cover(g.node_count());
  for (auto [u, v] : m.edges()) cover.insert(u), cover.insert(v);
  return cover;
}

namespace {

class MatchingSearch {
 public:
  explicit MatchingSearch(const Graph& g) : g_(g), free_(g.node_count(), 1) {}

  EdgeSet solve() {
    std::vector<Edge> cur;
    search(cur);
    return EdgeSet(best_);
  }

 private:
  std::size_t free_degree(NodeId v) const {
    std::size_t d = 0;
    for (NodeId u : g_.neighbors(v)) d += free_[u];
    return d;
  }

  void search(std::vector<Edge>& cur) {
    NodeId pick = 0;
    std::size_t pick_deg = 0;
    std::size_t open = 0;  // free vertices that still have a free neighbor
    for (NodeId v = 0; v < g_.node_count(); ++v) {
      if (!free_[v]) continue;
      std::size_t d = free_degree(v);
      if (d == 0) continue;
      ++open;
      if (pick_deg == 0 || d < pick_deg) pick = v, pick_deg = d;
    }
    if (cur.size() > best_.size()) best_ = cur;
    if (open == 0 || cur.size() + open / 2 <= best_.size()) return;

    free_[pick] = 0;
    for (NodeId u : g_.neighbors(pick)) {
      if (!free_[u]) continue;
      free_[u] = 0;
      cur.push_back(canonical(pick, u));
      search(cur);
      cur.pop_back();
      free_[u] = 1;
      // a leaf is always matched to its only neighbor in some maximum matching
      if (pick_deg == 1) break;
    }
    if (pick_deg > 1) search(cur);
    free_[pick] = 1;
  }

  const Graph& g_;
  std::vector<std::uint8_t> free_;
  std::vector<Edge> best_;
};

}  // namespace

EdgeSet exact_max_matching_small(const Graph& g, std::size_t edge_limit) {
  if (g.edge_count() > edge_limit)
    throw ConfigError("exact matching limited to " + std::to_string(edge_limit) + " edges, graph has " +
                      std::to_string(g.edge_count()));
  return MatchingSearch(g).solve();
}

}  // namespace sparsemis
