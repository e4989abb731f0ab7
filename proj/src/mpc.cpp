#include "sparsemis/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sparsemis/parallel.hpp"

namespace sparsemis {

MachineLedger::MachineLedger(std::size_t machines, std::size_t capacity) : machines_(machines), capacity_(capacity) {}

void MachineLedger::record(std::string label, std::vector<std::size_t> stored, std::vector<std::size_t> sent,
                           std::vector<std::size_t> received) {
  stored.resize(machines_, 0);
  sent.resize(machines_, 0);
  received.resize(machines_, 0);
  const std::uint64_t round = history_.size() + 1;
  bool overflow = false;
  for (std::size_t m = 0; m < machines_; ++m) {
    if (stored[m] > capacity_) throw MemoryExceeded(m, round, stored[m], capacity_);
    peak_ = std::max(peak_, stored[m]);
    overflow = overflow || sent[m] > capacity_ || received[m] > capacity_;
  }
  send_overflows_ += overflow;
  history_.push_back({round, std::move(label), std::move(stored), std::move(sent), std::move(received)});
}

std::size_t resolve_capacity(const MpcConfig& cfg, std::size_t n) {
  if (cfg.capacity) return cfg.capacity;
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  const double s = std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), cfg.alpha) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

Assignment assign_nodes(const Graph& g, const MpcConfig& cfg) {
  const std::size_t n = g.node_count();
  Assignment as;
  as.capacity = resolve_capacity(cfg, n);
  const std::size_t S = as.capacity;
  std::size_t total = 0;
  for (NodeId v = 0; v < n; ++v) {
    const std::size_t w = node_words(g, v);
    if (w > S)
      throw ConfigError("node " + std::to_string(v) + " needs " + std::to_string(w) + " words but S = " +
                        std::to_string(S) + " (deficit " + std::to_string(w - S) + ")");
    total += w;
  }
  as.machines = cfg.machines ? cfg.machines : std::max<std::size_t>(1, (2 * total + S - 1) / S);
  const std::size_t M = as.machines;
  if (total > M * S)
    throw ConfigError("input needs " + std::to_string(total) + " words but " + std::to_string(M) +
                      " machines hold " + std::to_string(M * S) + " (deficit " + std::to_string(total - M * S) + ")");

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::mt19937_64 rng(cfg.assign_seed);
  std::shuffle(order.begin(), order.end(), rng);

  as.machine_of.assign(n, 0);
  as.load.assign(M, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const NodeId v = order[idx];
    const std::size_t w = node_words(g, v);
    bool placed = false;
    for (std::size_t probe = 0; probe < M && !placed; ++probe) {
      const std::size_t m = (idx + probe) % M;
      if (as.load[m] + w > S) continue;
      as.load[m] += w;
      as.machine_of[v] = static_cast<std::uint32_t>(m);
      placed = true;
    }
    if (!placed) {
      const std::size_t best = S - *std::min_element(as.load.begin(), as.load.end());
      throw ConfigError("node " + std::to_string(v) + " (" + std::to_string(w) + " words) fits no machine (deficit " +
                        std::to_string(w - best) + ")");
    }
  }
  return as;
}

namespace {

using BallList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::size_t record_words(const SparseVertex& v) { return 1 + v.label.tape.size(); }

SparseGraph induced_sparse(const SparseGraph& h, const std::vector<std::uint32_t>& keep,
                           const std::vector<std::vector<std::uint32_t>>& adj, std::vector<std::uint32_t>& index) {
  SparseGraph sub;
  sub.window = h.window;
  sub.repetitions = h.repetitions;
  sub.precision_bits = h.precision_bits;
  for (std::uint32_t i = 0; i < keep.size(); ++i) {
    index[keep[i]] = i;
    sub.vertices.push_back(h.vertices[keep[i]]);
  }
  for (std::uint32_t i = 0; i < keep.size(); ++i)
    for (auto b : adj[keep[i]])
      if (index[b] != UINT32_MAX && index[b] > i) sub.edges.emplace_back(i, index[b]);
  std::sort(sub.edges.begin(), sub.edges.end());
  for (auto a : keep) index[a] = UINT32_MAX;
  return sub;
}

}  // namespace

Balls exponentiate(const SparseGraph& h, std::uint32_t radius, std::span<const std::uint32_t> machine_of_vertex,
                   std::span<const std::size_t> base_load, MachineLedger* ledger, bool keep_balls) {
  const std::size_t nv = h.vertices.size();
  const auto adj = h.adjacency();
  if (ledger && machine_of_vertex.size() != nv) throw Error("exponentiate: machine map does not match H");

  // reach after each round: 1, 2, 4, ... capped at the radius
  std::vector<std::uint32_t> reach{std::min<std::uint32_t>(radius, 1)};
  while (reach.back() < radius) reach.push_back(static_cast<std::uint32_t>(std::min<std::uint64_t>(2ull * reach.back(), radius)));
  const std::size_t rounds = reach.size() - 1;
  auto round_of = [&](std::uint32_t d) {
    return static_cast<std::size_t>(std::lower_bound(reach.begin(), reach.end(), d) - reach.begin());
  };

  Balls out;
  if (keep_balls) out.ball.resize(nv);
  out.rounds = static_cast<std::uint32_t>(rounds);

  // Distances are symmetric, so what w sends in round j is charged while w's
  // own ball is at hand: every a within reach[j-1] of w receives words[w][j-1].
  const std::size_t M = ledger ? ledger->machines() : 0;
  std::vector<std::vector<std::size_t>> stored(rounds + 1), sent(rounds + 1), received(rounds + 1);
  for (std::size_t j = 1; j <= rounds && ledger; ++j) {
    stored[j].assign(base_load.begin(), base_load.end());
    stored[j].resize(M, 0);
    sent[j].assign(M, 0);
    received[j].assign(M, 0);
  }
  std::vector<std::uint32_t> dist(nv, UINT32_MAX);
  std::vector<std::size_t> words(reach.size());
  BallList ball;
  for (std::uint32_t a = 0; a < nv; ++a) {
    ball.clear();
    dist[a] = 0;
    ball.emplace_back(a, 0);
    for (std::size_t head = 0; head < ball.size(); ++head) {
      const auto [u, du] = ball[head];
      if (du == radius) continue;
      for (auto b : adj[u])
        if (dist[b] == UINT32_MAX) {
          dist[b] = du + 1;
          ball.emplace_back(b, du + 1);
        }
    }
    if (ledger) {
      std::fill(words.begin(), words.end(), 0);
      for (auto [u, du] : ball) {
        words[round_of(du)] += record_words(h.vertices[u]);
        for (auto b : adj[u])
          if (u < b && dist[b] != UINT32_MAX) ++words[round_of(std::max(du, dist[b]))];
      }
      for (std::size_t j = 1; j < words.size(); ++j) words[j] += words[j - 1];
      const std::uint32_t ma = machine_of_vertex[a];
      for (std::size_t j = 1; j <= rounds; ++j) {
        stored[j][ma] += words[j];
        std::size_t reached = 0;
        for (auto [w, dw] : ball)
          if (w != a && dw <= reach[j - 1]) {
            received[j][machine_of_vertex[w]] += words[j - 1];
            ++reached;
          }
        sent[j][ma] += reached * words[j - 1];
      }
    }
    for (auto [u, du] : ball) dist[u] = UINT32_MAX;
    if (keep_balls) {
      std::sort(ball.begin(), ball.end());
      out.ball[a] = ball;
    }
  }

  for (std::size_t j = 1; j <= rounds && ledger; ++j)
    ledger->record("exponentiate to radius " + std::to_string(reach[j]), std::move(stored[j]), std::move(sent[j]),
                   std::move(received[j]));
  return out;
}

MpcResult run_mpc(const Graph& g, const TapeSpec& tape, const MisParams& params, const MpcConfig& cfg,
                  Variant variant) {
  if (variant == Variant::Base) throw ConfigError("the MPC simulation runs the sparsified or recursive variant");
  const std::size_t n = g.node_count();
  const RunPlan plan = make_plan(g, params, variant);
  const Assignment as = assign_nodes(g, cfg);
  const std::size_t M = as.machines;

  MpcResult res;
  res.ledger = MachineLedger(M, as.capacity);
  MachineLedger& ledger = res.ledger;
  const std::vector<std::size_t>& base = as.load;

  ExecutionTrace& trace = res.trace;
  trace.node_count = n;
  trace.iterations = plan.total_iterations;
  std::vector<NodeState> states(n);

  // one word per neighbor record delivered to every node on the machine
  auto neighbor_exchange = [&](std::string label, std::size_t words_per_edge, auto&& participates) {
    std::vector<std::size_t> stored(base), sent(M, 0), received(M, 0);
    for (NodeId v = 0; v < n; ++v) {
      if (!participates(v)) continue;
      const std::size_t w = g.degree(v) * words_per_edge;
      stored[as.machine_of[v]] += w;
      received[as.machine_of[v]] += w;
      for (NodeId u : g.neighbors(v)) sent[as.machine_of[u]] += words_per_edge;
    }
    ledger.record(std::move(label), std::move(stored), std::move(sent), std::move(received));
  };

  for (const Segment& seg : plan.segments) {
    const std::uint64_t rounds_before = ledger.rounds();
    if (segmented(plan)) {
      neighbor_exchange("degree step " + std::to_string(seg.threshold), 1,
                        [&](NodeId v) { return states[v].status == Status::Active; });
      begin_segment(g, seg, states);
    }
    for (const Window& leaf : seg.leaves) {
      if (std::none_of(states.begin(), states.end(), [](const NodeState& s) { return s.live(); })) break;
      const std::string tag = "phase " + std::to_string(leaf.start) + "-" + std::to_string(leaf.end);

      const Classification cls = classify_nodes(g, states, tape, plan, leaf, GoodnessMode::DeferBad);
      const SparseGraph h = build_sparse_graph(g, cls, tape);
      const auto adj = h.adjacency();
      const std::size_t nv = h.vertices.size();

      // light vertices stay with their node; a copy moves to its light neighbor's machine
      std::vector<std::uint32_t> vertex_machine(nv);
      for (std::uint32_t a = 0; a < nv; ++a) {
        const SparseVertex& x = h.vertices[a];
        vertex_machine[a] = as.machine_of[x.copy_index == 0 ? x.origin : h.vertices[adj[a].front()].origin];
      }
      {
        std::vector<std::size_t> stored(base), sent(M, 0), received(M, 0);
        for (std::uint32_t a = 0; a < nv; ++a) stored[vertex_machine[a]] += record_words(h.vertices[a]) + adj[a].size();
        for (NodeId v = 0; v < n; ++v) {
          if (!cls.nodes[v].live) continue;
          const std::size_t w = 1 + (cls.nodes[v].copy() ? 1 + tape.repetitions * leaf.length() + leaf.length() : 0);
          for (NodeId u : g.neighbors(v)) {
            sent[as.machine_of[v]] += w;
            received[as.machine_of[u]] += w;
          }
        }
        ledger.record(tag + " build", std::move(stored), std::move(sent), std::move(received));
      }

      const std::uint32_t radius = phase_radius(leaf);
      exponentiate(h, radius, vertex_machine, base, &ledger, false);

      std::vector<std::vector<std::uint32_t>> owned(M);
      for (std::uint32_t a = 0; a < nv; ++a)
        if (h.vertices[a].copy_index == 0) owned[vertex_machine[a]].push_back(a);
      std::vector<std::vector<SparseOutcome>> local(M);
      detail::parallel_for(cfg.workers, M, [&](std::size_t m) {
        if (owned[m].empty()) return;
        // union of the owned vertices' balls, by one multi-source search
        std::vector<std::uint32_t> dist(nv, UINT32_MAX), keep;
        for (auto a : owned[m]) {
          dist[a] = 0;
          keep.push_back(a);
        }
        for (std::size_t head = 0; head < keep.size(); ++head) {
          const std::uint32_t u = keep[head];
          if (dist[u] == radius) continue;
          for (auto b : adj[u])
            if (dist[b] == UINT32_MAX) {
              dist[b] = dist[u] + 1;
              keep.push_back(b);
            }
        }
        std::sort(keep.begin(), keep.end());
        std::vector<std::uint32_t> index(nv, UINT32_MAX);
        const SparseGraph sub = induced_sparse(h, keep, adj, index);
        std::vector<NodeId> mine;
        for (auto a : owned[m]) mine.push_back(h.vertices[a].origin);
        for (auto& o : simulate_phase_on_sparse(sub))
          if (std::binary_search(mine.begin(), mine.end(), o.origin)) local[m].push_back(std::move(o));
      });
      std::vector<SparseOutcome> outcomes;
      for (auto& part : local)
        for (auto& o : part) outcomes.push_back(std::move(o));
      std::sort(outcomes.begin(), outcomes.end(),
                [](const SparseOutcome& a, const SparseOutcome& b) { return a.origin < b.origin; });

      const WindowResult wr = complete_window(g, states, cls, std::move(outcomes), tape);
      for (TraceRow& r : window_rows(wr)) {
        trace.executed = std::max(trace.executed, r.iteration);
        trace.rows.push_back(r);
      }
      neighbor_exchange(tag + " update", leaf.length(),
                        [&](NodeId v) { return states[v].status == Status::Active; });
      states = wr.states;
    }
    res.metrics.rounds_by_step.push_back(ledger.rounds() - rounds_before);
  }

  trace.mis = NodeSet(n);
  trace.survivors = NodeSet(n);
  trace.post_shatter_joined = NodeSet(n);
  for (NodeId v = 0; v < n; ++v) {
    if (states[v].status == Status::InMIS) trace.mis.insert(v);
    if (states[v].status == Status::Active || states[v].status == Status::Deferred) trace.survivors.insert(v);
    res.metrics.deferred += states[v].status == Status::Deferred;
  }
  trace.final_states = std::move(states);

  // post-shattering: every surviving component is gathered onto one machine
  const auto comps = connected_components(g, trace.survivors);
  if (!comps.empty()) {
    std::vector<std::size_t> gathered(M, 0);
    std::size_t largest = 0;
    for (const auto& comp : comps) {
      largest = std::max(largest, comp.size());
      std::size_t words = 0;
      for (NodeId v : comp) {
        words += 1;
        for (NodeId u : g.neighbors(v)) words += trace.survivors.contains(u);
      }
      if (words > as.capacity)
        throw ComponentTooLarge("surviving component of " + std::to_string(comp.size()) + " nodes needs " +
                                std::to_string(words) + " words; S = " + std::to_string(as.capacity));
      gathered[as.machine_of[*std::min_element(comp.begin(), comp.end())]] += words;
    }
    const std::uint64_t rounds = exponentiation_rounds(static_cast<std::uint32_t>(largest)) + 1;
    for (std::uint64_t r = 0; r < rounds; ++r) {
      std::vector<std::size_t> stored(base);
      for (std::size_t m = 0; m < M; ++m) stored[m] += gathered[m];
      ledger.record(r + 1 < rounds ? "post-shatter gather" : "post-shatter solve", std::move(stored), gathered,
                    gathered);
    }
    res.metrics.post_shatter_rounds = rounds;
  }
  trace = post_shatter(g, std::move(trace));
  res.mis = trace.mis;

  MpcMetrics& mt = res.metrics;
  mt.n = n;
  mt.delta = g.max_degree();
  mt.alpha = cfg.alpha;
  mt.seed = tape.seed;
  mt.rounds_total = ledger.rounds();
  mt.peak_memory_words = ledger.peak_memory();
  mt.capacity = as.capacity;
  mt.machines = M;
  mt.survivors = trace.survivors.count();
  mt.mis_size = trace.mis.count();
  return res;
}

}  // namespace sparsemis
