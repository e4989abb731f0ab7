#pragma once

#include <cstdint>
#include <vector>

#include "sparsemis/graph.hpp"
#include "sparsemis/mis.hpp"
#include "sparsemis/tape.hpp"

namespace sparsemis {

struct MatchParams {
  double kappa = 8.0;                 // K = ceil(kappa * log2 Delta)
  std::uint32_t amplification = 0;    // explicit K; 0 = derived from kappa
  std::uint32_t phase_length = 0;     // 0 = ceil(sqrt(log2 Delta) / 2)
  bool final_greedy = false;          // extend the result greedily to a maximal matching

  void validate() const;
  friend bool operator==(const MatchParams&, const MatchParams&) = default;
};

/// Thresholds and probabilities resolved against a maximum degree. All
/// comparisons are exact rational arithmetic on integers.
///   d_i = Delta / 2^{i+1},  p_i = 2^i / (4 Delta),  p'_i = min(K p_i, 1).
struct MatchSchedule {
  std::size_t delta = 0;
  std::uint32_t K = 0;
  std::uint32_t iterations = 0;  // ceil(log2 Delta)
  std::uint32_t phase_length = 1;

  double d(std::uint32_t i) const;
  double p(std::uint32_t i) const;
  double p_prime(std::uint32_t i) const;
  bool capped(std::uint32_t i) const;  // p'_i == 1

  bool marks(int precision_bits, Fraction r, std::uint32_t i) const;     // r < p_i
  bool includes(int precision_bits, Fraction r, std::uint32_t i) const;  // r < p'_i
  bool at_least_d(std::size_t degree, std::uint32_t i) const;            // degree >= d_i
  bool exceeds_h_threshold(std::size_t degree, std::uint32_t i) const;   // degree > d_i p'_i
};

MatchSchedule make_match_schedule(const MatchParams& params, std::size_t max_degree);
std::uint32_t ceil_log2(std::size_t x);

struct MatchIterationLog {
  std::uint32_t iteration = 0;
  std::size_t marked = 0;
  std::vector<Edge> matched;
  std::vector<NodeId> removed_high;       // degree rule of the iteration
  std::vector<NodeId> removed_phase_end;  // sparse variant: pass on G closing a phase
  std::size_t alive_after = 0;            // before any phase-end pass
  friend bool operator==(const MatchIterationLog&, const MatchIterationLog&) = default;
};

/// Sampled subgraphs of one phase of the sparse variant.
struct MatchPhase {
  std::uint32_t first = 0;
  std::uint32_t last = 0;
  std::vector<EdgeSet> per_iteration;  // H_i for i = first..last
  EdgeSet h;                           // union
  std::vector<std::uint32_t> h_degree;  // degree in h, per node
  friend bool operator==(const MatchPhase&, const MatchPhase&) = default;
};

struct MatchingResult {
  MatchSchedule schedule;
  EdgeSet matching;
  std::vector<MatchIterationLog> log;
  std::vector<MatchPhase> phases;  // sparse variant only
  std::size_t greedy_added = 0;
};

MatchingResult run_base_matching(const Graph& g, const TapeSpec& tape, const MatchParams& params = {});
MatchingResult run_sparse_matching(const Graph& g, const TapeSpec& tape, const MatchParams& params = {});

/// MIS of the line graph through the sparsified engine and post-shattering,
/// read back as edges. Uses the seed and precision of `tape`; the tape width
/// is fitted to the line graph.
EdgeSet maximal_matching_via_line_mis(const Graph& g, const TapeSpec& tape, const MisParams& params = {});

/// Both endpoints of every edge of m. Throws Error unless m is a maximal matching of g.
NodeSet vertex_cover_2approx(const Graph& g, const EdgeSet& m);

/// Maximum-cardinality matching by branch and bound. Throws ConfigError
/// when g has more than edge_limit edges.
EdgeSet exact_max_matching_small(const Graph& g, std::size_t edge_limit = 64);

}  // namespace sparsemis
