#pragma once

// Per-node rules of the sparsified MIS dynamic, shared by every execution
// model (centralized engine, sparse-graph replay, MPC machines, LCA oracles).

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "sparsemis/tape.hpp"

namespace sparsemis {

enum class Status : std::uint8_t { Active = 0, InMIS = 1, Removed = 2, Deferred = 3 };

std::string_view to_string(Status s);

/// Iteration interval [start, end], inclusive. level 0 is the coarsest.
struct Window {
  std::uint32_t start = 1;
  std::uint32_t end = 1;
  std::uint32_t level = 0;
  std::uint32_t length() const { return end - start + 1; }
  bool contains(std::uint32_t t) const { return start <= t && t <= end; }
  friend bool operator==(const Window&, const Window&) = default;
};

struct LightWindow {
  std::uint32_t end = 0;
  std::uint32_t length = 0;
  friend bool operator==(const LightWindow&, const LightWindow&) = default;
};

/// State of one node at an iteration boundary.
struct NodeState {
  Status status = Status::Active;
  int p_exp = 1;                 // p = 2^{-p_exp}; p_0 = 1/2
  std::uint32_t stall_end = 0;   // stalling during iterations <= stall_end
  std::uint32_t defer_at = 0;    // set Deferred at the end of this iteration (0 = never)
  bool pending_removal = false;  // dominated while stalling; removed at stall_end
  bool asleep = false;           // not part of the current degree step
  std::uint32_t decided_at = 0;  // iteration of the final status change
  std::vector<LightWindow> light_windows;  // open windows in which the node was light at start

  bool live() const { return status == Status::Active && !asleep; }
  bool stalled_at(std::uint32_t t) const { return stall_end >= t; }
  Dyadic p() const { return Dyadic::power(p_exp); }

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// Exact weighted degree sum_u p(u), in units of 2^-64.
using Weight = unsigned __int128;

inline Weight weight_of(int p_exp) { return p_exp > 64 ? Weight{0} : Weight{1} << (64 - p_exp); }
/// d >= 2^e for integer e (possibly negative).
inline bool weight_at_least_pow2(Weight d, int e) {
  if (e + 64 >= 127) return false;
  if (e + 64 < 0) return d > 0;
  return d >= (Weight{1} << (e + 64));
}
/// Floor of a weight as an integer (saturating at 2^32-1).
std::uint32_t weight_floor(Weight d);

/// Saturating integer compare dhat >= 2^e / dhat > 2^e.
inline bool at_least_pow2(std::uint64_t x, std::uint32_t e) { return e < 64 && x >= (std::uint64_t{1} << e); }
inline bool above_pow2(std::uint64_t x, std::uint32_t e) { return e < 64 && x > (std::uint64_t{1} << e); }

/// Halve (floored at 2^{-B}) or double (capped at 1/2).
Dyadic update_probability(Dyadic p, bool halve, int precision_bits);
inline int updated_exponent(int p_exp, bool halve, int precision_bits) {
  return halve ? std::min(p_exp + 1, precision_bits) : std::max(p_exp - 1, 1);
}

/// Lower median of the non-empty sequence (copied).
std::uint32_t lower_median(std::vector<std::uint32_t> values);
/// Same, reordering `values`.
std::uint32_t lower_median_in_place(std::span<std::uint32_t> values);

/// Sampling repetitions j (0-based) in which a node with probability 2^{-p_exp}
/// is sampled at iteration t: tape sample slot j+1 below p.
std::vector<std::uint16_t> sampled_repetitions(const TapeSpec& tape, NodeId v, std::uint32_t t, int p_exp);

/// Median over repetitions of the per-repetition sums of sampled neighbors.
/// `neighbor_samples` lists, for each live neighbor, its sampled repetitions.
std::uint32_t median_estimate(std::uint32_t repetitions,
                              std::span<const std::vector<std::uint16_t>* const> neighbor_samples);

/// Window-start decisions for a node entering the windows `starting` (coarse to fine)
/// at their first iteration: stall if the estimate crosses the window's stall
/// threshold or the node is heavy (d >= 2^{2L+1}); heavy-but-not-estimated nodes
/// are scheduled for deferral at the window end; light windows are recorded
/// for the goodness check.
void apply_window_starts(NodeState& s, Weight d, std::uint32_t dhat, std::span<const Window> starting,
                         bool strict_stall);

/// Goodness check at iteration t: an estimate above 2^{3L+2} inside a window in
/// which the node is light schedules deferral at that window's end.
void apply_goodness_check(NodeState& s, std::uint32_t dhat);

/// End-of-iteration bookkeeping at iteration t: pending removals and deferrals
/// that fall due, and expiry of light windows.
void finish_iteration(NodeState& s, std::uint32_t t);

/// Effect of an adjacent MIS join at iteration t.
void dominate(NodeState& s, std::uint32_t t);

}  // namespace sparsemis
