#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsemis/mis.hpp"
#include "sparsemis/sparsifier.hpp"

namespace sparsemis {

struct MpcConfig {
  double alpha = 0.5;
  std::size_t capacity = 0;  // words per machine; 0 = ceil(n^alpha)
  std::size_t machines = 0;  // 0 = enough for twice the input words
  std::uint64_t assign_seed = 0;
  unsigned workers = 1;  // threads simulating machines within a round
};

/// Stored words at a round boundary exceeded the machine capacity.
class MemoryExceeded : public Error {
 public:
  MemoryExceeded(std::size_t machine, std::uint64_t round, std::size_t words, std::size_t capacity)
      : Error("machine " + std::to_string(machine) + " stores " + std::to_string(words) + " words at round " +
              std::to_string(round) + " (capacity " + std::to_string(capacity) + ")"),
        machine(machine), round(round), words(words) {}
  std::size_t machine;
  std::uint64_t round;
  std::size_t words;
};

/// A surviving component does not fit on one machine.
class ComponentTooLarge : public Error {
 public:
  using Error::Error;
};

struct RoundRecord {
  std::uint64_t round = 0;
  std::string label;
  std::vector<std::size_t> stored, sent, received;  // per machine
};

class MachineLedger {
 public:
  MachineLedger() = default;
  MachineLedger(std::size_t machines, std::size_t capacity);

  /// Closes one MPC round. Throws MemoryExceeded if any machine stores more than S.
  void record(std::string label, std::vector<std::size_t> stored, std::vector<std::size_t> sent,
              std::vector<std::size_t> received);

  std::size_t machines() const { return machines_; }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t rounds() const { return history_.size(); }
  std::size_t peak_memory() const { return peak_; }
  /// Rounds in which some machine sent more than S words (logged, not fatal).
  std::size_t send_overflows() const { return send_overflows_; }
  const std::vector<RoundRecord>& history() const { return history_; }

 private:
  std::size_t machines_ = 0;
  std::size_t capacity_ = 0;
  std::size_t peak_ = 0;
  std::size_t send_overflows_ = 0;
  std::vector<RoundRecord> history_;
};

struct Assignment {
  std::vector<std::uint32_t> machine_of;  // per node
  std::vector<std::size_t> load;          // per machine: node records + adjacency words
  std::size_t machines = 0;
  std::size_t capacity = 0;
};

/// Words a node needs to hold its record and adjacency list.
inline std::size_t node_words(const Graph& g, NodeId v) { return 1 + g.degree(v); }

std::size_t resolve_capacity(const MpcConfig& cfg, std::size_t n);

/// Deterministic shuffled placement; throws ConfigError naming the deficit
/// when the input cannot fit.
Assignment assign_nodes(const Graph& g, const MpcConfig& cfg);

struct Balls {
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> ball;  // per vertex: (vertex, distance), sorted
  std::uint32_t rounds = 0;
};

/// Graph exponentiation on h: after round j every vertex knows its
/// min(2^j, radius)-ball; ceil(log2 radius) rounds. Debits the ledger when given.
/// With keep_balls false only the ledger is charged and `ball` stays empty.
Balls exponentiate(const SparseGraph& h, std::uint32_t radius, std::span<const std::uint32_t> machine_of_vertex,
                   std::span<const std::size_t> base_load, MachineLedger* ledger, bool keep_balls = true);

struct MpcMetrics {
  std::size_t n = 0;
  std::size_t delta = 0;
  double alpha = 0;
  std::uint64_t seed = 0;
  std::uint64_t rounds_total = 0;
  std::vector<std::uint64_t> rounds_by_step;
  std::uint64_t post_shatter_rounds = 0;
  std::size_t peak_memory_words = 0;
  std::size_t capacity = 0;
  std::size_t machines = 0;
  std::size_t survivors = 0;
  std::size_t deferred = 0;
  std::size_t mis_size = 0;
};

struct MpcResult {
  NodeSet mis;
  ExecutionTrace trace;  // post-shattered
  MachineLedger ledger;
  MpcMetrics metrics;
};

/// Balls of a phase must cover this H-radius for the local simulation to be exact.
inline std::uint32_t phase_radius(const Window& leaf) { return 3 * leaf.length(); }
inline std::uint32_t exponentiation_rounds(std::uint32_t radius) {
  std::uint32_t r = 0;
  while ((1ull << r) < radius) ++r;
  return r;
}

MpcResult run_mpc(const Graph& g, const TapeSpec& tape, const MisParams& params, const MpcConfig& cfg,
                  Variant variant = Variant::Sparsified);

}  // namespace sparsemis
