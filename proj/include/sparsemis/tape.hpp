#pragma once

#include <cstdint>
#include <string>

#include "sparsemis/graph.hpp"

namespace sparsemis {

/// Fixed-up-front shared randomness: a pure function of (seed, node, iteration, slot).
struct TapeSpec {
  std::uint64_t seed = 0;
  int precision_bits = 64;        // B
  std::uint32_t repetitions = 1;  // k, sampling repetitions per iteration
  std::uint32_t max_iterations = 1;

  /// Throws ConfigError when B is outside [1,64], k < 1, T < 1, or
  /// B < log2(T) + log2(max_degree) + 8.
  void validate(std::size_t max_degree) const;

  friend bool operator==(const TapeSpec&, const TapeSpec&) = default;
};

/// B-bit unsigned numerator; value = numerator / 2^B.
struct Fraction {
  std::uint64_t numerator = 0;
  friend auto operator<=>(const Fraction&, const Fraction&) = default;
};

/// Dyadic probability 2^{-exponent}, or exactly zero.
class Dyadic {
 public:
  static constexpr Dyadic zero() { return Dyadic(-1); }
  static constexpr Dyadic power(int exponent) { return Dyadic(exponent); }
  static constexpr Dyadic half() { return Dyadic(1); }

  constexpr bool is_zero() const { return exponent_ < 0; }
  constexpr int exponent() const { return exponent_; }
  double value() const;

  friend constexpr bool operator==(Dyadic, Dyadic) = default;

 private:
  constexpr explicit Dyadic(int e) : exponent_(e) {}
  int exponent_;
};

/// Slot selector: sample repetition j (1-based) or the marking draw.
struct Slot {
  static constexpr Slot sample(std::uint32_t j) { return Slot{j}; }
  static constexpr Slot mark() { return Slot{0}; }
  std::uint32_t index;  // 0 = mark, j >= 1 = sample repetition j
};

/// Thrown for slot or iteration indices outside the tape's range.
class TapeRangeError : public Error {
 public:
  using Error::Error;
};

Fraction tape_value(const TapeSpec& spec, NodeId node, std::uint32_t iteration, Slot slot);

/// Hash state after absorbing (seed, node, iteration); the draw for a slot is
/// tape_draw(spec, prefix, slot). Lets a caller read all k+1 slots of one
/// (node, iteration) cheaply. Range checks happen in tape_prefix.
std::uint64_t tape_prefix(const TapeSpec& spec, NodeId node, std::uint32_t iteration);
Fraction tape_draw(const TapeSpec& spec, std::uint64_t prefix, Slot slot);

/// Edge-keyed draw for the matching algorithms; (u,v) is canonicalized.
Fraction edge_tape_value(const TapeSpec& spec, NodeId u, NodeId v, std::uint32_t iteration);

/// r < p as an exact integer comparison at precision B.
/// Throws TapeRangeError if p is not representable (exponent > B).
bool below(const TapeSpec& spec, Dyadic p, Fraction r);

/// r < 2^{-exponent} with exponent allowed <= 0 (probability capped at 1).
/// Used for the relevance thresholds p * 2^R.
bool below_scaled(int precision_bits, int exponent, Fraction r);

/// 64-bit finalizer used for counter-mode hashing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace sparsemis
