#include "sparsemis/tape.hpp"

#include <cmath>

namespace sparsemis {

namespace {
constexpr std::uint64_t kNodeKey = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kIterKey = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kSlotKey = 0x165667B19E3779F9ULL;
constexpr std::uint64_t kEdgeDomain = 0xD6E8FEB86659FD93ULL;

std::uint64_t to_precision(std::uint64_t h, int bits) { return bits >= 64 ? h : h >> (64 - bits); }
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

void TapeSpec::validate(std::size_t max_degree) const {
  if (precision_bits < 1 || precision_bits > 64) throw ConfigError("tape.precision_bits must lie in [1,64]");
  if (repetitions < 1) throw ConfigError("tape.repetitions must be >= 1");
  if (max_iterations < 1) throw ConfigError("tape.max_iterations must be >= 1");
  const double need = std::log2(static_cast<double>(max_iterations)) +
                      std::log2(static_cast<double>(std::max<std::size_t>(max_degree, 1))) + 8.0;
  if (precision_bits < need)
    throw ConfigError("tape.precision_bits=" + std::to_string(precision_bits) + " below required " +
                      std::to_string(static_cast<int>(std::ceil(need))));
}

double Dyadic::value() const { return is_zero() ? 0.0 : std::ldexp(1.0, -exponent_); }

std::uint64_t tape_prefix(const TapeSpec& spec, NodeId node, std::uint32_t iteration) {
  if (iteration < 1 || iteration > spec.max_iterations)
    throw TapeRangeError("tape iteration " + std::to_string(iteration) + " outside [1," +
                         std::to_string(spec.max_iterations) + "]");
  std::uint64_t h = mix64(spec.seed);
  h = mix64(h ^ ((static_cast<std::uint64_t>(node) + 1) * kNodeKey));
  return mix64(h ^ (static_cast<std::uint64_t>(iteration) * kIterKey));
}

Fraction tape_draw(const TapeSpec& spec, std::uint64_t prefix, Slot slot) {
  if (slot.index > spec.repetitions)
    throw TapeRangeError("tape sample slot " + std::to_string(slot.index) + " exceeds k=" +
                         std::to_string(spec.repetitions));
  const std::uint64_t h = mix64(prefix ^ ((static_cast<std::uint64_t>(slot.index) + 1) * kSlotKey));
  return Fraction{to_precision(h, spec.precision_bits)};
}

Fraction tape_value(const TapeSpec& spec, NodeId node, std::uint32_t iteration, Slot slot) {
  return tape_draw(spec, tape_prefix(spec, node, iteration), slot);
}

Fraction edge_tape_value(const TapeSpec& spec, NodeId u, NodeId v, std::uint32_t iteration) {
  auto [a, b] = canonical(u, v);
  std::uint64_t h = mix64(spec.seed ^ kEdgeDomain);
  h = mix64(h ^ ((static_cast<std::uint64_t>(a) + 1) * kNodeKey));
  h = mix64(h ^ ((static_cast<std::uint64_t>(b) + 1) * kSlotKey));
  h = mix64(h ^ ((static_cast<std::uint64_t>(iteration) + 1) * kIterKey));
  return Fraction{to_precision(h, spec.precision_bits)};
}

bool below_scaled(int precision_bits, int exponent, Fraction r) {
  if (exponent <= 0) return true;
  if (exponent >= precision_bits) return exponent == precision_bits && r.numerator == 0;
  return r.numerator < (std::uint64_t{1} << (precision_bits - exponent));
}

bool below(const TapeSpec& spec, Dyadic p, Fraction r) {
  if (p.is_zero()) return false;
  if (p.exponent() > spec.precision_bits)
    throw TapeRangeError("probability 2^-" + std::to_string(p.exponent()) + " not representable at B=" +
                         std::to_string(spec.precision_bits));
  return below_scaled(spec.precision_bits, p.exponent(), r);
}

}  // namespace sparsemis
