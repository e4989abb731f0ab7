#include "sparsemis/dynamics.hpp"

namespace sparsemis {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Active: return "active";
    case Status::InMIS: return "in_mis";
    case Status::Removed: return "removed";
    case Status::Deferred: return "deferred";
  }
  return "unknown";
}

std::uint32_t weight_floor(Weight d) {
  const Weight whole = d >> 64;
  return whole > 0xFFFFFFFFu ? 0xFFFFFFFFu : static_cast<std::uint32_t>(whole);
}

Dyadic update_probability(Dyadic p, bool halve, int precision_bits) {
  return Dyadic::power(updated_exponent(p.exponent(), halve, precision_bits));
}

std::uint32_t lower_median(std::vector<std::uint32_t> values) { return lower_median_in_place(values); }

std::uint32_t lower_median_in_place(std::span<std::uint32_t> values) {
  if (values.empty()) return 0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::vector<std::uint16_t> sampled_repetitions(const TapeSpec& tape, NodeId v, std::uint32_t t, int p_exp) {
  std::vector<std::uint16_t> out;
  const std::uint64_t prefix = tape_prefix(tape, v, t);
  for (std::uint32_t j = 1; j <= tape.repetitions; ++j)
    if (below_scaled(tape.precision_bits, p_exp, tape_draw(tape, prefix, Slot::sample(j))))
      out.push_back(static_cast<std::uint16_t>(j - 1));
  return out;
}

std::uint32_t median_estimate(std::uint32_t repetitions,
                              std::span<const std::vector<std::uint16_t>* const> neighbor_samples) {
  std::vector<std::uint32_t> sums(repetitions, 0);
  for (const auto* s : neighbor_samples)
    for (auto j : *s) ++sums[j];
  return lower_median(std::move(sums));
}

void apply_window_starts(NodeState& s, Weight d, std::uint32_t dhat, std::span<const Window> starting,
                         bool strict_stall) {
  for (const Window& w : starting) {
    if (s.stall_end >= w.start) break;
    const std::uint32_t L = w.length();
    const bool estimated = strict_stall ? above_pow2(dhat, 2 * L) : at_least_pow2(dhat, 2 * L);
    const bool heavy = weight_at_least_pow2(d, static_cast<int>(2 * L + 1));
    if (estimated || heavy) {
      s.stall_end = w.end;
      if (!estimated && (s.defer_at == 0 || w.end < s.defer_at)) s.defer_at = w.end;
    } else {
      s.light_windows.push_back({w.end, L});
    }
  }
}

void apply_goodness_check(NodeState& s, std::uint32_t dhat) {
  for (const LightWindow& lw : s.light_windows)
    if (above_pow2(dhat, 3 * lw.length + 2) && (s.defer_at == 0 || lw.end < s.defer_at)) s.defer_at = lw.end;
}

void finish_iteration(NodeState& s, std::uint32_t t) {
  if (s.status == Status::Active) {
    if (s.pending_removal && s.stall_end <= t) {
      s.status = Status::Removed;
      s.decided_at = t;
    } else if (!s.pending_removal && s.defer_at != 0 && s.defer_at <= t) {
      s.status = Status::Deferred;
      s.decided_at = t;
    }
  }
  std::erase_if(s.light_windows, [t](const LightWindow& lw) { return lw.end <= t; });
}

void dominate(NodeState& s, std::uint32_t t) {
  if (s.status != Status::Active || s.pending_removal) return;
  if (!s.asleep && s.stall_end > t) {
    s.pending_removal = true;
  } else {
    s.status = Status::Removed;
    s.decided_at = t;
  }
}

}  // namespace sparsemis
