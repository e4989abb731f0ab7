#include <algorithm>
#include <cmath>

#include "sparsemis/mis.hpp"

namespace sparsemis {

namespace {

double log2_degree(std::size_t max_degree) { return std::log2(static_cast<double>(std::max<std::size_t>(2, max_degree))); }

std::uint32_t ceil_positive(double x) { return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(x - 1e-9))); }

std::size_t isqrt(std::size_t x) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(x)));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r;
}

void build_tree(std::uint32_t first, std::uint32_t last, std::uint32_t base, std::uint32_t level,
                std::vector<Window>& out) {
  out.push_back({first, last, level});
  const std::uint32_t len = last - first + 1;
  if (len <= base) return;
  const std::uint32_t mid = first + (len + 1) / 2 - 1;
  build_tree(first, mid, base, level + 1, out);
  build_tree(mid + 1, last, base, level + 1, out);
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Base: return "base";
    case Variant::Sparsified: return "sparsified";
    case Variant::Recursive: return "recursive";
  }
  return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "base") return Variant::Base;
  if (name == "sparsified") return Variant::Sparsified;
  if (name == "recursive") return Variant::Recursive;
  return std::nullopt;
}

void MisParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
  if (!(c_iterations > 0.0)) throw ConfigError("c_iterations must be positive");
  if (!(C_sampling > 0.0)) throw ConfigError("C_sampling must be positive");
}

std::uint32_t derived_iterations(double c, std::size_t max_degree) { return ceil_positive(c * log2_degree(max_degree)); }

std::uint32_t derived_repetitions(double C, std::size_t max_degree) {
  return ceil_positive(12.0 * C * log2_degree(max_degree));
}

std::uint32_t auto_phase_length(double alpha, std::size_t max_degree) {
  const double r = std::round(alpha * std::sqrt(log2_degree(max_degree)) / 10.0);
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(r));
}

std::uint32_t auto_recursion_base(std::size_t max_degree, std::uint32_t T) {
  const double r = std::round(4.0 * std::log2(log2_degree(max_degree)));
  const auto base = static_cast<std::uint32_t>(std::max(1.0, r));
  return std::clamp<std::uint32_t>(base, 1, std::max<std::uint32_t>(T, 1));
}

std::vector<std::size_t> plan_degree_steps(std::size_t max_degree) {
  std::vector<std::size_t> steps;
  std::size_t x = max_degree;
  while (x > 1) {
    x = isqrt(x);
    if (steps.empty() || steps.back() != x) steps.push_back(std::max<std::size_t>(x, 1));
  }
  if (steps.empty() || steps.back() != 1) steps.push_back(1);
  return steps;
}

std::vector<Window> window_tree(std::uint32_t first, std::uint32_t last, std::uint32_t base) {
  std::vector<Window> out;
  build_tree(first, last, std::max<std::uint32_t>(base, 1), 0, out);
  return out;
}

const Segment& RunPlan::segment_at(std::uint32_t t) const {
  for (const auto& s : segments)
    if (s.first <= t && t <= s.last) return s;
  throw Error("iteration " + std::to_string(t) + " outside plan");
}

std::vector<Window> RunPlan::starting_at(std::uint32_t t) const {
  const Segment& s = segment_at(t);
  auto it = std::lower_bound(s.windows.begin(), s.windows.end(), t,
                             [](const Window& w, std::uint32_t v) { return w.start < v; });
  std::vector<Window> out;
  for (; it != s.windows.end() && it->start == t; ++it) out.push_back(*it);
  return out;
}

const Window& RunPlan::leaf_at(std::uint32_t t) const {
  const Segment& s = segment_at(t);
  auto it = std::upper_bound(s.leaves.begin(), s.leaves.end(), t,
                             [](std::uint32_t v, const Window& w) { return v < w.start; });
  return *std::prev(it);
}

namespace {

void fill_windows(Segment& seg, Variant variant, std::uint32_t R, std::uint32_t base, bool& strict) {
  seg.windows.clear();
  seg.leaves.clear();
  switch (variant) {
    case Variant::Base:
      seg.leaves.push_back({seg.first, seg.last, 0});
      break;
    case Variant::Sparsified:
      for (std::uint32_t s = seg.first; s <= seg.last; s += R) seg.windows.push_back({s, std::min(seg.last, s + R - 1), 0});
      seg.leaves = seg.windows;
      break;
    case Variant::Recursive:
      seg.windows = window_tree(seg.first, seg.last, base);
      for (const auto& w : seg.windows)
        if (w.length() <= base) seg.leaves.push_back(w);
      // a single window is Algorithm 2 with R = T
      if (seg.windows.size() > 1) strict = true;
      break;
  }
}

}  // namespace

RunPlan make_plan(const Graph& g, const MisParams& params, Variant variant) {
  params.validate();
  const std::size_t delta = g.max_degree();
  RunPlan plan;
  plan.variant = variant;
  plan.repetitions = params.repetitions ? params.repetitions : derived_repetitions(params.C_sampling, delta);
  plan.phase_length = params.phase_length_R ? params.phase_length_R : auto_phase_length(params.alpha, delta);

  std::vector<std::pair<std::size_t, std::uint32_t>> steps;  // (threshold, iterations)
  if (!params.degree_steps) {
    steps.emplace_back(0, params.iterations ? params.iterations : derived_iterations(params.c_iterations, delta));
  } else {
    std::size_t prev = delta;
    for (std::size_t thr : plan_degree_steps(delta)) {
      steps.emplace_back(thr, params.iterations ? params.iterations : derived_iterations(params.c_iterations, prev));
      prev = thr;
    }
  }

  std::uint32_t next = 1;
  for (auto [thr, len] : steps) {
    Segment seg;
    seg.first = next;
    seg.last = next + len - 1;
    seg.threshold = thr;
    seg.takes_all = thr <= 1;
    const std::uint32_t base = params.recursion_base ? std::min(params.recursion_base, len)
                                                     : auto_recursion_base(delta, len);
    plan.recursion_base = base;
    fill_windows(seg, variant, plan.phase_length, base, plan.strict_stall);
    plan.segments.push_back(std::move(seg));
    next += len;
  }
  plan.total_iterations = next - 1;
  return plan;
}

RunPlan make_base_plan(std::uint32_t T) {
  if (T < 1) throw ConfigError("T must be >= 1");
  RunPlan plan;
  plan.total_iterations = T;
  Segment seg;
  seg.first = 1;
  seg.last = T;
  seg.leaves.push_back({1, T, 0});
  plan.segments.push_back(std::move(seg));
  return plan;
}

TapeSpec make_tape_spec(std::uint64_t seed, const RunPlan& plan, const Graph& g, int precision_bits) {
  TapeSpec t;
  t.seed = seed;
  t.precision_bits = precision_bits;
  t.repetitions = plan.repetitions;
  t.max_iterations = plan.total_iterations;
  t.validate(g.max_degree());
  return t;
}

}  // namespace sparsemis
