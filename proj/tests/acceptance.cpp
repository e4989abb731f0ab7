// Acceptance suite: one PASS/FAIL line per criterion. Every suite emits a
// metrics file; criterion 11 re-runs all suites on two workers and compares
// the files byte for byte.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "sparsemis/experiments.hpp"
#include "sparsemis/parallel.hpp"

using namespace sparsemis;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and sizes.
constexpr double kC1Limit = 120, kC2Limit = 60, kC5Limit = 30, kC6Limit = 300, kC10Limit = 120;
constexpr int kC1Runs = 200, kC2Runs = 50, kC4Runs = 102, kC6Runs = 50, kC7Runs = 30, kC8Runs = 30;
constexpr std::size_t kMaxDegree = 64;
constexpr std::size_t kC2MaxN = 500;
constexpr double kC5Rate = 0.01;
constexpr int kC5TrialsPerCondition = 10000;
constexpr double kC5C = 2.0;
constexpr std::size_t kC5Delta = 1024;
constexpr double kC6SuccessShare = 0.95;
constexpr std::size_t kC6N = 10000, kC6Delta = 32;
constexpr double kC6IterationFactor = 50;
constexpr std::size_t kC7N = 800, kC7Machines = 64;
constexpr std::size_t kC7Capacity = std::size_t{1} << 32;
constexpr std::size_t kC8N = 300, kC8Sample = 50;
constexpr double kC8P = 0.05;
constexpr std::size_t kC9N = 300, kC9Sample = 25, kC9Seeds = 2;
constexpr int kC10Runs = 100, kC10RatioSeeds = 200;
constexpr std::size_t kC10EdgeLimit = 64, kC10CoverEdgeLimit = 1000;
constexpr double kC10MinRatio = 1.0 / 8;

struct Suite {
  bool pass = true;
  std::string detail;
  std::string metrics;  // CSV text written to cN.csv
  std::vector<fs::path> extra;  // experiment output files
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

// Row-wise metrics assembled in index order; rows are produced in parallel.
template <class Fn>
std::string rows_in_order(unsigned workers, std::size_t count, const std::string& header, Fn&& fn) {
  std::vector<std::string> rows(count);
  detail::parallel_for(workers, count, [&](std::size_t i) { rows[i] = fn(i); });
  std::string out = header + "\n";
  for (auto& r : rows) out += r;
  return out;
}

RunOptions lean() {
  RunOptions o;
  o.record_rows = false;
  return o;
}

std::size_t count_field(const std::string& csv, const std::string& needle) {
  std::size_t c = 0;
  for (std::size_t pos = csv.find(needle); pos != std::string::npos; pos = csv.find(needle, pos + 1)) ++c;
  return c;
}

// ---------------------------------------------------------------------------

Suite c1(unsigned workers) {
  static const std::size_t ns[] = {200, 500, 1000, 2000};
  static const double means[] = {8, 16, 32};
  static const std::size_t degrees[] = {8, 16, 32, 64};
  std::vector<int> failures(kC1Runs, 0);
  Suite s;
  s.metrics = rows_in_order(workers, kC1Runs, "run,model,n,delta,seed,variant,mis_size,survivors,valid", [&](std::size_t i) {
    const std::uint64_t seed = 1000 + i;
    const std::size_t n = ns[(i / 2) % 4];
    const bool gnp = i % 2 == 0;
    Graph g = gnp ? make_gnp(n, means[(i / 8) % 3] / double(n), seed) : make_d_regular(n, degrees[(i / 8) % 4], seed);
    std::string out;
    if (g.max_degree() > kMaxDegree) failures[i] += 1;
    for (Variant v : {Variant::Base, Variant::Sparsified, Variant::Recursive}) {
      const MisParams mp;
      const RunPlan plan = make_plan(g, mp, v);
      const TapeSpec tape = make_tape_spec(seed, plan, g);
      const ExecutionTrace tr = post_shatter(g, run_plan(g, tape, plan, lean()));
      const bool ok = is_valid(verify_mis(g, tr.mis));
      failures[i] += !ok;
      out += std::to_string(i) + "," + (gnp ? "gnp" : "d_regular") + "," + std::to_string(n) + "," +
             std::to_string(g.max_degree()) + "," + std::to_string(seed) + "," + std::string(to_string(v)) + "," +
             std::to_string(tr.mis.count()) + "," + std::to_string(tr.survivors.count()) + "," + (ok ? "1" : "0") +
             "\n";
    }
    return out;
  });
  int total = 0;
  for (int f : failures) total += f;
  s.pass = total == 0;
  s.detail = std::to_string(3 * kC1Runs) + " post-shattered runs verified, " + std::to_string(total) + " failures";
  return s;
}

// ---------------------------------------------------------------------------

struct PhaseAudit {
  std::size_t compared = 0, mismatched = 0, light = 0, nonrelevant_active = 0;
};

// Criteria 2 and 3 share one sweep.
std::pair<Suite, Suite> c2_c3(unsigned workers) {
  static const std::size_t ns[] = {200, 300, 400, 500};
  static const double means[] = {10, 20, 40};
  std::vector<PhaseAudit> audits(kC2Runs);
  const std::string metrics = rows_in_order(
      workers, kC2Runs, "run,n,delta,R,seed,phases,light_vertices,compared,mismatched,nonrelevant_active",
      [&](std::size_t i) {
        const std::uint64_t seed = 2000 + i;
        const std::size_t n = ns[i % 4];
        const std::uint32_t R = 1 + i % 3;
        Graph g = make_gnp(n, means[(i / 4) % 3] / double(n), seed);
        MisParams mp;
        mp.phase_length_R = R;
        const RunPlan plan = make_plan(g, mp, Variant::Sparsified);
        const TapeSpec tape = make_tape_spec(seed, plan, g);
        RunOptions opt;
        opt.record_phase_starts = true;
        const ExecutionTrace tr = run_plan(g, tape, plan, opt);

        // row index: iteration -> node -> position in tr.rows
        std::vector<std::vector<std::int64_t>> at(tr.executed + 1, std::vector<std::int64_t>(n, -1));
        for (std::size_t r = 0; r < tr.rows.size(); ++r) at[tr.rows[r].iteration][tr.rows[r].node] = std::int64_t(r);

        PhaseAudit& a = audits[i];
        for (const PhaseStart& ps : tr.phase_starts) {
          const Classification cls =
              classify_nodes(g, ps.states, tape, plan, ps.leaf, GoodnessMode::OracleGoodness, &tr);
          a.nonrelevant_active += relevance_audit(cls, tr).size();
          const SparseGraph h = build_sparse_graph(g, cls, tape);
          for (const SparseOutcome& o : simulate_phase_on_sparse(h)) {
            ++a.light;
            bool same = true;
            for (std::uint32_t t = ps.leaf.start; t <= ps.leaf.end; ++t) {
              const std::size_t j = t - ps.leaf.start;
              const std::int64_t r = t < at.size() ? at[t][o.origin] : -1;
              if (bool(o.trajectory.live[j]) != (r >= 0)) {
                same = false;
                break;
              }
              if (r < 0) continue;
              const TraceRow& row = tr.rows[std::size_t(r)];
              same = same && o.trajectory.dhat[j] == row.dhat && bool(o.trajectory.marked[j]) == row.marked &&
                     o.trajectory.sampled[j] == row.sampled && o.trajectory.p_after[j] == row.p_exp &&
                     bool(o.trajectory.stalled[j]) == row.stalled && o.trajectory.status_after[j] == row.status;
            }
            ++a.compared;
            a.mismatched += !same;
          }
        }
        return std::to_string(i) + "," + std::to_string(n) + "," + std::to_string(g.max_degree()) + "," +
               std::to_string(R) + "," + std::to_string(seed) + "," + std::to_string(tr.phase_starts.size()) + "," +
               std::to_string(a.light) + "," + std::to_string(a.compared) + "," + std::to_string(a.mismatched) + "," +
               std::to_string(a.nonrelevant_active) + "\n";
      });
  PhaseAudit total;
  for (const auto& a : audits) {
    total.compared += a.compared;
    total.mismatched += a.mismatched;
    total.nonrelevant_active += a.nonrelevant_active;
  }
  Suite s2, s3;
  s2.metrics = metrics;
  s2.pass = total.mismatched == 0 && total.compared > 0;
  s2.detail = std::to_string(total.compared) + " good light vertex trajectories over " + std::to_string(kC2Runs) +
              " runs (n <= " + std::to_string(kC2MaxN) + "), " + std::to_string(total.mismatched) + " mismatches";
  s3.metrics = metrics;
  s3.pass = total.nonrelevant_active == 0;
  s3.detail = std::to_string(total.nonrelevant_active) + " non-relevant nodes sampled or marked";
  return {s2, s3};
}

// ---------------------------------------------------------------------------

Suite c4(unsigned workers) {
  static const std::size_t deltas[] = {32, 64};
  std::vector<std::size_t> light_viol(kC4Runs, 0), copy_viol(kC4Runs, 0);
  Suite s;
  s.metrics = rows_in_order(workers, kC4Runs, "run,delta,R,seed,phases,max_light_degree,bound,light_violations,copy_violations",
                            [&](std::size_t i) {
                              const std::size_t delta = deltas[i % 2];
                              const std::uint32_t R = 1 + (i / 2) % 3;
                              const std::uint64_t seed = 4000 + i;
                              Graph g = make_d_regular(600, delta, seed);
                              MisParams mp;
                              mp.phase_length_R = R;
                              const RunPlan plan = make_plan(g, mp, Variant::Sparsified);
                              const TapeSpec tape = make_tape_spec(seed, plan, g);
                              RunOptions opt;
                              opt.record_phase_starts = true;
                              const ExecutionTrace tr = run_plan(g, tape, plan, opt);
                              std::size_t max_light = 0;
                              std::uint64_t bound = 0;
                              for (const PhaseStart& ps : tr.phase_starts) {
                                const Classification cls = classify_nodes(g, ps.states, tape, plan, ps.leaf,
                                                                          GoodnessMode::OracleGoodness, &tr);
                                const DegreeReport rep =
                                    check_degree_bound(build_sparse_graph(g, cls, tape), tape.repetitions);
                                light_viol[i] += rep.light_violations;
                                copy_viol[i] += rep.copy_violations;
                                max_light = std::max(max_light, rep.max_light_degree);
                                bound = std::max(bound, rep.bound);
                              }
                              return std::to_string(i) + "," + std::to_string(delta) + "," + std::to_string(R) + "," +
                                     std::to_string(seed) + "," + std::to_string(tr.phase_starts.size()) + "," +
                                     std::to_string(max_light) + "," + std::to_string(bound) + "," +
                                     std::to_string(light_viol[i]) + "," + std::to_string(copy_viol[i]) + "\n";
                            });
  std::size_t lv = 0, cv = 0;
  for (int i = 0; i < kC4Runs; ++i) lv += light_viol[i], cv += copy_viol[i];
  s.pass = lv == 0 && cv == 0;
  s.detail = std::to_string(kC4Runs) + " runs, bound k*R*2^(3R+2): " + std::to_string(lv) +
             " light violations, " + std::to_string(cv) + " copy violations";
  return s;
}

// ---------------------------------------------------------------------------

Suite c5(unsigned workers) {
  struct Setting {
    const char* condition;
    std::size_t leaves;
    int p_exp;
  };
  // d = leaves * 2^-p_exp
  static const Setting settings[] = {{"d>20", 42, 1}, {"d>20", 88, 2}, {"d<0.4", 3, 3}, {"d<0.4", 100, 8}};
  const std::uint32_t k = derived_repetitions(kC5C, kC5Delta);
  const Graph g = make_star(kC5Delta + 1);
  const int per_setting = kC5TrialsPerCondition / 2;

  std::map<std::string, std::pair<std::size_t, std::size_t>> by_condition;  // bad, trials
  std::string metrics = "condition,leaves,p_exp,d,k,trials,bad,rate\n";
  for (std::size_t si = 0; si < 4; ++si) {
    const Setting& st = settings[si];
    std::vector<NodeState> snap(g.node_count());
    for (NodeId v = 1; v < g.node_count(); ++v) {
      snap[v].status = v <= st.leaves ? Status::Active : Status::Removed;
      snap[v].p_exp = st.p_exp;
    }
    const bool high = std::string(st.condition) == "d>20";
    std::vector<std::uint8_t> bad(per_setting, 0);
    detail::parallel_for(workers, per_setting, [&](std::size_t trial) {
      const TapeSpec tape{7000000 + si * 1000003 + trial, 64, k, 1};
      const std::uint32_t dh = estimate_dhat(g, 0, snap, tape, 1);
      bad[trial] = high ? dh < 2 : dh >= 2;
    });
    std::size_t nbad = 0;
    for (auto b : bad) nbad += b;
    auto& c = by_condition[st.condition];
    c.first += nbad;
    c.second += per_setting;
    const double d = double(st.leaves) * std::ldexp(1.0, -st.p_exp);
    metrics += std::string(st.condition) + "," + std::to_string(st.leaves) + "," + std::to_string(st.p_exp) + "," +
               fmt(d, 6) + "," + std::to_string(k) + "," + std::to_string(per_setting) + "," + std::to_string(nbad) +
               "," + fmt(double(nbad) / per_setting, 6) + "\n";
  }
  Suite s;
  s.metrics = metrics;
  std::string detail = "k=" + std::to_string(k) + ";";
  for (const auto& [cond, c] : by_condition) {
    const double rate = double(c.first) / double(c.second);
    s.pass = s.pass && rate <= kC5Rate;
    detail += " Pr[miss | " + cond + "] = " + fmt(rate) + " over " + std::to_string(c.second) + " trials;";
  }
  s.detail = detail;
  return s;
}

// ---------------------------------------------------------------------------

Suite c6(unsigned workers) {
  std::vector<std::uint8_t> ok(kC6Runs, 0);
  Suite s;
  s.metrics = rows_in_order(workers, kC6Runs, "run,n,delta,T,seed,executed,survivors,max_component,fraction_ok,component_ok",
                            [&](std::size_t i) {
                              const std::uint64_t seed = 6000 + i;
                              Graph g = make_d_regular(kC6N, kC6Delta, seed);
                              MisParams mp;
                              mp.c_iterations = kC6IterationFactor;
                              const RunPlan plan = make_plan(g, mp, Variant::Sparsified);
                              const TapeSpec tape = make_tape_spec(seed, plan, g);
                              const ExecutionTrace tr = run_plan(g, tape, plan, lean());
                              std::size_t largest = 0;
                              for (const auto& c : connected_components(g, tr.survivors))
                                largest = std::max(largest, c.size());
                              const double D = double(g.max_degree());
                              const bool frac = double(tr.survivors.count()) <= double(kC6N) / (D * D);
                              const bool comp = double(largest) <= std::pow(D, 4) * std::log2(double(kC6N));
                              ok[i] = frac && comp;
                              return std::to_string(i) + "," + std::to_string(kC6N) + "," +
                                     std::to_string(g.max_degree()) + "," + std::to_string(plan.total_iterations) +
                                     "," + std::to_string(seed) + "," + std::to_string(tr.executed) + "," +
                                     std::to_string(tr.survivors.count()) + "," + std::to_string(largest) + "," +
                                     (frac ? "1" : "0") + "," + (comp ? "1" : "0") + "\n";
                            });
  int good = 0;
  for (auto x : ok) good += x;
  s.pass = good >= kC6SuccessShare * kC6Runs;
  s.detail = std::to_string(good) + "/" + std::to_string(kC6Runs) +
             " runs with survivors <= n/Delta^2 and components <= Delta^4 log2 n";
  return s;
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
T field(const MetricsRecord& r, const std::string& key) {
  return std::get<T>(*r.get(key));
}

Suite c7(unsigned workers, const fs::path& dir) {
  static const std::size_t deltas[] = {16, 64, 256};
  ExperimentConfig cfg;
  cfg.name = "c7";
  for (std::size_t d : deltas) {
    GraphSource src;
    src.spec = {GraphModel::DRegular, kC7N, 0.0, d, 0};
    cfg.graphs.push_back(src);
  }
  for (int i = 0; i < kC7Runs / 3; ++i) cfg.seeds.push_back(7000 + i);
  cfg.mpc.capacity = kC7Capacity;
  cfg.mpc.machines = kC7Machines;
  cfg.variants = {"mpc"};
  cfg.cross_check.models = {"centralized", "mpc"};
  cfg.workers = workers;
  cfg.out_dir = dir / "c7";
  const ExperimentReport rep = run_experiment(cfg);

  Suite s;
  s.pass = rep.exit_status == 0;
  std::size_t runs = 0, agreeing = 0, within = 0;
  std::map<std::size_t, std::pair<double, int>> rounds;  // delta -> sum, count
  std::string table = "delta,seed,rounds_total,post_shatter_rounds,peak_memory_words,capacity,machines\n";
  for (const auto& r : rep.records) {
    if (r.table == "mpc") {
      ++runs;
      const auto peak = field<std::uint64_t>(r, "peak_memory_words"), cap = field<std::uint64_t>(r, "capacity");
      within += peak <= cap;
      const std::size_t d = field<std::uint64_t>(r, "delta");
      auto& acc = rounds[d];
      acc.first += double(field<std::uint64_t>(r, "rounds_total"));
      ++acc.second;
      table += std::to_string(d) + "," + std::to_string(field<std::uint64_t>(r, "seed")) + "," +
               std::to_string(field<std::uint64_t>(r, "rounds_total")) + "," +
               std::to_string(field<std::uint64_t>(r, "post_shatter_rounds")) + "," + std::to_string(peak) + "," +
               std::to_string(cap) + "," + std::to_string(field<std::uint64_t>(r, "machines")) + "\n";
    }
    if (r.table == "cross_check")
      agreeing += field<std::uint64_t>(r, "disagree") == 0 && field<std::uint64_t>(r, "compared") == kC7N;
  }
  table += "delta,mean_rounds\n";
  std::string trend;
  double prev = -1;
  bool monotone = true;
  for (const auto& [d, acc] : rounds) {
    const double mean = acc.first / acc.second;
    monotone = monotone && mean >= prev;
    prev = mean;
    table += std::to_string(d) + "," + fmt(mean, 6) + "\n";
    trend += " Delta=" + std::to_string(d) + ": " + fmt(mean) + " rounds;";
  }
  s.pass = s.pass && runs == std::size_t(kC7Runs) && agreeing == runs && within == runs && monotone;
  s.metrics = table;
  s.extra = rep.files;
  s.detail = std::to_string(agreeing) + "/" + std::to_string(runs) + " runs in full agreement, " +
             std::to_string(within) + "/" + std::to_string(runs) + " with peak <= S;" + trend +
             (monotone ? " non-decreasing" : " NOT monotone");
  for (const auto& f : rep.failures) s.detail += " [" + f + "]";
  return s;
}

// ---------------------------------------------------------------------------

Suite c8(unsigned workers, const fs::path& dir) {
  Suite s;
  std::size_t checks = 0, agreeing = 0, consistent = 0, answers = 0;
  std::string table = "variant,seed,compared,agree,consistent,probes_mean,probes_max\n";
  for (const char* model : {"lca-chained", "lca-recursive"}) {
    ExperimentConfig cfg;
    cfg.name = std::string("c8-") + model;
    GraphSource src;
    src.spec = {GraphModel::Gnp, kC8N, kC8P, 0, 0};
    cfg.graphs.push_back(src);
    for (int i = 0; i < kC8Runs; ++i) cfg.seeds.push_back(8000 + i);
    cfg.lca.sample = kC8Sample;
    cfg.variants = {model};
    cfg.cross_check.models = {"centralized", model};
    cfg.cross_check.variant = std::string(model) == "lca-chained" ? Variant::Sparsified : Variant::Recursive;
    cfg.workers = workers;
    cfg.out_dir = dir / cfg.name;
    const ExperimentReport rep = run_experiment(cfg);
    s.pass = s.pass && rep.exit_status == 0;
    for (const auto& f : rep.failures) s.detail += "[" + f + "] ";
    for (const auto& r : rep.records) {
      if (r.table == "cross_check") {
        ++checks;
        agreeing += field<std::uint64_t>(r, "compared") == kC8Sample && field<std::uint64_t>(r, "disagree") == 0;
      }
      if (r.table == "lca") {
        consistent += field<bool>(r, "consistent");
        answers += field<std::uint64_t>(r, "sampled");
        table += std::string(model) + "," + std::to_string(field<std::uint64_t>(r, "seed")) + "," +
                 std::to_string(field<std::uint64_t>(r, "sampled")) + "," +
                 std::to_string(field<std::uint64_t>(r, "agree")) + "," + (field<bool>(r, "consistent") ? "1" : "0") +
                 "," + fmt(field<double>(r, "probes_mean"), 8) + "," +
                 std::to_string(field<std::uint64_t>(r, "probes_max")) + "\n";
      }
    }
    for (const auto& f : rep.files) s.extra.push_back(f);
  }
  const std::size_t expected = 2 * kC8Runs;
  s.pass = s.pass && checks == expected && agreeing == expected && consistent == expected;
  s.metrics = table;
  s.detail += std::to_string(agreeing) + "/" + std::to_string(checks) + " cross-checks with 100% agreement (" +
              std::to_string(answers) + " answers), " + std::to_string(consistent) + " consistent answer sets";
  return s;
}

// ---------------------------------------------------------------------------

Suite c9(unsigned workers) {
  static const std::size_t deltas[] = {8, 16, 32, 64};
  struct Row {
    std::size_t delta;
    std::uint64_t seed;
    NodeId node;
    std::uint64_t lca_memo, lca_faithful, pr;
  };
  const std::size_t points = 4 * kC9Seeds;
  std::vector<std::vector<Row>> rows(points);
  detail::parallel_for(workers, points, [&](std::size_t i) {
    const std::size_t delta = deltas[i / kC9Seeds];
    const std::uint64_t seed = 9000 + i;
    Graph g = make_d_regular(kC9N, delta, seed);
    MisParams mp;
    const RunPlan plan = make_plan(g, mp, Variant::Recursive);
    const TapeSpec tape = make_tape_spec(seed, plan, g);
    const RunPlan base = make_plan(g, mp, Variant::Base);
    const TapeSpec base_tape = make_tape_spec(seed, base, g);
    LcaOracle oracle(g, tape, mp, LcaVariant::Recursive);
    for (NodeId v : sample_nodes(g.node_count(), kC9Sample, seed)) {
      QueryLedger lm, lf, lp;
      GraphAccess memo(g, lm, ProbeMode::Memoized), faithful(g, lf, ProbeMode::Faithful),
          pr(g, lp, ProbeMode::Memoized);
      Row r{delta, seed, v, oracle.answer(v, memo).probes_used, oracle.answer(v, faithful).probes_used,
            parnas_ron_baseline(v, pr, base_tape, base.total_iterations).probes_used};
      rows[i].push_back(r);
    }
  });
  Suite s;
  std::string out = "delta,seed,node,lca_recursive_memoized,lca_recursive_faithful,parnas_ron\n";
  std::size_t violations = 0, total = 0;
  std::map<std::size_t, std::array<double, 4>> agg;  // sum ratio, max ratio, sum faithful ratio, count
  for (const auto& pr : rows)
    for (const Row& r : pr) {
      ++total;
      violations += r.lca_memo > r.pr;
      out += std::to_string(r.delta) + "," + std::to_string(r.seed) + "," + std::to_string(r.node) + "," +
             std::to_string(r.lca_memo) + "," + std::to_string(r.lca_faithful) + "," + std::to_string(r.pr) + "\n";
      auto& a = agg[r.delta];
      const double ratio = double(r.lca_memo) / double(r.pr);
      a[0] += ratio;
      a[1] = std::max(a[1], ratio);
      a[2] += double(r.lca_faithful) / double(r.pr);
      a[3] += 1;
    }
  out += "delta,mean_ratio_memoized,max_ratio_memoized,mean_ratio_faithful\n";
  std::string trend;
  for (const auto& [d, a] : agg) {
    out += std::to_string(d) + "," + fmt(a[0] / a[3], 6) + "," + fmt(a[1], 6) + "," + fmt(a[2] / a[3], 6) + "\n";
    trend += " Delta=" + std::to_string(d) + ": ratio " + fmt(a[0] / a[3]) + " (faithful " + fmt(a[2] / a[3]) + ");";
  }
  s.metrics = out;
  s.pass = violations == 0 && total == points * kC9Sample;
  s.detail = std::to_string(violations) + " violations over " + std::to_string(total) +
             " sampled nodes (memoized probes);" + trend;
  return s;
}

// ---------------------------------------------------------------------------

Suite c10(unsigned workers) {
  std::vector<std::size_t> invalid(kC10Runs, 0), not_maximal(kC10Runs, 0), cover_bad(kC10Runs, 0);
  Suite s;
  std::string runs = rows_in_order(workers, kC10Runs,
                                   "run,n,m,seed,base_size,sparse_size,line_size,opt_size,cover_size,valid,maximal,cover_ok",
                                   [&](std::size_t i) {
                                     const std::size_t n = i % 2 ? 60 : 40;
                                     const double p = (i / 2) % 2 ? 0.1 : 0.08;
                                     const std::uint64_t seed = 10000 + i;
                                     Graph g = make_gnp(n, p, seed);
                                     TapeSpec tape;
                                     tape.seed = seed;
                                     const EdgeSet mb = run_base_matching(g, tape).matching;
                                     const EdgeSet ms = run_sparse_matching(g, tape).matching;
                                     const EdgeSet ml = maximal_matching_via_line_mis(g, tape);
                                     invalid[i] += !is_valid(verify_matching(g, mb, false));
                                     invalid[i] += !is_valid(verify_matching(g, ms, false));
                                     invalid[i] += !is_valid(verify_matching(g, ml, false));
                                     not_maximal[i] += !is_valid(verify_matching(g, ml, true));
                                     const std::size_t opt = exact_max_matching_small(g, kC10CoverEdgeLimit).size();
                                     std::size_t cover_size = 0;
                                     if (!not_maximal[i]) {
                                       const NodeSet cover = vertex_cover_2approx(g, ml);
                                       cover_size = cover.count();
                                       for (auto [u, v] : g.edges())
                                         cover_bad[i] += !(cover.contains(u) || cover.contains(v));
                                       cover_bad[i] += cover_size > 2 * opt;
                                     }
                                     return std::to_string(i) + "," + std::to_string(n) + "," +
                                            std::to_string(g.edge_count()) + "," + std::to_string(seed) + "," +
                                            std::to_string(mb.size()) + "," + std::to_string(ms.size()) + "," +
                                            std::to_string(ml.size()) + "," + std::to_string(opt) + "," +
                                            std::to_string(cover_size) + "," + (invalid[i] ? "0" : "1") + "," +
                                            (not_maximal[i] ? "0" : "1") + "," + (cover_bad[i] ? "0" : "1") + "\n";
                                   });

  // approximation sweep on small graphs
  std::vector<Graph> graphs;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t seed = 0; graphs.size() < std::size_t(kC10RatioSeeds); ++seed) {
    Graph g = make_gnp(24, 0.15, 20000 + seed);
    if (g.edge_count() == 0 || g.edge_count() > kC10EdgeLimit) continue;
    graphs.push_back(std::move(g));
    seeds.push_back(20000 + seed);
  }
  std::vector<double> rb(graphs.size()), rs(graphs.size());
  std::string sweep = rows_in_order(workers, graphs.size(), "seed,n,delta,alg_size,opt_size,ratio,variant",
                                    [&](std::size_t i) {
                                      const Graph& g = graphs[i];
                                      TapeSpec tape;
                                      tape.seed = seeds[i];
                                      const double opt = double(exact_max_matching_small(g, kC10EdgeLimit).size());
                                      const std::size_t b = run_base_matching(g, tape).matching.size();
                                      const std::size_t sp = run_sparse_matching(g, tape).matching.size();
                                      rb[i] = double(b) / opt;
                                      rs[i] = double(sp) / opt;
                                      const std::string head = std::to_string(seeds[i]) + "," +
                                                               std::to_string(g.node_count()) + "," +
                                                               std::to_string(g.max_degree()) + ",";
                                      return head + std::to_string(b) + "," + fmt(opt) + "," + fmt(rb[i], 6) +
                                             ",base\n" + head + std::to_string(sp) + "," + fmt(opt) + "," +
                                             fmt(rs[i], 6) + ",sparse\n";
                                    });
  double mb = 0, ms = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) mb += rb[i], ms += rs[i];
  mb /= double(graphs.size());
  ms /= double(graphs.size());

  std::size_t inv = 0, nm = 0, cb = 0;
  for (int i = 0; i < kC10Runs; ++i) inv += invalid[i], nm += not_maximal[i], cb += cover_bad[i];
  s.pass = inv == 0 && nm == 0 && cb == 0 && mb >= kC10MinRatio && ms >= kC10MinRatio;
  s.metrics = runs + sweep;
  s.detail = std::to_string(kC10Runs) + " runs: " + std::to_string(inv) + " invalid, " + std::to_string(nm) +
             " non-maximal line-MIS, " + std::to_string(cb) + " cover failures; mean ratio base " + fmt(mb) +
             ", sparse " + fmt(ms) + " over " + std::to_string(graphs.size()) + " graphs";
  return s;
}

// ---------------------------------------------------------------------------

struct Entry {
  int id;
  std::string name;
  double limit;  // seconds, 0 = none
  Suite suite;
  double seconds = 0;
};

std::vector<Entry> run_all(unsigned workers, const fs::path& dir, bool timed) {
  fs::create_directories(dir);
  std::vector<Entry> out;
  auto timed_run = [&](int id, std::string name, double limit, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Suite s;
    try {
      s = fn();
    } catch (const std::exception& e) {
      s.pass = false;
      s.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(dir / ("c" + std::to_string(id) + ".csv"), std::ios::binary) << s.metrics;
    out.push_back({id, std::move(name), timed ? limit : 0, std::move(s), sec});
    return sec;
  };
  timed_run(1, "MIS correctness", kC1Limit, [&] { return c1(workers); });
  {
    const auto t0 = std::chrono::steady_clock::now();
    Suite s2, s3;
    try {
      std::tie(s2, s3) = c2_c3(workers);
    } catch (const std::exception& e) {
      s2.pass = s3.pass = false;
      s2.detail = s3.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(dir / "c2.csv", std::ios::binary) << s2.metrics;
    std::ofstream(dir / "c3.csv", std::ios::binary) << s3.metrics;
    out.push_back({2, "Trace equivalence on H", timed ? kC2Limit : 0, std::move(s2), sec});
    out.push_back({3, "Relevance superset soundness", 0, std::move(s3), sec});
  }
  timed_run(4, "Sparse degree bound", 0, [&] { return c4(workers); });
  timed_run(5, "Estimator concentration", kC5Limit, [&] { return c5(workers); });
  timed_run(6, "Shattering", kC6Limit, [&] { return c6(workers); });
  timed_run(7, "MPC fidelity", 0, [&] { return c7(workers, dir); });
  timed_run(8, "LCA fidelity and consistency", 0, [&] { return c8(workers, dir); });
  timed_run(9, "LCA query dominance", 0, [&] { return c9(workers); });
  timed_run(10, "Matching", kC10Limit, [&] { return c10(workers); });
  return out;
}

std::vector<fs::path> files_of(const std::vector<Entry>& entries, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : entries) {
    files.push_back(fs::relative(dir / ("c" + std::to_string(e.id) + ".csv"), dir));
    for (const auto& f : e.suite.extra) files.push_back(fs::relative(f, dir));
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path(SPARSEMIS_SCRATCH_DIR) / "acceptance";
  fs::remove_all(root);
  bool all = true;

  auto first = run_all(1, root / "run1", true);
  for (const auto& e : first) {
    bool pass = e.suite.pass;
    std::string timing = fmt(e.seconds, 3) + " s";
    if (e.limit > 0) {
      timing += " (limit " + fmt(e.limit) + " s)";
      pass = pass && e.seconds <= e.limit;
    }
    all = all && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << e.id << " " << e.name << ": " << e.suite.detail
              << " [" << timing << "]" << std::endl;
  }

  // criterion 11: identical configs, two workers, byte-identical files
  const auto t0 = std::chrono::steady_clock::now();
  auto second = run_all(2, root / "run2", false);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto names = files_of(first, root / "run1");
  std::size_t same = 0;
  std::string differing;
  for (const auto& rel : names) {
    const bool eq = fs::exists(root / "run2" / rel) && slurp(root / "run1" / rel) == slurp(root / "run2" / rel);
    same += eq;
    if (!eq) differing += " " + rel.string();
  }
  bool verdicts = true;
  for (std::size_t i = 0; i < first.size(); ++i) verdicts = verdicts && first[i].suite.pass == second[i].suite.pass;
  const bool pass11 = same == names.size() && verdicts && files_of(second, root / "run2") == names;
  all = all && pass11;
  std::cout << (pass11 ? "PASS" : "FAIL") << " criterion 11 Determinism: " << same << "/" << names.size()
            << " metrics files byte-identical between a 1-worker and a 2-worker re-run" << differing << " ["
            << fmt(sec, 3) << " s]" << std::endl;
  return all ? 0 : 1;
}
