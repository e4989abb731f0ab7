#include "sparsemis/experiments.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "sparsemis/parallel.hpp"

namespace sparsemis {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void read(const json& v, const std::string& p, std::uint64_t& out) {
  if (!v.is_number_unsigned()) fail(p, "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}
void read(const json& v, const std::string& p, std::uint32_t& out) {
  std::uint64_t x = 0;
  read(v, p, x);
  if (x > UINT32_MAX) fail(p, "value too large");
  out = static_cast<std::uint32_t>(x);
}
void read(const json& v, const std::string& p, int& out) {
  if (!v.is_number_integer()) fail(p, "expected an integer");
  out = v.get<int>();
}
void read(const json& v, const std::string& p, double& out) {
  if (!v.is_number()) fail(p, "expected a number");
  out = v.get<double>();
}
void read(const json& v, const std::string& p, bool& out) {
  if (!v.is_boolean()) fail(p, "expected true or false");
  out = v.get<bool>();
}
void read(const json& v, const std::string& p, std::string& out) {
  if (!v.is_string()) fail(p, "expected a string");
  out = v.get<std::string>();
}

// An object whose keys are consumed one by one; leftovers are reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  template <class T>
  bool get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return false;
    read(*v, at(key), out);
    return true;
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

GraphSource parse_graph(const json& j, const std::string& path) {
  Section s(j, path);
  GraphSource g;
  std::string file;
  if (s.get("file", file)) {
    g.file = file;
    g.seed_from_run = false;
  } else {
    std::string model;
    if (!s.get("model", model)) fail(path, "either \"file\" or \"model\" is required");
    auto m = parse_graph_model(model);
    if (!m) fail(s.at("model"), "unknown model \"" + model + "\"");
    g.spec.model = *m;
    s.get("n", g.spec.n);
    s.get("p", g.spec.p);
    s.get("d", g.spec.d);
    if (s.get("seed", g.spec.seed)) g.seed_from_run = false;
  }
  s.finish();
  return g;
}

std::vector<std::string> parse_names(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string x;
    read(j[i], path + "[" + std::to_string(i) + "]", x);
    out.push_back(x);
  }
  return out;
}

template <class T>
bool contains(const std::vector<T>& xs, const T& x) {
  return std::find(xs.begin(), xs.end(), x) != xs.end();
}

std::string number_text(double x) { return json(x).dump(); }

}  // namespace

std::string GraphSource::describe() const {
  if (!file.empty()) return file.filename().string();
  std::string out(to_string(spec.model));
  out += "(n=" + std::to_string(spec.n);
  if (spec.model == GraphModel::Gnp) out += ",p=" + number_text(spec.p);
  if (spec.model == GraphModel::DRegular) out += ",d=" + std::to_string(spec.d);
  if (spec.model == GraphModel::Gnp || spec.model == GraphModel::DRegular)
    out += seed_from_run ? ",seed=run" : ",seed=" + std::to_string(spec.seed);
  return out + ")";
}

std::optional<OutputFormat> parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "both") return OutputFormat::Both;
  return std::nullopt;
}

const std::vector<std::string>& known_variants() {
  static const std::vector<std::string> names{"base",         "sparsified",     "recursive",      "mpc",
                                              "mpc-recursive", "lca-chained",   "lca-recursive",  "parnas-ron",
                                              "matching-base", "matching-sparse", "matching-line-mis"};
  return names;
}

const std::vector<std::string>& cross_check_models() {
  static const std::vector<std::string> names{"centralized", "sparsified-on-H", "mpc", "lca-chained",
                                              "lca-recursive"};
  return names;
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  Section top(j, "config");
  top.get("name", cfg.name);

  if (const json* g = top.find("graph")) cfg.graphs.push_back(parse_graph(*g, "config.graph"));
  if (const json* gs = top.find("graphs")) {
    if (!gs->is_array()) fail("config.graphs", "expected an array");
    for (std::size_t i = 0; i < gs->size(); ++i)
      cfg.graphs.push_back(parse_graph((*gs)[i], "config.graphs[" + std::to_string(i) + "]"));
  }

  if (const json* s = top.find("seeds")) {
    if (!s->is_array()) fail("config.seeds", "expected an array");
    for (std::size_t i = 0; i < s->size(); ++i) {
      std::uint64_t x = 0;
      read((*s)[i], "config.seeds[" + std::to_string(i) + "]", x);
      cfg.seeds.push_back(x);
    }
  }
  if (const json* r = top.find("seed_range")) {
    Section s(*r, "config.seed_range");
    std::uint64_t first = 0, count = 0;
    s.get("first", first);
    if (!s.get("count", count)) fail("config.seed_range.count", "required");
    s.finish();
    for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(first + i);
  }

  if (const json* t = top.find("tape")) {
    Section s(*t, "config.tape");
    s.get("precision_bits", cfg.precision_bits);
    s.finish();
  }
  if (const json* m = top.find("mis")) {
    Section s(*m, "config.mis");
    s.get("alpha", cfg.mis.alpha);
    s.get("c_iterations", cfg.mis.c_iterations);
    s.get("C_sampling", cfg.mis.C_sampling);
    s.get("phase_length_R", cfg.mis.phase_length_R);
    s.get("recursion_base", cfg.mis.recursion_base);
    s.get("iterations", cfg.mis.iterations);
    s.get("repetitions", cfg.mis.repetitions);
    s.get("degree_steps", cfg.mis.degree_steps);
    s.finish();
  }
  if (const json* m = top.find("mpc")) {
    Section s(*m, "config.mpc");
    s.get("alpha", cfg.mpc.alpha);
    s.get("capacity", cfg.mpc.capacity);
    s.get("machines", cfg.mpc.machines);
    s.get("assign_seed", cfg.mpc.assign_seed);
    std::uint32_t w = cfg.mpc.workers;
    s.get("workers", w);
    cfg.mpc.workers = w;
    s.finish();
  }
  if (const json* m = top.find("matching")) {
    Section s(*m, "config.matching");
    s.get("kappa", cfg.matching.kappa);
    s.get("amplification", cfg.matching.amplification);
    s.get("phase_length", cfg.matching.phase_length);
    s.get("final_greedy", cfg.matching.final_greedy);
    s.get("exact_edge_limit", cfg.exact_edge_limit);
    s.finish();
  }
  if (const json* m = top.find("lca")) {
    Section s(*m, "config.lca");
    s.get("sample", cfg.lca.sample);
    std::string mode;
    if (s.get("probe_mode", mode)) {
      if (mode == "faithful") cfg.lca.mode = ProbeMode::Faithful;
      else if (mode == "memoized") cfg.lca.mode = ProbeMode::Memoized;
      else fail(s.at("probe_mode"), "expected \"faithful\" or \"memoized\"");
    }
    s.finish();
  }
  if (const json* v = top.find("variants")) cfg.variants = parse_names(*v, "config.variants");
  if (const json* c = top.find("cross_check")) {
    Section s(*c, "config.cross_check");
    if (const json* m = s.find("models")) cfg.cross_check.models = parse_names(*m, "config.cross_check.models");
    std::string variant;
    if (s.get("variant", variant)) {
      auto v = parse_variant(variant);
      if (!v || *v == Variant::Base) fail(s.at("variant"), "expected \"sparsified\" or \"recursive\"");
      cfg.cross_check.variant = *v;
    }
    s.finish();
  }
  if (const json* o = top.find("output")) {
    Section s(*o, "config.output");
    std::string dir, format;
    if (s.get("dir", dir)) cfg.out_dir = dir;
    if (s.get("format", format)) {
      auto f = parse_output_format(format);
      if (!f) fail(s.at("format"), "expected \"json\", \"csv\" or \"both\"");
      cfg.format = *f;
    }
    s.get("solutions", cfg.write_solutions);
    s.finish();
  }
  std::uint32_t workers = cfg.workers;
  top.get("workers", workers);
  cfg.workers = workers;
  top.finish();
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.graphs.empty()) fail("config.graphs", "at least one graph is required");
  if (cfg.seeds.empty()) fail("config.seeds", "seed list must not be empty");
  for (std::size_t i = 0; i < cfg.graphs.size(); ++i) {
    const auto& g = cfg.graphs[i];
    const std::string p = "config.graphs[" + std::to_string(i) + "]";
    if (!g.file.empty()) {
      if (!std::filesystem::exists(g.file)) fail(p + ".file", "no such file " + g.file.string());
      continue;
    }
    if (g.spec.model == GraphModel::Gnp && !(g.spec.p >= 0.0 && g.spec.p <= 1.0))
      fail(p + ".p", "edge probability must lie in [0,1]");
    if (g.spec.model == GraphModel::DRegular && (g.spec.n * g.spec.d) % 2 != 0)
      fail(p + ".d", "n*d must be even");
  }
  if (cfg.precision_bits < 1 || cfg.precision_bits > 64) fail("config.tape.precision_bits", "must lie in [1,64]");
  try {
    cfg.mis.validate();
  } catch (const ConfigError& e) {
    fail("config.mis", e.what());
  }
  try {
    cfg.matching.validate();
  } catch (const ConfigError& e) {
    fail("config.matching", e.what());
  }
  if (!(cfg.mpc.alpha > 0.0 && cfg.mpc.alpha <= 1.0)) fail("config.mpc.alpha", "must lie in (0,1]");
  if (cfg.workers < 1) fail("config.workers", "must be at least 1");
  for (std::size_t i = 0; i < cfg.variants.size(); ++i)
    if (!contains(known_variants(), cfg.variants[i]))
      fail("config.variants[" + std::to_string(i) + "]", "unknown variant \"" + cfg.variants[i] + "\"");
  const auto& models = cfg.cross_check.models;
  if (!models.empty()) {
    if (models.size() < 2) fail("config.cross_check.models", "at least two models are required");
    for (std::size_t i = 0; i < models.size(); ++i) {
      const std::string p = "config.cross_check.models[" + std::to_string(i) + "]";
      if (!contains(cross_check_models(), models[i])) fail(p, "unknown model \"" + models[i] + "\"");
      if (std::count(models.begin(), models.end(), models[i]) > 1) fail(p, "listed twice");
      if (models[i] == "lca-chained" && cfg.cross_check.variant != Variant::Sparsified)
        fail(p, "lca-chained runs the sparsified plan; set cross_check.variant to \"sparsified\"");
      if (models[i] == "lca-recursive" && cfg.cross_check.variant != Variant::Recursive)
        fail(p, "lca-recursive runs the recursive plan; set cross_check.variant to \"recursive\"");
    }
  }
  if (cfg.variants.empty() && models.empty()) fail("config.variants", "nothing to run");
}

void MetricsRecord::set(std::string key, MetricValue value) {
  for (auto& [k, v] : fields)
    if (k == key) {
      v = std::move(value);
      return;
    }
  fields.emplace_back(std::move(key), std::move(value));
}

const MetricValue* MetricsRecord::get(std::string_view key) const {
  for (auto& [k, v] : fields)
    if (k == key) return &v;
  return nullptr;
}

namespace {

ordered_json to_json(const MetricValue& v) {
  return std::visit([](const auto& x) { return ordered_json(x); }, v);
}

std::string csv_cell(const MetricValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) {
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string out = "\"";
    for (char c : *s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }
  return to_json(v).dump();
}

}  // namespace

std::string to_json_line(const MetricsRecord& r) {
  ordered_json j;
  j["table"] = r.table;
  for (const auto& [k, v] : r.fields) j[k] = to_json(v);
  return j.dump();
}

std::vector<NodeId> sample_nodes(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::vector<NodeId> all(n);
  for (NodeId v = 0; v < n; ++v) all[v] = v;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(n, count));
  std::sort(all.begin(), all.end());
  return all;
}

void write_node_list(std::ostream& out, const NodeSet& s) {
  for (NodeId v : s.members()) out << v << '\n';
}

NodeSet read_node_list(std::istream& in, std::size_t universe) {
  NodeSet s(universe);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long v = -1;
    std::string rest;
    if (!(ls >> v) || (ls >> rest) || v < 0 || static_cast<std::size_t>(v) >= universe)
      throw ParseError("expected a node id below " + std::to_string(universe), lineno);
    s.insert(static_cast<NodeId>(v));
  }
  return s;
}

namespace {

struct Point {
  std::size_t graph_index = 0;
  std::uint64_t seed = 0;
  Graph g;
};

struct PointResult {
  std::vector<MetricsRecord> records;
  std::vector<MetricsRecord> queries;
  std::vector<std::string> failures;
};

constexpr std::uint64_t kSampleSalt = 0x9e3779b97f4a7c15ull;

class PointRunner {
 public:
  PointRunner(const ExperimentConfig& cfg, const Point& pt) : cfg_(cfg), pt_(pt), g_(pt.g) {}

  PointResult run() {
    for (const std::string& v : cfg_.variants) guarded(v, [&] { run_variant(v); });
    if (!cfg_.cross_check.models.empty()) guarded("cross-check", [&] { run_cross_check(); });
    return std::move(out_);
  }

 private:
  template <class Fn>
  void guarded(const std::string& what, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      MetricsRecord r = record("failures", what);
      r.set("error", std::string(e.what()));
      out_.records.push_back(r);
      fail_msg(what, e.what());
    }
  }

  void fail_msg(const std::string& what, const std::string& msg) {
    out_.failures.push_back("graph " + std::to_string(pt_.graph_index) + " seed " + std::to_string(pt_.seed) + " " +
                            what + ": " + msg);
  }

  MetricsRecord record(std::string table, const std::string& variant) const {
    MetricsRecord r;
    r.table = std::move(table);
    r.set("graph", std::uint64_t{pt_.graph_index});
    r.set("graph_name", cfg_.graphs[pt_.graph_index].describe());
    r.set("n", std::uint64_t{g_.node_count()});
    r.set("m", std::uint64_t{g_.edge_count()});
    r.set("delta", std::uint64_t{g_.max_degree()});
    r.set("seed", pt_.seed);
    r.set("variant", variant);
    return r;
  }

  void check(bool ok, const std::string& what, const std::string& msg) {
    if (!ok) fail_msg(what, msg);
  }

  TapeSpec tape_for(const RunPlan& plan) const { return make_tape_spec(pt_.seed, plan, g_, cfg_.precision_bits); }

  // Post-shattered run of the centralized engine, cached per variant.
  const ExecutionTrace& centralized(Variant v) {
    auto it = central_.find(v);
    if (it != central_.end()) return it->second;
    const RunPlan plan = make_plan(g_, cfg_.mis, v);
    RunOptions opt;
    opt.record_rows = false;
    return central_.emplace(v, post_shatter(g_, run_plan(g_, tape_for(plan), plan, opt))).first->second;
  }

  void save_solution(const std::string& variant, const NodeSet* mis, const EdgeSet* matching) {
    if (!cfg_.write_solutions || cfg_.out_dir.empty()) return;
    const auto dir = cfg_.out_dir / "solutions";
    const std::string stem = "g" + std::to_string(pt_.graph_index) + "_s" + std::to_string(pt_.seed) + "_" + variant;
    if (mis) {
      std::ofstream f(dir / (stem + ".mis"));
      write_node_list(f, *mis);
    }
    if (matching) {
      std::ofstream f(dir / (stem + ".edges"));
      write_edge_set(f, g_.node_count(), *matching);
    }
  }

  void run_variant(const std::string& name) {
    if (name == "base" || name == "sparsified" || name == "recursive") return run_mis(*parse_variant(name), name);
    if (name == "mpc") return run_mpc_variant(Variant::Sparsified, name);
    if (name == "mpc-recursive") return run_mpc_variant(Variant::Recursive, name);
    if (name == "lca-chained") return run_lca(LcaVariant::Chained, name);
    if (name == "lca-recursive") return run_lca(LcaVariant::Recursive, name);
    if (name == "parnas-ron") return run_parnas_ron(name);
    return run_matching(name);
  }

  void run_mis(Variant v, const std::string& name) {
    const RunPlan plan = make_plan(g_, cfg_.mis, v);
    const TapeSpec tape = tape_for(plan);
    RunOptions opt;
    opt.record_rows = false;
    const ExecutionTrace tr = post_shatter(g_, run_plan(g_, tape, plan, opt));
    std::size_t deferred = 0;
    for (const auto& s : tr.final_states) deferred += s.status == Status::Deferred;
    const auto verdict = verify_mis(g_, tr.mis);
    MetricsRecord r = record("mis", name);
    r.set("T", std::uint64_t{plan.total_iterations});
    r.set("k", std::uint64_t{plan.repetitions});
    r.set("R", std::uint64_t{v == Variant::Base ? 0 : plan.phase_length});
    r.set("executed", std::uint64_t{tr.executed});
    r.set("survivors", std::uint64_t{tr.survivors.count()});
    r.set("deferred", std::uint64_t{deferred});
    r.set("post_shatter_joined", std::uint64_t{tr.post_shatter_joined.count()});
    r.set("mis_size", std::uint64_t{tr.mis.count()});
    r.set("valid", is_valid(verdict));
    out_.records.push_back(std::move(r));
    check(is_valid(verdict), name, "verify_mis: " + describe(verdict));
    save_solution(name, &tr.mis, nullptr);
  }

  void run_mpc_variant(Variant v, const std::string& name) {
    const RunPlan plan = make_plan(g_, cfg_.mis, v);
    const MpcResult& res = mpc(v);
    const auto verdict = verify_mis(g_, res.mis);
    const bool agrees = res.mis == centralized(v).mis;
    const MpcMetrics& m = res.metrics;
    std::string steps;
    for (std::size_t i = 0; i < m.rounds_by_step.size(); ++i)
      steps += (i ? ";" : "") + std::to_string(m.rounds_by_step[i]);
    MetricsRecord r = record("mpc", name);
    r.set("alpha", m.alpha);
    r.set("capacity", std::uint64_t{m.capacity});
    r.set("machines", std::uint64_t{m.machines});
    r.set("rounds_total", m.rounds_total);
    r.set("rounds_by_step", steps);
    r.set("post_shatter_rounds", m.post_shatter_rounds);
    r.set("peak_memory_words", std::uint64_t{m.peak_memory_words});
    r.set("survivors", std::uint64_t{m.survivors});
    r.set("deferred", std::uint64_t{m.deferred});
    r.set("mis_size", std::uint64_t{m.mis_size});
    r.set("valid", is_valid(verdict));
    r.set("agrees_centralized", agrees);
    out_.records.push_back(std::move(r));
    check(is_valid(verdict), name, "verify_mis: " + describe(verdict));
    check(agrees, name, "MIS differs from the centralized engine");
    check(m.peak_memory_words <= m.capacity, name, "peak memory exceeds S");
    save_solution(name, &res.mis, nullptr);
  }

  std::vector<NodeId> sampled() const { return sample_nodes(g_.node_count(), cfg_.lca.sample, pt_.seed ^ kSampleSalt); }

  const MpcResult& mpc(Variant v) {
    auto it = mpc_.find(v);
    if (it != mpc_.end()) return it->second;
    const RunPlan plan = make_plan(g_, cfg_.mis, v);
    return mpc_.emplace(v, run_mpc(g_, tape_for(plan), cfg_.mis, cfg_.mpc, v)).first->second;
  }

  const std::vector<LcaAnswer>& lca_answers(LcaVariant v) {
    auto it = lca_.find(v);
    if (it != lca_.end()) return it->second;
    const Variant pv = v == LcaVariant::Chained ? Variant::Sparsified : Variant::Recursive;
    const TapeSpec tape = tape_for(make_plan(g_, cfg_.mis, pv));
    LcaOracle oracle(g_, tape, cfg_.mis, v);
    std::vector<LcaAnswer> answers;
    for (NodeId x : sampled()) {
      QueryLedger ledger;
      GraphAccess access(g_, ledger, cfg_.lca.mode);
      answers.push_back(oracle.answer(x, access));
    }
    return lca_.emplace(v, std::move(answers)).first->second;
  }

  void emit_queries(const std::string& name, const std::vector<LcaAnswer>& answers) {
    for (const LcaAnswer& a : answers) {
      MetricsRecord q = record("lca_queries", name);
      q.set("node", std::uint64_t{a.node});
      q.set("probes_total", a.probes_used);
      std::string levels;
      for (std::size_t i = 0; i < a.probes_by_level.size(); ++i)
        levels += (i ? ";" : "") + std::to_string(a.probes_by_level[i]);
      q.set("probes_by_level", levels);
      q.set("path", std::string(to_string(a.path)));
      q.set("in_mis", a.in_mis);
      out_.queries.push_back(std::move(q));
    }
  }

  void summarize_lca(const std::string& name, const std::vector<LcaAnswer>& answers, const NodeSet& reference,
                     bool audit) {
    std::uint64_t sum = 0, mx = 0;
    std::size_t agree = 0, post = 0;
    for (const LcaAnswer& a : answers) {
      sum = saturating_add(sum, a.probes_used);
      mx = std::max(mx, a.probes_used);
      agree += a.in_mis == reference.contains(a.node);
      post += a.path == AnswerPath::PostShatter;
    }
    MetricsRecord r = record("lca", name);
    r.set("probe_mode", std::string(to_string(cfg_.lca.mode)));
    r.set("sampled", std::uint64_t{answers.size()});
    r.set("probes_sum", sum);
    r.set("probes_max", mx);
    r.set("probes_mean", answers.empty() ? 0.0 : double(sum) / double(answers.size()));
    r.set("post_shatter_answers", std::uint64_t{post});
    r.set("agree", std::uint64_t{agree});
    bool consistent = true;
    if (audit) consistent = std::holds_alternative<Consistent>(consistency_audit(answers, g_));
    r.set("consistent", consistent);
    out_.records.push_back(std::move(r));
    check(agree == answers.size(), name, std::to_string(answers.size() - agree) + " answers differ from the engine");
    check(consistent, name, "consistency audit failed");
    emit_queries(name, answers);
  }

  void run_lca(LcaVariant v, const std::string& name) {
    const auto& answers = lca_answers(v);
    const Variant pv = v == LcaVariant::Chained ? Variant::Sparsified : Variant::Recursive;
    summarize_lca(name, answers, centralized(pv).mis, true);
  }

  void run_parnas_ron(const std::string& name) {
    const RunPlan plan = make_plan(g_, cfg_.mis, Variant::Base);
    const TapeSpec tape = tape_for(plan);
    RunOptions opt;
    opt.record_rows = false;
    const ExecutionTrace ref = run_base_mis(g_, tape, plan.total_iterations, opt);
    std::vector<LcaAnswer> answers;
    for (NodeId x : sampled()) {
      QueryLedger ledger;
      GraphAccess access(g_, ledger, cfg_.lca.mode);
      answers.push_back(parnas_ron_baseline(x, access, tape, plan.total_iterations));
    }
    // the baseline answers membership after T iterations, so survivors are not covered by the audit
    summarize_lca(name, answers, ref.mis, false);
  }

  void run_matching(const std::string& name) {
    TapeSpec tape;
    tape.seed = pt_.seed;
    tape.precision_bits = cfg_.precision_bits;
    EdgeSet m;
    MetricsRecord r = record("matching", name);
    const bool line = name == "matching-line-mis";
    if (line) {
      m = maximal_matching_via_line_mis(g_, tape, cfg_.mis);
    } else {
      const MatchingResult res =
          name == "matching-base" ? run_base_matching(g_, tape, cfg_.matching) : run_sparse_matching(g_, tape, cfg_.matching);
      m = res.matching;
      std::size_t hmax = 0;
      for (const auto& ph : res.phases)
        for (auto d : ph.h_degree) hmax = std::max<std::size_t>(hmax, d);
      r.set("iterations", std::uint64_t{res.schedule.iterations});
      r.set("K", std::uint64_t{res.schedule.K});
      r.set("max_h_degree", std::uint64_t{hmax});
    }
    const auto verdict = verify_matching(g_, m, line);
    const bool maximal = is_valid(verify_matching(g_, m, true));
    r.set("alg_size", std::uint64_t{m.size()});
    r.set("valid", is_valid(verdict));
    r.set("maximal", maximal);
    if (g_.edge_count() <= cfg_.exact_edge_limit) {
      const std::size_t opt = exact_max_matching_small(g_, cfg_.exact_edge_limit).size();
      r.set("opt_size", std::uint64_t{opt});
      r.set("ratio", opt ? double(m.size()) / double(opt) : 1.0);
    } else {
      r.set("opt_size", std::string(""));
      r.set("ratio", std::string(""));
    }
    if (line && is_valid(verdict)) {
      const NodeSet cover = vertex_cover_2approx(g_, m);
      bool covers = true;
      for (auto [u, v] : g_.edges()) covers = covers && (cover.contains(u) || cover.contains(v));
      r.set("cover_size", std::uint64_t{cover.count()});
      r.set("cover_ok", covers);
      check(covers, name, "vertex cover misses an edge");
    }
    out_.records.push_back(std::move(r));
    check(is_valid(verdict), name, "verify_matching: " + describe(verdict));
    save_solution(name, nullptr, &m);
  }

  // membership per node: 1 in, 0 out, -1 not answered by the model
  std::vector<std::int8_t> model_answers(const std::string& model) {
    const Variant v = cfg_.cross_check.variant;
    std::vector<std::int8_t> ans(g_.node_count(), -1);
    auto from_set = [&](const NodeSet& s) {
      for (NodeId x = 0; x < g_.node_count(); ++x) ans[x] = s.contains(x);
    };
    if (model == "centralized") {
      from_set(centralized(v).mis);
    } else if (model == "sparsified-on-H") {
      const RunPlan plan = make_plan(g_, cfg_.mis, v);
      from_set(post_shatter(g_, run_via_sparse(g_, tape_for(plan), plan)).mis);
    } else if (model == "mpc") {
      const MpcResult& res = mpc(v);
      check(res.metrics.peak_memory_words <= res.metrics.capacity, "cross-check mpc", "peak memory exceeds S");
      from_set(res.mis);
    } else {
      for (const LcaAnswer& a : lca_answers(model == "lca-chained" ? LcaVariant::Chained : LcaVariant::Recursive))
        ans[a.node] = a.in_mis;
    }
    return ans;
  }

  void run_cross_check() {
    const auto& models = cfg_.cross_check.models;
    const ExecutionTrace& ref_trace = centralized(cfg_.cross_check.variant);
    const auto reference = model_answers(models.front());
    for (std::size_t i = 1; i < models.size(); ++i) {
      const auto other = model_answers(models[i]);
      std::size_t compared = 0, agree = 0, excluded = 0, disagree = 0;
      for (NodeId x = 0; x < g_.node_count(); ++x) {
        if (reference[x] < 0 || other[x] < 0) continue;
        ++compared;
        if (reference[x] == other[x]) ++agree;
        else if (ref_trace.final_states[x].status == Status::Deferred) ++excluded;
        else ++disagree;
      }
      MetricsRecord r = record("cross_check", models.front() + " vs " + models[i]);
      r.set("plan", std::string(to_string(cfg_.cross_check.variant)));
      r.set("compared", std::uint64_t{compared});
      r.set("agree", std::uint64_t{agree});
      r.set("disagree", std::uint64_t{disagree});
      r.set("excluded_deferred", std::uint64_t{excluded});
      r.set("agreement", compared ? double(agree) / double(compared) : 1.0);
      out_.records.push_back(std::move(r));
      check(disagree == 0, "cross-check " + models[i], std::to_string(disagree) + " nodes disagree with " + models.front());
    }
  }

  const ExperimentConfig& cfg_;
  const Point& pt_;
  const Graph& g_;
  PointResult out_;
  std::map<Variant, ExecutionTrace> central_;
  std::map<Variant, MpcResult> mpc_;
  std::map<LcaVariant, std::vector<LcaAnswer>> lca_;
};

Graph materialize(const GraphSource& src, std::uint64_t seed) {
  if (!src.file.empty()) return load_graph(src.file);
  GraphSpec spec = src.spec;
  if (src.seed_from_run) spec.seed = seed;
  return generate_graph(spec);
}

// Tapes are wide enough for every plan the point will run; checked up front.
void prevalidate(const ExperimentConfig& cfg, const Point& pt) {
  const std::string where =
      "config.graphs[" + std::to_string(pt.graph_index) + "] with seed " + std::to_string(pt.seed);
  std::vector<Variant> needed;
  for (const auto& v : cfg.variants) {
    if (v == "base" || v == "parnas-ron") needed.push_back(Variant::Base);
    if (v == "sparsified" || v == "mpc" || v == "lca-chained") needed.push_back(Variant::Sparsified);
    if (v == "recursive" || v == "mpc-recursive" || v == "lca-recursive") needed.push_back(Variant::Recursive);
  }
  if (!cfg.cross_check.models.empty()) needed.push_back(cfg.cross_check.variant);
  for (Variant v : needed) {
    try {
      make_tape_spec(pt.seed, make_plan(pt.g, cfg.mis, v), pt.g, cfg.precision_bits);
    } catch (const ConfigError& e) {
      throw ConfigError(where + " (" + std::string(to_string(v)) + "): " + e.what());
    }
  }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::vector<Point> points;
  for (std::size_t gi = 0; gi < cfg.graphs.size(); ++gi)
    for (std::uint64_t seed : cfg.seeds) points.push_back({gi, seed, {}});
  detail::parallel_for(cfg.workers, points.size(),
                       [&](std::size_t i) { points[i].g = materialize(cfg.graphs[points[i].graph_index], points[i].seed); });
  for (const Point& p : points) prevalidate(cfg, p);
  if (cfg.write_solutions && !cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir / "solutions");

  std::vector<PointResult> results(points.size());
  detail::parallel_for(cfg.workers, points.size(),
                       [&](std::size_t i) { results[i] = PointRunner(cfg, points[i]).run(); });

  ExperimentReport report;
  for (auto& r : results) {
    for (auto& x : r.records) report.records.push_back(std::move(x));
    for (auto& x : r.queries) report.queries.push_back(std::move(x));
    for (auto& x : r.failures) report.failures.push_back(std::move(x));
  }
  report.exit_status = report.failures.empty() ? 0 : 1;
  if (!cfg.out_dir.empty()) report.files = write_report(cfg, report);
  return report;
}

ExperimentReport cross_check(const ExperimentConfig& cfg) {
  if (cfg.cross_check.models.size() < 2) fail("config.cross_check.models", "at least two models are required");
  ExperimentConfig only = cfg;
  only.variants.clear();
  return run_experiment(only);
}

namespace {

void write_csv(const std::filesystem::path& path, const std::vector<const MetricsRecord*>& rows) {
  std::vector<std::string> columns;
  for (const auto* r : rows)
    for (const auto& [k, v] : r->fields)
      if (!contains(columns, k)) columns.push_back(k);
  std::ofstream out(path, std::ios::binary);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto* r : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ',';
      if (const MetricValue* v = r->get(columns[i])) out << csv_cell(*v);
    }
    out << '\n';
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<MetricsRecord>& rows) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& r : rows) out << to_json_line(r) << '\n';
}

}  // namespace

std::vector<std::filesystem::path> write_report(const ExperimentConfig& cfg, const ExperimentReport& report) {
  std::vector<std::filesystem::path> files;
  std::filesystem::create_directories(cfg.out_dir);
  const bool json_out = cfg.format != OutputFormat::Csv, csv_out = cfg.format != OutputFormat::Json;
  if (json_out) {
    files.push_back(cfg.out_dir / "metrics.jsonl");
    write_jsonl(files.back(), report.records);
    if (!report.queries.empty()) {
      files.push_back(cfg.out_dir / "lca_queries.jsonl");
      write_jsonl(files.back(), report.queries);
    }
  }
  if (csv_out) {
    std::map<std::string, std::vector<const MetricsRecord*>> tables;
    for (const auto& r : report.records) tables[r.table].push_back(&r);
    for (const auto& r : report.queries) tables[r.table].push_back(&r);
    for (const auto& [name, rows] : tables) {
      files.push_back(cfg.out_dir / (name + ".csv"));
      write_csv(files.back(), rows);
    }
  }
  return files;
}

}  // namespace sparsemis
