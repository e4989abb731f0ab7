#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "sparsemis/experiments.hpp"

using namespace sparsemis;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::vector<std::string> variants;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_variants) {
  cmd->add_option("--config", f.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "run this single seed instead of the config's seed list");
  cmd->add_option("--out", f.out, "output directory (overrides output.dir)");
  cmd->add_option("--format", f.format, "metrics format")->check(CLI::IsMember({"json", "csv", "both"}));
  if (with_variants) cmd->add_option("--variant", f.variants, "variants to run (default: those of the config)");
}

ExperimentConfig configure(const RunFlags& f) {
  ExperimentConfig cfg = load_config(f.config);
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.format.empty()) cfg.format = *parse_output_format(f.format);
  return cfg;
}

// Keeps the config's variants of one family, or the given default when none is listed.
ExperimentConfig restrict_variants(ExperimentConfig cfg, const RunFlags& f, const std::vector<std::string>& family,
                                   const std::string& fallback) {
  std::vector<std::string> chosen;
  const auto& source = f.variants.empty() ? cfg.variants : f.variants;
  for (const auto& v : source) {
    if (std::find(family.begin(), family.end(), v) == family.end()) {
      if (!f.variants.empty()) throw ConfigError("--variant: \"" + v + "\" is not available here");
      continue;
    }
    chosen.push_back(v);
  }
  if (chosen.empty()) chosen.push_back(fallback);
  cfg.variants = chosen;
  cfg.cross_check.models.clear();
  return cfg;
}

int report(const ExperimentReport& rep) {
  std::size_t rows = rep.records.size();
  std::cout << rows << " metrics rows, " << rep.queries.size() << " query rows\n";
  for (const auto& f : rep.files) std::cout << "wrote " << f.string() << "\n";
  if (rep.files.empty())
    for (const auto& r : rep.records) std::cout << to_json_line(r) << "\n";
  for (const auto& f : rep.failures) std::cerr << "FAIL " << f << "\n";
  return rep.exit_status;
}

int verify(const std::string& graph_path, const std::string& mis_path, const std::string& matching_path,
           bool maximal) {
  const Graph g = load_graph(graph_path);
  if (!mis_path.empty()) {
    std::ifstream in(mis_path);
    if (!in) throw Error("cannot open " + mis_path);
    const auto verdict = verify_mis(g, read_node_list(in, g.node_count()));
    std::cout << "mis: " << describe(verdict) << "\n";
    if (!is_valid(verdict)) return 1;
  }
  if (!matching_path.empty()) {
    std::ifstream in(matching_path);
    if (!in) throw Error("cannot open " + matching_path);
    const Graph m = read_edge_list(in);
    const auto verdict = verify_matching(g, EdgeSet(m.edges()), maximal);
    std::cout << "matching: " << describe(verdict) << "\n";
    if (!is_valid(verdict)) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparsified MIS and matching: engines, MPC and LCA simulators, experiment driver"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate-graph", "write a generated graph as an edge list");
  std::string model = "gnp", gen_out;
  std::size_t n = 0, d = 0;
  double p = 0.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--model", model, "gnp, d_regular, star, path or complete");
  gen->add_option("--n", n, "node count")->required();
  gen->add_option("--p", p, "edge probability (gnp)");
  gen->add_option("--d", d, "degree (d_regular)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output file (default: stdout)");

  RunFlags mis_f, match_f, mpc_f, lca_f, cross_f;
  auto* run_mis = app.add_subcommand("run-mis", "centralized MIS engines (base, sparsified, recursive)");
  add_run_flags(run_mis, mis_f, true);
  auto* run_matching = app.add_subcommand("run-matching", "matching algorithms");
  add_run_flags(run_matching, match_f, true);
  auto* run_mpc = app.add_subcommand("run-mpc", "MPC simulation");
  add_run_flags(run_mpc, mpc_f, true);
  auto* run_lca = app.add_subcommand("run-lca", "LCA oracles and the Parnas-Ron baseline");
  add_run_flags(run_lca, lca_f, true);
  auto* cross = app.add_subcommand("cross-check", "per-node agreement between execution models");
  add_run_flags(cross, cross_f, false);
  std::vector<std::string> models;
  cross->add_option("--models", models, "models to compare (default: cross_check.models of the config)");

  auto* ver = app.add_subcommand("verify", "check an MIS or a matching against a graph");
  std::string graph_path, mis_path, matching_path;
  bool maximal = false;
  ver->add_option("--graph", graph_path, "edge-list file")->required()->check(CLI::ExistingFile);
  ver->add_option("--mis", mis_path, "node list, one id per line")->check(CLI::ExistingFile);
  ver->add_option("--matching", matching_path, "matching as an edge list")->check(CLI::ExistingFile);
  ver->add_flag("--maximal", maximal, "require the matching to be maximal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto m = parse_graph_model(model);
      if (!m) throw ConfigError("--model: unknown model \"" + model + "\"");
      const Graph g = generate_graph({*m, n, p, d, gen_seed});
      if (gen_out.empty()) write_edge_list(std::cout, g);
      else save_graph(gen_out, g);
      return 0;
    }
    if (run_mis->parsed())
      return report(run_experiment(
          restrict_variants(configure(mis_f), mis_f, {"base", "sparsified", "recursive"}, "sparsified")));
    if (run_matching->parsed())
      return report(run_experiment(restrict_variants(
          configure(match_f), match_f, {"matching-base", "matching-sparse", "matching-line-mis"}, "matching-sparse")));
    if (run_mpc->parsed())
      return report(run_experiment(restrict_variants(configure(mpc_f), mpc_f, {"mpc", "mpc-recursive"}, "mpc")));
    if (run_lca->parsed())
      return report(run_experiment(restrict_variants(configure(lca_f), lca_f,
                                                     {"lca-chained", "lca-recursive", "parnas-ron"}, "lca-chained")));
    if (cross->parsed()) {
      ExperimentConfig cfg = configure(cross_f);
      if (!models.empty()) cfg.cross_check.models = models;
      validate_config(cfg);
      return report(cross_check(cfg));
    }
    if (ver->parsed()) {
      if (mis_path.empty() && matching_path.empty()) throw ConfigError("verify needs --mis or --matching");
      return verify(graph_path, mis_path, matching_path, maximal);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
