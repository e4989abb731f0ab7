#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sparsemis/graph.hpp"
#include "sparsemis/lca.hpp"
#include "sparsemis/matching.hpp"
#include "sparsemis/mis.hpp"
#include "sparsemis/mpc.hpp"

namespace sparsemis {

/// A generated graph (seed defaults to the run seed) or an edge-list file.
struct GraphSource {
  GraphSpec spec;
  bool seed_from_run = true;
  std::filesystem::path file;  // non-empty: load instead of generating

  std::string describe() const;
};

enum class OutputFormat { Json, Csv, Both };
std::optional<OutputFormat> parse_output_format(std::string_view name);

struct LcaSettings {
  std::size_t sample = 50;  // nodes queried per run
  ProbeMode mode = ProbeMode::Memoized;
};

struct CrossCheckSettings {
  std::vector<std::string> models;  // subset of centralized, sparsified-on-H, mpc, lca-chained, lca-recursive
  Variant variant = Variant::Sparsified;  // plan used by centralized, sparsified-on-H and mpc
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<GraphSource> graphs;
  std::vector<std::uint64_t> seeds;
  int precision_bits = 64;
  MisParams mis;
  MpcConfig mpc;
  MatchParams matching;
  std::size_t exact_edge_limit = 64;  // exact optimum computed for matchings up to this many edges
  LcaSettings lca;
  std::vector<std::string> variants;
  CrossCheckSettings cross_check;
  std::filesystem::path out_dir;  // empty: keep records in memory only
  OutputFormat format = OutputFormat::Both;
  bool write_solutions = false;  // MIS node lists and matching edge lists next to the metrics
  unsigned workers = 1;          // sweep points evaluated concurrently
};

/// Run list names accepted in `variants`.
const std::vector<std::string>& known_variants();
const std::vector<std::string>& cross_check_models();

/// Parses a JSON document; unknown keys and type errors raise ConfigError
/// naming the offending field path (for example "config.graphs[1].n").
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Cross-field checks, run before anything executes.
void validate_config(const ExperimentConfig& cfg);

using MetricValue = std::variant<std::int64_t, std::uint64_t, double, bool, std::string>;

/// One metrics row; `table` selects the CSV file it lands in.
struct MetricsRecord {
  std::string table;
  std::vector<std::pair<std::string, MetricValue>> fields;

  void set(std::string key, MetricValue value);
  const MetricValue* get(std::string_view key) const;
};

std::string to_json_line(const MetricsRecord& r);

struct ExperimentReport {
  int exit_status = 0;  // 0 = every audit passed
  std::vector<MetricsRecord> records;  // in deterministic sweep order
  std::vector<MetricsRecord> queries;  // per-query LCA rows
  std::vector<std::string> failures;   // one line per failed audit or run error
  std::vector<std::filesystem::path> files;
};

/// Every (graph, seed) point runs each listed variant and, if configured, the
/// cross-check. Writes metrics.jsonl / <table>.csv (and lca_queries.*) under
/// out_dir. Identical configs give byte-identical files for any worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// The cross-check alone: cfg.cross_check.models must name at least two models.
ExperimentReport cross_check(const ExperimentConfig& cfg);

/// Writes the report's records to cfg.out_dir in cfg.format.
std::vector<std::filesystem::path> write_report(const ExperimentConfig& cfg, const ExperimentReport& report);

/// Deterministic sample of `count` nodes out of n, ascending.
std::vector<NodeId> sample_nodes(std::size_t n, std::size_t count, std::uint64_t seed);

/// One node id per line.
void write_node_list(std::ostream& out, const NodeSet& s);
NodeSet read_node_list(std::istream& in, std::size_t universe);

}  // namespace sparsemis
