#pragma once

#include "bois/benchmarks.hpp"
#include "bois/bo.hpp"
#include "bois/serialize.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Command layer behind the CLI binary: experiment campaigns, the
// engine-parity experiment, and trace aggregation. Everything here is a
// library call so the commands can be driven directly from tests.

namespace bois::cli {

struct CampaignSpec {
  enum class Mode { single, grid, random };
  Mode mode = Mode::random;
  Vec x0;          // single
  int levels = 3;  // grid
  int count = 16;  // random
};

struct ExperimentConfig {
  std::string benchmark = "flowsheet";
  std::vector<Variant> variants{Variant::sbo, Variant::mcbo, Variant::bois};
  int iterations = 100;
  CampaignSpec campaign{};
  std::uint64_t seed = 0;
  int parallel = 0;  // 0 = number of hardware execution units
  AcquisitionSpec acquisition{};
  long mc_samples = 1000;
  ReferencePolicy policy{};
  KernelFamily kernel = KernelFamily::matern52;
  FitOptions fit{};
  SearchBudget search{};
  RefitPolicy refit{};
  std::filesystem::path out_dir = "out";
};

// Parses and fully validates a config object. Unknown or ill-typed keys are
// rejected with the offending key path in the message.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

// Reads a JSON file; parse errors carry file:line in the message.
nlohmann::json load_config_file(const std::filesystem::path& path);

struct CellStatus {
  Variant variant;
  int start_index = 0;
  std::uint64_t seed = 0;
  std::string trace_file;
  std::string manifest_file;
  bool ok = false;
  std::string error;
  double final_best_f = 0.0;
  double wallclock_ms = 0.0;
};

struct CampaignResult {
  std::filesystem::path index_path;
  std::vector<CellStatus> cells;
  int completed = 0;
  int failed = 0;
};

// Runs every (variant x starting point) cell, possibly in parallel, writing
// per-run trace CSVs and manifests plus one campaign index. Parallelism only
// changes wall-clock, never file contents.
CampaignResult cmd_run(const ExperimentConfig& config, std::ostream& log);

struct ParityConfig {
  std::string benchmark = "flowsheet";
  int train_samples = 50;
  std::optional<std::filesystem::path> train_trace;  // reuse a prior run's data
  int query_points = 200;
  std::vector<long> sample_sweep{10, 100, 10000};
  double delta = 1e-3;  // relative-offset reference policy
  std::uint64_t seed = 0;
  KernelFamily kernel = KernelFamily::matern52;
  FitOptions fit{};
  int parallel = 0;
  std::filesystem::path out_dir = "out";
};

ParityConfig parse_parity_config(const nlohmann::json& j);

struct ParityLevelSummary {
  long samples = 0;
  double median_rel_mean = 0.0;
  double p90_rel_mean = 0.0;
  double median_rel_std = 0.0;
  double p90_rel_std = 0.0;
  // restricted to query points where every output's posterior std is at most
  // 10% of |posterior mean| (the local-linearity regime)
  double regime_median_rel_std = 0.0;
  double wallclock_ms = 0.0;
};

struct ParityResult {
  std::filesystem::path report_csv;
  std::filesystem::path summary_json;
  std::vector<ParityLevelSummary> levels;
  double bois_wallclock_ms = 0.0;
  int regime_rows = 0;
  int total_rows = 0;
};

// Fits the bank once, stores it, reloads it, and evaluates the linearization
// engine against Monte Carlo at each sweep size over shared query points.
ParityResult cmd_parity(const ParityConfig& config, std::ostream& log);

struct ReportResult {
  std::vector<std::filesystem::path> aggregate_csvs;
  std::filesystem::path long_csv;
  std::filesystem::path summary_json;
  std::vector<std::string> missing_traces;
  // set when sbo/mcbo/bois are all present; flags are recorded for review
  std::optional<bool> bois_mean_le_sbo;
  std::optional<bool> bois_spread_lt_sbo;
  std::optional<bool> mcbo_spread_lt_sbo;
  bool needs_review = false;
};

// Aggregates incumbent curves per variant (mean/median/p10/p90 by iteration)
// into CSV + a long-format file; no plotting dependency.
ReportResult cmd_report(const std::filesystem::path& index_path,
                        const std::filesystem::path& out_dir, std::ostream& log);

// Full argv-level entry used by the binary; returns the process exit code
// (0 ok, 1 runtime failure, 2 config rejection).
int run_cli(int argc, const char* const* argv);

}  // namespace bois::cli
