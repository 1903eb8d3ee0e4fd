#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hrdd/bandwidth.hpp"
#include "hrdd/data.hpp"
#include "hrdd/sim.hpp"

namespace hrdd {

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct LoadedCsv {
  Dataset data;                     // groups ordered by first appearance
  std::vector<std::string> labels;  // original group labels, aligned with data.groups
};

// Reads an RFC-4180-style CSV (UTF-8, header required) with columns `group`,
// `y`, `x` in any order; extra columns are ignored.  The treatment indicator
// is derived as I(x >= c).  For binary outcomes every y must be exactly 0 or
// 1.  Throws ParseError (with 1-based line number), MissingColumn, or
// ValidationError{MixedOutcomeType}.
LoadedCsv load_csv(const std::string& path, double c,
                   OutcomeKind kind = OutcomeKind::continuous);

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

// 17 significant digits: parses back to the identical double.
std::string format_real(double v);

// Quotes the field (doubling embedded quotes) only when it contains a comma,
// quote, or line break.
std::string csv_escape(const std::string& field);

// Per-group summary table: group,n_g,h_g,post_mean,post_sd,q025,q975,warn_flags.
// `extra_warnings` (e.g. from a bandwidth plan) is merged with draws.warnings;
// entries prefixed "group <i>:" land on that row, all others on every row.
void write_summary_csv(const std::string& path,
                       const std::vector<std::string>& labels,
                       const std::vector<std::size_t>& sizes,
                       const std::vector<double>& bandwidths,
                       const PosteriorDraws& draws,
                       const std::vector<std::string>& extra_warnings = {});

// Long-format effect draws: draw,group,effect.
void write_draws_csv(const std::string& path,
                     const std::vector<std::string>& labels,
                     const PosteriorDraws& draws);

// Hill-climb bookkeeping: group,h,score,batch (one row per scored batch).
void write_trace_csv(const std::string& path,
                     const std::vector<std::string>& labels,
                     const BandwidthPlan& plan);

// Selected bandwidths: group,h.
void write_plan_csv(const std::string& path,
                    const std::vector<std::string>& labels,
                    const BandwidthPlan& plan);

// Simulation metrics: method,rmse,coverage,avg_length,n_cells,n_failures.
void write_metrics_csv(const std::string& path, const MetricsReport& report);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

enum class Command { fit, simulate, bandwidth };
enum class BandwidthChoice { local, global, fixed };

struct RunConfig {
  Command command = Command::fit;
  std::string input;         // CSV path (fit / bandwidth)
  std::string output = ".";  // directory for result files; created if absent

  // model options
  double threshold = 0.0;
  OutcomeKind outcome = OutcomeKind::continuous;
  KernelKind kernel = KernelKind::triangular;
  int q = 1;
  bool use_spike_slab = true;      // resolve per outcome before running
  bool use_robust_mixture = true;  // continuous model only
  BandwidthChoice bandwidth = BandwidthChoice::local;
  double fixed_h = 0.0;  // required iff bandwidth == fixed
  int grid_size = 8;     // candidate count L
  int n_iter = 1500;
  int n_burn = 500;
  std::uint64_t seed = 1;
  int threads = 1;  // execution detail: never stored in the manifest
  bool save_draws = false;

  // simulation options
  std::string scenario = "A-I";  // error law - treatment-effect law
  std::size_t G = 20;
  std::array<std::size_t, 4> cluster_sizes = {100, 200, 300, 400};
  int R = 50;
};

// "A-I" ... "C-III" -> (error law, treatment-effect law).  Throws DomainError.
std::pair<ErrorScenario, TauScenario> parse_scenario(const std::string& code);

// Range- and path-checks every option relevant to cfg.command; throws
// DomainError (usage-class) on violation.
void validate_config(const RunConfig& cfg);

// JSON manifest with the tool version and every result-determining option.
// Output directory and thread count are deliberately omitted: replaying a
// manifest must reproduce the result files byte-for-byte wherever and however
// parallel it runs.
void write_manifest(const std::string& path, const RunConfig& cfg);

// Parses a manifest back into a RunConfig (output/threads keep defaults, the
// caller overrides them).  Throws ParseError on malformed or incomplete JSON.
RunConfig load_manifest(const std::string& path);

// Executes cfg end to end and writes the result files into cfg.output:
//   fit       -> summary.csv, score_trace.csv, manifest.json [, draws.csv]
//   bandwidth -> plan.csv, score_trace.csv, manifest.json
//   simulate  -> metrics.csv, manifest.json
// Throws on failure; the CLI shell maps exception classes to exit codes.
void run_command(const RunConfig& cfg);

}  // namespace hrdd
