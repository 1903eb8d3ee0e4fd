#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hrdd/data.hpp"
#include "hrdd/rng.hpp"

namespace hrdd {

enum class TauScenario { I, II, III };
enum class ErrorScenario { A, B, C };

// Four equal clusters of groups; all groups in a cluster share one sample
// size from `cluster_sizes`, assigned in order.
struct DGPConfig {
  std::size_t G = 20;  // must be divisible by 4
  std::array<std::size_t, 4> cluster_sizes = {100, 200, 300, 400};
  TauScenario tau_scenario = TauScenario::I;
  ErrorScenario error_scenario = ErrorScenario::A;
  OutcomeKind outcome = OutcomeKind::continuous;
  std::uint64_t seed = 1;
};

struct GeneratedData {
  Dataset data;
  std::vector<double> latent_tau;  // jump of the latent continuous response
  std::vector<double> true_effect;  // scoring truth: latent_tau, or the
                                    // induced probability jump when binary
};

// Component laws, exposed so their moments can be checked directly.
double draw_tau(TauScenario s, RngStream& rng);
double draw_error(ErrorScenario s, RngStream& rng);

// True jump in P(Y = 1) at the cutoff induced by latent jump tau and noise
// scale sigma: survival(-tau/sigma) - survival(0) under the error law.
double true_binary_effect(double tau, double sigma, ErrorScenario s);

// Running variable 2 Beta(2,4) - 1, cubic mean on each side with a tau_g
// jump at c = 0; binary mode thresholds the latent response at zero.
GeneratedData generate_dataset(const DGPConfig& cfg);

enum class MethodKind { hrdd_global, hrdd_local, srdd, pooled };
std::string method_name(MethodKind m);

struct SimOptions {
  int n_iter = 1500;
  int n_burn = 500;
  int grid_size = 8;   // bandwidth candidates
  int batch_len = 100;
  int warmup_len = 50;
  int n_threads = 1;   // replication-level parallelism
};

struct Metrics {
  double rmse = 0.0;
  double cp = 0.0;
  double al = 0.0;
  std::size_t n_cells = 0;
};

struct MethodMetrics {
  MethodKind method = MethodKind::srdd;
  Metrics metrics;
  std::size_t n_failures = 0;  // (replication, group) cells excluded
};

struct MetricsReport {
  DGPConfig cfg;
  int R = 0;
  std::vector<MethodMetrics> rows;
};

// RMSE over cells, 95%-interval coverage, and average interval length.
// Arrays must be aligned and finite with hi >= lo.
Metrics compute_metrics(const std::vector<double>& estimates,
                        const std::vector<double>& truths,
                        const std::vector<std::pair<double, double>>& intervals);

// R replications: generate data with a derived per-replication seed, fit
// each method, aggregate per-(replication, group) cells.  Method failures
// are excluded from aggregation and counted.
MetricsReport run_replications(const DGPConfig& cfg,
                               const std::vector<MethodKind>& methods, int R,
                               const SimOptions& opts = {});

}  // namespace hrdd
