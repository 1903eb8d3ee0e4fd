#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrdd/errors.hpp"
#include "hrdd/io.hpp"
#include "hrdd/version.hpp"

namespace {

int env_default_threads() {
  const char* v = std::getenv("HRDD_THREADS");
  if (!v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1) return 1;
  return static_cast<int>(n);
}

hrdd::KernelKind kernel_from(const std::string& s) {
  return s == "window" ? hrdd::KernelKind::window : hrdd::KernelKind::triangular;
}

hrdd::BandwidthChoice mode_from(const std::string& s) {
  if (s == "global") return hrdd::BandwidthChoice::global;
  if (s == "fixed") return hrdd::BandwidthChoice::fixed;
  return hrdd::BandwidthChoice::local;
}

}  // namespace

int main(int argc, char** argv) {
  hrdd::RunConfig cfg;
  cfg.threads = env_default_threads();

  bool binary_flag = false;
  std::string kernel_str = "triangular";
  std::string mode_str = "local";
  std::vector<std::size_t> sizes;
  std::string manifest_path;
  std::string replay_output = ".";
  int replay_threads = cfg.threads;

  CLI::App app{"hierarchical Bayesian regression discontinuity"};
  app.set_version_flag("--version", hrdd::kVersionString);
  app.require_subcommand(1);

  auto add_mcmc_options = [&](CLI::App* sub) {
    sub->add_option("--iters", cfg.n_iter, "total sweeps (default 1500)");
    sub->add_option("--burn", cfg.n_burn, "burn-in sweeps discarded (default 500)");
    sub->add_option("--seed", cfg.seed, "RNG seed (default 1)");
    sub->add_option("--threads", cfg.threads,
                    "worker threads; results never depend on this "
                    "(default $HRDD_THREADS or 1)");
  };
  struct ModelFlags {
    CLI::Option* spike_slab = nullptr;
    CLI::Option* robust = nullptr;
  };
  auto add_model_options = [&](CLI::App* sub, bool allow_fixed) {
    sub->add_option("--input", cfg.input, "data CSV with columns group,y,x")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--output", cfg.output, "output directory (default .)");
    sub->add_option("--threshold", cfg.threshold, "cutoff c defining treatment")
        ->required();
    sub->add_flag("--binary", binary_flag, "treat y as a binary outcome");
    sub->add_option("--kernel", kernel_str, "triangular|window (default triangular)")
        ->check(CLI::IsMember({"triangular", "window"}));
    sub->add_option("--q", cfg.q, "local polynomial order per side (default 1)");
    ModelFlags flags;
    flags.spike_slab =
        sub->add_flag("--spike-slab,!--no-spike-slab", cfg.use_spike_slab,
                      "spike-and-slab prior on subgroup effects "
                      "(default: on for continuous, off for binary)");
    flags.robust =
        sub->add_flag("--robust,!--no-robust", cfg.use_robust_mixture,
                      "heavy-tailed error mixture, continuous model only "
                      "(default on)");
    sub->add_option("--mode", mode_str,
                    allow_fixed ? "bandwidth: local|global|fixed (default local)"
                                : "bandwidth: local|global (default local)")
        ->check(allow_fixed ? CLI::IsMember({"local", "global", "fixed"})
                            : CLI::IsMember({"local", "global"}));
    sub->add_option("--grid-size", cfg.grid_size,
                    "bandwidth candidates per selection (default 8)");
    return flags;
  };

  CLI::App* fit = app.add_subcommand("fit", "sample subgroup effects from a CSV");
  const ModelFlags fit_flags = add_model_options(fit, true);
  CLI::Option* h_opt = fit->add_option(
      "--fixed-h", cfg.fixed_h, "fixed bandwidth (requires --mode fixed)");
  fit->add_flag("--save-draws", cfg.save_draws, "also write every effect draw");
  add_mcmc_options(fit);

  CLI::App* bw = app.add_subcommand(
      "bandwidth", "run bandwidth selection only and emit the plan");
  const ModelFlags bw_flags = add_model_options(bw, false);
  add_mcmc_options(bw);

  CLI::App* sim = app.add_subcommand(
      "simulate", "replicated synthetic-data comparison of all methods");
  sim->add_option("--scenario", cfg.scenario,
                  "error law A|B|C + effect law I|II|III, e.g. A-I (default)");
  sim->add_option("--G", cfg.G, "number of subgroups, multiple of 4 (default 20)");
  sim->add_option("--R", cfg.R, "replications (default 50)");
  sim->add_option("--sizes", sizes,
                  "four cluster sizes (default 100,200,300,400)")
      ->delimiter(',');
  sim->add_flag("--binary", binary_flag, "binary-outcome study");
  sim->add_option("--output", cfg.output, "output directory (default .)");
  sim->add_option("--grid-size", cfg.grid_size,
                  "bandwidth candidates per selection (default 8)");
  add_mcmc_options(sim);

  CLI::App* replay = app.add_subcommand(
      "replay", "re-run a manifest.json; outputs are byte-identical");
  replay->add_option("manifest", manifest_path, "manifest.json from a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--output", replay_output, "output directory (default .)");
  replay->add_option("--threads", replay_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    CLI::App* sub = nullptr;
    for (CLI::App* s : app.get_subcommands()) sub = s;
    std::cerr << '\n' << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    if (replay->parsed()) {
      hrdd::RunConfig stored = hrdd::load_manifest(manifest_path);
      stored.output = replay_output;
      stored.threads = replay_threads;
      hrdd::run_command(stored);
      return 0;
    }

    if (fit->parsed()) cfg.command = hrdd::Command::fit;
    if (bw->parsed()) cfg.command = hrdd::Command::bandwidth;
    if (sim->parsed()) cfg.command = hrdd::Command::simulate;
    cfg.outcome = binary_flag ? hrdd::OutcomeKind::binary
                              : hrdd::OutcomeKind::continuous;
    cfg.kernel = kernel_from(kernel_str);
    cfg.bandwidth = mode_from(mode_str);
    // binary defaults differ: both priors are off unless explicitly requested
    if (binary_flag && (fit->parsed() || bw->parsed())) {
      const ModelFlags& flags = fit->parsed() ? fit_flags : bw_flags;
      if (flags.spike_slab->count() == 0) cfg.use_spike_slab = false;
      if (flags.robust->count() == 0) cfg.use_robust_mixture = false;
    }
    if (fit->parsed()) {
      if (cfg.bandwidth == hrdd::BandwidthChoice::fixed && h_opt->count() == 0)
        throw hrdd::DomainError("--mode fixed requires --fixed-h");
      if (h_opt->count() > 0 && cfg.bandwidth != hrdd::BandwidthChoice::fixed)
        throw hrdd::DomainError("--fixed-h only applies with --mode fixed");
    }
    if (sim->parsed() && !sizes.empty()) {
      if (sizes.size() != cfg.cluster_sizes.size())
        throw hrdd::DomainError("--sizes needs exactly 4 values");
      std::copy(sizes.begin(), sizes.end(), cfg.cluster_sizes.begin());
    }
    hrdd::run_command(cfg);
    return 0;
  } catch (const hrdd::ParseError& e) {
    std::cerr << "hrdd: input error";
    if (e.line >= 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << '\n';
    return 2;
  } catch (const hrdd::ValidationError& e) {
    std::cerr << "hrdd: invalid data: " << e.what() << '\n';
    return 2;
  } catch (const hrdd::DomainError& e) {
    std::cerr << "hrdd: invalid option: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hrdd: error: " << e.what() << '\n';
    return 1;
  }
}
