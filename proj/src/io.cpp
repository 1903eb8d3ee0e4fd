#include "hrdd/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "hrdd/baseline.hpp"
#include "hrdd/errors.hpp"
#include "hrdd/gibbs_binary.hpp"
#include "hrdd/gibbs_continuous.hpp"
#include "hrdd/version.hpp"

namespace hrdd {
namespace {

// ---------------------------------------------------------------------------
// CSV parsing
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> row_line;  // 1-based starting line of each data record
};

// RFC-4180 state machine over the whole file.  Quoted fields may contain
// commas, doubled quotes, and line breaks; records end at LF or CRLF outside
// quotes; a trailing newline is optional and fully empty lines are skipped.
CsvTable parse_csv_text(const std::string& text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;  // a closed quoted field admits only , or EOL
  long line = 1;
  long record_start = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = std::move(record);
    } else {
      table.rows.push_back(std::move(record));
      table.row_line.push_back(record_start);
    }
    record.clear();
  };

  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        ++line;
        if (record.empty() && field.empty() && !field_was_quoted) {
          record_start = line;  // skip a fully empty line
        } else {
          end_record();
          record_start = line;
        }
        break;
      case '"':
        if (!field.empty() || field_was_quoted)
          throw ParseError("quote inside unquoted field", line);
        in_quotes = true;
        field_was_quoted = true;
        break;
      default:
        if (field_was_quoted)
          throw ParseError("text after closing quote", line);
        field.push_back(ch);
        break;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", record_start);
  if (!record.empty() || !field.empty() || field_was_quoted) end_record();
  if (table.header.empty()) throw ParseError("empty file", 1);
  return table;
}

std::size_t header_index(const CsvTable& t, const std::string& name) {
  std::size_t found = t.header.size();
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] != name) continue;
    if (found != t.header.size())
      throw ParseError("duplicate column: " + name, 1);
    found = j;
  }
  if (found == t.header.size()) throw MissingColumn(name);
  return found;
}

double parse_real(const std::string& s, const char* column, long line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v))
    throw ParseError(std::string("column '") + column + "': not a finite number: '" +
                         s + "'",
                     line);
  return v;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << text;
  f.flush();
  if (!f) throw IoError("write failed: " + path);
}

void require_aligned(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw ValidationError(ValidationError::Kind::LengthMismatch,
                          std::string(what) + ": expected " + std::to_string(want) +
                              " entries, got " + std::to_string(got));
}

// "group 3: ..." -> row 3; anything else applies to every row.
std::vector<std::string> assign_warnings(const std::vector<std::string>& warnings,
                                         std::size_t n_groups) {
  std::vector<std::string> per_row(n_groups);
  auto append = [](std::string& dst, const std::string& w) {
    if (!dst.empty()) dst += " | ";
    dst += w;
  };
  for (const auto& w : warnings) {
    std::size_t g = n_groups;
    if (w.rfind("group ", 0) == 0) {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(w.data() + 6, w.data() + w.size(), idx);
      if (ec == std::errc{} && ptr != w.data() + w.size() && *ptr == ':' &&
          idx < n_groups)
        g = idx;
    }
    if (g < n_groups) {
      append(per_row[g], w);
    } else {
      for (auto& row : per_row) append(row, w);
    }
  }
  return per_row;
}

// ---------------------------------------------------------------------------
// Manifest field names and enum spellings
// ---------------------------------------------------------------------------

using nlohmann::json;

const char* command_name(Command c) {
  switch (c) {
    case Command::fit: return "fit";
    case Command::simulate: return "simulate";
    case Command::bandwidth: return "bandwidth";
  }
  return "fit";
}

const char* outcome_name(OutcomeKind k) {
  return k == OutcomeKind::binary ? "binary" : "continuous";
}

const char* kernel_name(KernelKind k) {
  return k == KernelKind::window ? "window" : "triangular";
}

const char* bandwidth_name(BandwidthChoice b) {
  switch (b) {
    case BandwidthChoice::local: return "local";
    case BandwidthChoice::global: return "global";
    case BandwidthChoice::fixed: return "fixed";
  }
  return "local";
}

template <class Enum>
Enum parse_enum(const std::string& s,
                std::initializer_list<std::pair<const char*, Enum>> table,
                const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw ParseError(std::string("unknown ") + what + ": '" + s + "'");
}

template <class T>
T manifest_field(const json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest field '") + name + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Command execution
// ---------------------------------------------------------------------------

Hyperparams config_hyper(const RunConfig& cfg) {
  Hyperparams hp = cfg.outcome == OutcomeKind::binary ? binary_default_hyper()
                                                      : Hyperparams{};
  hp.kernel = cfg.kernel;
  hp.q = cfg.q;
  hp.use_spike_slab = cfg.use_spike_slab;
  hp.use_robust_mixture = cfg.use_robust_mixture;
  return hp;
}

struct FitResult {
  BandwidthPlan plan;
  PosteriorDraws draws;
};

FitResult run_model(const RunConfig& cfg, const Dataset& data) {
  const Hyperparams hp = config_hyper(cfg);
  const std::size_t G = data.n_groups();
  FitResult out;
  if (cfg.bandwidth == BandwidthChoice::fixed) {
    const std::vector<double> h(G, cfg.fixed_h);
    if (cfg.outcome == OutcomeKind::binary) {
      BinaryModelSpec spec{data, hp, h, cfg.n_iter, cfg.n_burn, cfg.seed};
      out.draws = run_chain_binary(spec);
    } else {
      ContinuousModelSpec spec{data, hp, h, cfg.n_iter, cfg.n_burn, cfg.seed, {}};
      out.draws = run_chain_continuous(spec);
    }
    out.plan.candidates = {cfg.fixed_h};
    out.plan.selected = h;
    out.plan.score_trace.assign(G, std::vector<std::pair<double, double>>{});
    return out;
  }
  const bool global_mode = cfg.bandwidth == BandwidthChoice::global;
  BandwidthPlan plan;
  plan.candidates = build_candidate_grid(data, hp, cfg.grid_size);
  plan.mode = global_mode ? BandwidthMode::global : BandwidthMode::local;
  BandwidthResult res;
  if (cfg.outcome == OutcomeKind::binary) {
    BinaryModelSpec spec{data, hp, {}, cfg.n_iter, cfg.n_burn, cfg.seed};
    res = global_mode ? select_global_bandwidth(spec, std::move(plan))
                      : select_local_bandwidths(spec, std::move(plan));
  } else {
    ContinuousModelSpec spec{data, hp, {}, cfg.n_iter, cfg.n_burn, cfg.seed, {}};
    res = global_mode ? select_global_bandwidth(spec, std::move(plan))
                      : select_local_bandwidths(spec, std::move(plan));
  }
  out.plan = std::move(res.plan);
  out.draws = std::move(res.draws);
  return out;
}

std::vector<std::size_t> group_sizes(const Dataset& d) {
  std::vector<std::size_t> sizes;
  sizes.reserve(d.n_groups());
  for (const auto& g : d.groups) sizes.push_back(g.size());
  return sizes;
}

void run_fit(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const LoadedCsv lc = load_csv(cfg.input, cfg.threshold, cfg.outcome);
  FitResult res = run_model(cfg, lc.data);
  write_summary_csv((out_dir / "summary.csv").string(), lc.labels,
                    group_sizes(lc.data), res.plan.selected, res.draws,
                    res.plan.warnings);
  write_trace_csv((out_dir / "score_trace.csv").string(), lc.labels, res.plan);
  if (cfg.save_draws)
    write_draws_csv((out_dir / "draws.csv").string(), lc.labels, res.draws);
}

void run_bandwidth(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const LoadedCsv lc = load_csv(cfg.input, cfg.threshold, cfg.outcome);
  FitResult res = run_model(cfg, lc.data);
  write_plan_csv((out_dir / "plan.csv").string(), lc.labels, res.plan);
  write_trace_csv((out_dir / "score_trace.csv").string(), lc.labels, res.plan);
}

void run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  const auto [error_scenario, tau_scenario] = parse_scenario(cfg.scenario);
  DGPConfig dgp;
  dgp.G = cfg.G;
  dgp.cluster_sizes = cfg.cluster_sizes;
  dgp.tau_scenario = tau_scenario;
  dgp.error_scenario = error_scenario;
  dgp.outcome = cfg.outcome;
  dgp.seed = cfg.seed;
  SimOptions opts;
  opts.n_iter = cfg.n_iter;
  opts.n_burn = cfg.n_burn;
  opts.grid_size = cfg.grid_size;
  opts.n_threads = cfg.threads;
  const std::vector<MethodKind> methods = {MethodKind::hrdd_global,
                                           MethodKind::hrdd_local,
                                           MethodKind::srdd, MethodKind::pooled};
  const MetricsReport report = run_replications(dgp, methods, cfg.R, opts);
  write_metrics_csv((out_dir / "metrics.csv").string(), report);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

LoadedCsv load_csv(const std::string& path, double c, OutcomeKind kind) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const CsvTable table = parse_csv_text(buf.str());

  const std::size_t gi = header_index(table, "group");
  const std::size_t yi = header_index(table, "y");
  const std::size_t xi = header_index(table, "x");
  if (table.rows.empty()) throw ParseError("no data rows");

  LoadedCsv out;
  out.data.c = c;
  out.data.outcome_kind = kind;
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const long line = table.row_line[r];
    if (row.size() != table.header.size())
      throw ParseError("expected " + std::to_string(table.header.size()) +
                           " fields, got " + std::to_string(row.size()),
                       line);
    const std::string& label = row[gi];
    if (label.empty()) throw ParseError("empty group label", line);
    const double y = parse_real(row[yi], "y", line);
    const double x = parse_real(row[xi], "x", line);

    auto [it, inserted] = index_of.try_emplace(label, out.labels.size());
    if (inserted) {
      out.labels.push_back(label);
      out.data.groups.emplace_back();
    }
    const std::size_t g = it->second;
    if (kind == OutcomeKind::binary && y != 0.0 && y != 1.0)
      throw ValidationError(ValidationError::Kind::MixedOutcomeType,
                            "line " + std::to_string(line) +
                                ": binary outcome requires y in {0,1}, got " +
                                row[yi],
                            static_cast<long>(g), line);
    GroupData& gd = out.data.groups[g];
    gd.y.push_back(y);
    gd.x.push_back(x);
    gd.w.push_back(x >= c ? 1 : 0);
  }
  validate(out.data);
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += '"';
  return out;
}

void write_summary_csv(const std::string& path,
                       const std::vector<std::string>& labels,
                       const std::vector<std::size_t>& sizes,
                       const std::vector<double>& bandwidths,
                       const PosteriorDraws& draws,
                       const std::vector<std::string>& extra_warnings) {
  const std::size_t G = labels.size();
  require_aligned(sizes.size(), G, "write_summary_csv: sizes");
  require_aligned(bandwidths.size(), G, "write_summary_csv: bandwidths");
  require_aligned(draws.summary.size(), G, "write_summary_csv: summaries");
  std::vector<std::string> warnings = extra_warnings;
  warnings.insert(warnings.end(), draws.warnings.begin(), draws.warnings.end());
  const std::vector<std::string> per_row = assign_warnings(warnings, G);

  std::string out = "group,n_g,h_g,post_mean,post_sd,q025,q975,warn_flags\n";
  for (std::size_t g = 0; g < G; ++g) {
    const GroupSummary& s = draws.summary[g];
    out += csv_escape(labels[g]);
    out += ',' + std::to_string(sizes[g]);
    out += ',' + format_real(bandwidths[g]);
    out += ',' + format_real(s.mean);
    out += ',' + format_real(s.sd);
    out += ',' + format_real(s.q025);
    out += ',' + format_real(s.q975);
    out += ',' + csv_escape(per_row[g]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_draws_csv(const std::string& path,
                     const std::vector<std::string>& labels,
                     const PosteriorDraws& draws) {
  std::string out = "draw,group,effect\n";
  for (std::size_t d = 0; d < draws.effect.size(); ++d) {
    require_aligned(draws.effect[d].size(), labels.size(), "write_draws_csv: draw");
    for (std::size_t g = 0; g < labels.size(); ++g) {
      out += std::to_string(d);
      out += ',' + csv_escape(labels[g]);
      out += ',' + format_real(draws.effect[d][g]);
      out += '\n';
    }
  }
  write_text_file(path, out);
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::string>& labels,
                     const BandwidthPlan& plan) {
  require_aligned(plan.score_trace.size(), labels.size(), "write_trace_csv: trace");
  std::string out = "group,h,score,batch\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    for (std::size_t b = 0; b < plan.score_trace[g].size(); ++b) {
      const auto& [h, score] = plan.score_trace[g][b];
      out += csv_escape(labels[g]);
      out += ',' + format_real(h);
      out += ',' + format_real(score);
      out += ',' + std::to_string(b);
      out += '\n';
    }
  }
  write_text_file(path, out);
}

void write_plan_csv(const std::string& path,
                    const std::vector<std::string>& labels,
                    const BandwidthPlan& plan) {
  require_aligned(plan.selected.size(), labels.size(), "write_plan_csv: selected");
  std::string out = "group,h\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    out += csv_escape(labels[g]);
    out += ',' + format_real(plan.selected[g]);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::string out = "method,rmse,coverage,avg_length,n_cells,n_failures\n";
  for (const MethodMetrics& row : report.rows) {
    out += method_name(row.method);
    out += ',' + format_real(row.metrics.rmse);
    out += ',' + format_real(row.metrics.cp);
    out += ',' + format_real(row.metrics.al);
    out += ',' + std::to_string(row.metrics.n_cells);
    out += ',' + std::to_string(row.n_failures);
    out += '\n';
  }
  write_text_file(path, out);
}

std::pair<ErrorScenario, TauScenario> parse_scenario(const std::string& code) {
  const std::size_t dash = code.find('-');
  if (dash == std::string::npos)
    throw DomainError("scenario must look like 'A-I': " + code);
  const std::string err = code.substr(0, dash);
  const std::string tau = code.substr(dash + 1);
  ErrorScenario e;
  if (err == "A") e = ErrorScenario::A;
  else if (err == "B") e = ErrorScenario::B;
  else if (err == "C") e = ErrorScenario::C;
  else throw DomainError("unknown error scenario: " + err);
  TauScenario t;
  if (tau == "I") t = TauScenario::I;
  else if (tau == "II") t = TauScenario::II;
  else if (tau == "III") t = TauScenario::III;
  else throw DomainError("unknown treatment-effect scenario: " + tau);
  return {e, t};
}

void validate_config(const RunConfig& cfg) {
  if (cfg.output.empty()) throw DomainError("output directory must be given");
  if (cfg.threads < 1) throw DomainError("threads must be >= 1");
  if (cfg.n_iter < 1) throw DomainError("iters must be >= 1");
  if (cfg.n_burn < 0) throw DomainError("burn must be >= 0");
  if (cfg.n_iter <= cfg.n_burn) throw DomainError("iters must exceed burn");
  if (cfg.q < 0 || cfg.q > 3) throw DomainError("q must be in [0, 3]");

  if (cfg.command == Command::simulate) {
    parse_scenario(cfg.scenario);
    if (cfg.G < 4 || cfg.G % 4 != 0)
      throw DomainError("G must be a positive multiple of 4");
    if (cfg.R < 1) throw DomainError("R must be >= 1");
    for (const std::size_t s : cfg.cluster_sizes)
      if (s == 0) throw DomainError("cluster sizes must be positive");
    if (cfg.grid_size < 2) throw DomainError("grid-size must be >= 2");
    return;
  }

  if (cfg.input.empty()) throw DomainError("input CSV must be given");
  if (!std::filesystem::is_regular_file(cfg.input))
    throw DomainError("input file not found: " + cfg.input);
  if (!std::isfinite(cfg.threshold)) throw DomainError("threshold must be finite");
  if (cfg.command == Command::bandwidth && cfg.bandwidth == BandwidthChoice::fixed)
    throw DomainError("bandwidth selection mode must be local or global");
  if (cfg.bandwidth == BandwidthChoice::fixed) {
    if (!(std::isfinite(cfg.fixed_h) && cfg.fixed_h > 0.0))
      throw DomainError("fixed bandwidth must be positive and finite");
  } else if (cfg.grid_size < 2) {
    throw DomainError("grid-size must be >= 2");
  }
}

void write_manifest(const std::string& path, const RunConfig& cfg) {
  json config;
  config["input"] = cfg.input;
  config["threshold"] = cfg.threshold;
  config["outcome"] = outcome_name(cfg.outcome);
  config["kernel"] = kernel_name(cfg.kernel);
  config["q"] = cfg.q;
  config["spike_slab"] = cfg.use_spike_slab;
  config["robust_mixture"] = cfg.use_robust_mixture;
  config["bandwidth"] = bandwidth_name(cfg.bandwidth);
  config["fixed_h"] = cfg.fixed_h;
  config["grid_size"] = cfg.grid_size;
  config["n_iter"] = cfg.n_iter;
  config["n_burn"] = cfg.n_burn;
  config["seed"] = cfg.seed;
  config["save_draws"] = cfg.save_draws;
  config["scenario"] = cfg.scenario;
  config["G"] = cfg.G;
  config["cluster_sizes"] = cfg.cluster_sizes;
  config["R"] = cfg.R;

  json manifest;
  manifest["tool"] = "hrdd";
  manifest["version"] = kVersionString;
  manifest["command"] = command_name(cfg.command);
  manifest["config"] = config;
  write_text_file(path, manifest.dump(2) + "\n");
}

RunConfig load_manifest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  json manifest;
  try {
    manifest = json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (manifest_field<std::string>(manifest, "tool") != "hrdd")
    throw ParseError("not an hrdd manifest: " + path);

  RunConfig cfg;
  cfg.command = parse_enum<Command>(
      manifest_field<std::string>(manifest, "command"),
      {{"fit", Command::fit},
       {"simulate", Command::simulate},
       {"bandwidth", Command::bandwidth}},
      "command");
  const json config = manifest_field<json>(manifest, "config");
  cfg.input = manifest_field<std::string>(config, "input");
  cfg.threshold = manifest_field<double>(config, "threshold");
  cfg.outcome = parse_enum<OutcomeKind>(
      manifest_field<std::string>(config, "outcome"),
      {{"continuous", OutcomeKind::continuous}, {"binary", OutcomeKind::binary}},
      "outcome");
  cfg.kernel = parse_enum<KernelKind>(
      manifest_field<std::string>(config, "kernel"),
      {{"triangular", KernelKind::triangular}, {"window", KernelKind::window}},
      "kernel");
  cfg.q = manifest_field<int>(config, "q");
  cfg.use_spike_slab = manifest_field<bool>(config, "spike_slab");
  cfg.use_robust_mixture = manifest_field<bool>(config, "robust_mixture");
  cfg.bandwidth = parse_enum<BandwidthChoice>(
      manifest_field<std::string>(config, "bandwidth"),
      {{"local", BandwidthChoice::local},
       {"global", BandwidthChoice::global},
       {"fixed", BandwidthChoice::fixed}},
      "bandwidth mode");
  cfg.fixed_h = manifest_field<double>(config, "fixed_h");
  cfg.grid_size = manifest_field<int>(config, "grid_size");
  cfg.n_iter = manifest_field<int>(config, "n_iter");
  cfg.n_burn = manifest_field<int>(config, "n_burn");
  cfg.seed = manifest_field<std::uint64_t>(config, "seed");
  cfg.save_draws = manifest_field<bool>(config, "save_draws");
  cfg.scenario = manifest_field<std::string>(config, "scenario");
  cfg.G = manifest_field<std::size_t>(config, "G");
  const auto sizes = manifest_field<std::vector<std::size_t>>(config, "cluster_sizes");
  if (sizes.size() != cfg.cluster_sizes.size())
    throw ParseError("manifest field 'cluster_sizes': expected 4 entries");
  std::copy(sizes.begin(), sizes.end(), cfg.cluster_sizes.begin());
  cfg.R = manifest_field<int>(config, "R");
  return cfg;
}

void run_command(const RunConfig& cfg) {
  validate_config(cfg);
  const std::filesystem::path out_dir(cfg.output);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create output directory: " + cfg.output);

  switch (cfg.command) {
    case Command::fit: run_fit(cfg, out_dir); break;
    case Command::bandwidth: run_bandwidth(cfg, out_dir); break;
    case Command::simulate: run_simulate(cfg, out_dir); break;
  }
  write_manifest((out_dir / "manifest.json").string(), cfg);
}

}  // namespace hrdd
