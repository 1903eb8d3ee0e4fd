#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hrdd/errors.hpp"
#include "hrdd/io.hpp"
#include "hrdd/rng.hpp"

using namespace hrdd;
namespace fs = std::filesystem;

namespace {

struct TmpDir {
  fs::path path;
  explicit TmpDir(const std::string& name) : path(fs::path("io_test_tmp") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(f.good());
  f << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : text) {
    if (ch == '\n') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

// three groups with a unit jump at zero and a mild slope
std::string make_fit_csv(std::size_t n_per_group, std::uint64_t seed) {
  RngStream rng(seed, 7);
  std::string csv = "group,y,x\n";
  for (int g = 0; g < 3; ++g) {
    for (std::size_t i = 0; i < n_per_group; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double y = (x >= 0.0 ? 1.0 : 0.0) + 0.5 * x + 0.3 * rng.normal();
      csv += "g" + std::to_string(g) + "," + format_real(y) + "," + format_real(x) + "\n";
    }
  }
  return csv;
}

RunConfig fit_config(const fs::path& input, const fs::path& output) {
  RunConfig cfg;
  cfg.command = Command::fit;
  cfg.input = input.string();
  cfg.output = output.string();
  cfg.threshold = 0.0;
  cfg.grid_size = 3;
  cfg.n_iter = 120;
  cfg.n_burn = 40;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("format_real round-trips doubles exactly") {
  RngStream rng(42, 1);
  std::vector<double> values = {0.0, -0.0, 1.0, -1.0, 1.0 / 3.0, 1e-308, 1e308,
                                -2.5e-17, 123456789.123456789};
  for (int i = 0; i < 2000; ++i) {
    const double mag = std::pow(10.0, rng.uniform(-300.0, 300.0));
    values.push_back((rng.uniform01() - 0.5) * mag);
  }
  for (const double v : values) {
    const std::string s = format_real(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
  }
}

TEST_CASE("csv_escape quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("with space") == "with space");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  CHECK(csv_escape("") == "");
}

TEST_CASE("load_csv parses a plain file") {
  TmpDir dir("plain");
  spit(dir.path / "d.csv",
       "group,y,x\n"
       "a,1.5,-0.25\n"
       "a,2,0.75\n"
       "b,0.125,0.5\n");
  const LoadedCsv lc = load_csv((dir.path / "d.csv").string(), 0.0);
  REQUIRE(lc.data.n_groups() == 2);
  CHECK(lc.labels == std::vector<std::string>{"a", "b"});
  CHECK(lc.data.outcome_kind == OutcomeKind::continuous);
  CHECK(lc.data.groups[0].y == std::vector<double>{1.5, 2.0});
  CHECK(lc.data.groups[0].x == std::vector<double>{-0.25, 0.75});
  CHECK(lc.data.groups[0].w == std::vector<std::uint8_t>{0, 1});
  CHECK(lc.data.groups[1].y == std::vector<double>{0.125});
  CHECK(lc.data.groups[1].w == std::vector<std::uint8_t>{1});
}

TEST_CASE("load_csv is header-order free, keeps first-appearance group order") {
  TmpDir dir("order");
  spit(dir.path / "d.csv",
       "x,note,y,group\n"
       "0.5,\"note, with comma\",1,beta\n"
       "-0.5,plain,2,alpha\n"
       "0,\"\",3,beta\n");
  const LoadedCsv lc = load_csv((dir.path / "d.csv").string(), 0.0);
  CHECK(lc.labels == std::vector<std::string>{"beta", "alpha"});
  REQUIRE(lc.data.n_groups() == 2);
  CHECK(lc.data.groups[0].y == std::vector<double>{1.0, 3.0});
  // x == c counts as treated
  CHECK(lc.data.groups[0].w == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("load_csv handles quoting, CRLF, and missing final newline") {
  TmpDir dir("quoting");
  spit(dir.path / "d.csv",
       "group,y,x\r\n"
       "\"g,1\",1.5,0.25\r\n"
       "\"say \"\"hi\"\"\",2.5,-0.5\r\n"
       "\"two\nlines\",3.5,0.75");
  const LoadedCsv lc = load_csv((dir.path / "d.csv").string(), 0.0);
  REQUIRE(lc.labels.size() == 3);
  CHECK(lc.labels[0] == "g,1");
  CHECK(lc.labels[1] == "say \"hi\"");
  CHECK(lc.labels[2] == "two\nlines");
  CHECK(lc.data.groups[2].x == std::vector<double>{0.75});
}

TEST_CASE("load_csv rejects malformed input with line numbers") {
  TmpDir dir("bad");
  const auto file = [&](const std::string& name, const std::string& text) {
    spit(dir.path / name, text);
    return (dir.path / name).string();
  };

  CHECK_THROWS_AS(load_csv(file("miss.csv", "group,y\n a,1\n"), 0.0), MissingColumn);
  try {
    load_csv(file("missx.csv", "group,y,z\na,1,2\n"), 0.0);
    FAIL("expected MissingColumn");
  } catch (const MissingColumn& e) {
    CHECK(e.column == "x");
  }

  CHECK_THROWS_AS(load_csv(file("empty.csv", ""), 0.0), ParseError);
  CHECK_THROWS_AS(load_csv(file("headonly.csv", "group,y,x\n"), 0.0), ParseError);

  try {
    load_csv(file("badnum.csv", "group,y,x\na,1,0.5\na,oops,0.5\n"), 0.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  try {
    load_csv(file("badcount.csv", "group,y,x\na,1\n"), 0.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  try {
    load_csv(file("nan.csv", "group,y,x\na,nan,0.5\n"), 0.0);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }

  CHECK_THROWS_AS(load_csv(file("unterm.csv", "group,y,x\n\"a,1,0.5\n"), 0.0),
                  ParseError);
  CHECK_THROWS_AS(load_csv(file("stray.csv", "group,y,x\na\"b,1,0.5\n"), 0.0),
                  ParseError);
  CHECK_THROWS_AS(load_csv(file("dup.csv", "group,y,y,x\na,1,1,0.5\n"), 0.0),
                  ParseError);
  CHECK_THROWS_AS(load_csv(file("nolabel.csv", "group,y,x\n,1,0.5\n"), 0.0),
                  ParseError);
  CHECK_THROWS_AS(load_csv("io_test_tmp/does_not_exist.csv", 0.0), IoError);
}

TEST_CASE("load_csv routes binary outcomes") {
  TmpDir dir("binary");
  spit(dir.path / "ok.csv", "group,y,x\na,0,-0.5\na,1,0.5\nb,1,0.25\nb,0,-0.25\n");
  const LoadedCsv lc =
      load_csv((dir.path / "ok.csv").string(), 0.0, OutcomeKind::binary);
  CHECK(lc.data.outcome_kind == OutcomeKind::binary);

  spit(dir.path / "bad.csv", "group,y,x\na,0,-0.5\na,1,0.5\na,2,0.25\n");
  try {
    load_csv((dir.path / "bad.csv").string(), 0.0, OutcomeKind::binary);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.kind == ValidationError::Kind::MixedOutcomeType);
    CHECK(e.row == 4);
  }
  // the same file is a legal continuous dataset
  CHECK_NOTHROW(load_csv((dir.path / "bad.csv").string(), 0.0));
}

TEST_CASE("write_summary_csv shapes rows and routes warnings") {
  TmpDir dir("summary");
  PosteriorDraws draws;
  draws.effect = {{1.0, 2.0}, {1.5, 2.5}, {2.0, 3.0}};
  draws.summary = summarize_effects(draws.effect);
  draws.warnings = {"group 1: one side of the cutoff has no kernel support"};
  const std::vector<std::string> extra = {"common bandwidth: grid exhausted"};

  const fs::path out = dir.path / "summary.csv";
  write_summary_csv(out.string(), {"aa", "bb"}, {10, 20}, {0.5, 0.25}, draws, extra);

  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "group,n_g,h_g,post_mean,post_sd,q025,q975,warn_flags");
  const auto row0 = split_fields(lines[1]);
  const auto row1 = split_fields(lines[2]);
  REQUIRE(row0.size() == 8);
  CHECK(row0[0] == "aa");
  CHECK(row0[1] == "10");
  CHECK(std::strtod(row0[2].c_str(), nullptr) == 0.5);
  CHECK(std::strtod(row0[3].c_str(), nullptr) == doctest::Approx(1.5));
  CHECK(row0[7] == "common bandwidth: grid exhausted");
  CHECK(row1[7] ==
        "common bandwidth: grid exhausted | group 1: one side of the cutoff has "
        "no kernel support");

  // mismatched lengths are rejected
  CHECK_THROWS_AS(
      write_summary_csv(out.string(), {"aa"}, {10, 20}, {0.5, 0.25}, draws, {}),
      ValidationError);
}

TEST_CASE("write_trace_csv emits one row per scored batch") {
  TmpDir dir("trace");
  BandwidthPlan plan;
  plan.score_trace = {{{0.5, -1.0}, {0.75, -1.5}, {0.75, -1.25}},
                      {},
                      {{0.5, -2.0}, {0.25, -1.75}}};
  const fs::path out = dir.path / "trace.csv";
  write_trace_csv(out.string(), {"a", "b", "c"}, plan);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 6);  // header + 3 + 0 + 2
  CHECK(lines[0] == "group,h,score,batch");
  CHECK(split_fields(lines[1])[3] == "0");
  CHECK(split_fields(lines[3])[3] == "2");
  CHECK(split_fields(lines[4])[0] == "c");
  CHECK(split_fields(lines[4])[3] == "0");
}

TEST_CASE("write_draws_csv emits long format") {
  TmpDir dir("draws");
  PosteriorDraws draws;
  draws.effect = {{1.0, 2.0}, {1.5, 2.5}, {2.0, 3.0}};
  draws.summary = summarize_effects(draws.effect);
  const fs::path out = dir.path / "draws.csv";
  write_draws_csv(out.string(), {"a", "b"}, draws);
  const auto lines = lines_of(slurp(out));
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "draw,group,effect");
  CHECK(split_fields(lines[1]) == std::vector<std::string>{"0", "a", "1"});
  CHECK(split_fields(lines[6])[0] == "2");
  CHECK(split_fields(lines[6])[1] == "b");
}

TEST_CASE("parse_scenario covers the nine codes") {
  CHECK(parse_scenario("A-I") ==
        std::pair(ErrorScenario::A, TauScenario::I));
  CHECK(parse_scenario("B-II") ==
        std::pair(ErrorScenario::B, TauScenario::II));
  CHECK(parse_scenario("C-III") ==
        std::pair(ErrorScenario::C, TauScenario::III));
  CHECK(parse_scenario("A-III").second == TauScenario::III);
  CHECK(parse_scenario("C-I").first == ErrorScenario::C);
  CHECK_THROWS_AS(parse_scenario("D-I"), DomainError);
  CHECK_THROWS_AS(parse_scenario("A"), DomainError);
  CHECK_THROWS_AS(parse_scenario("A-IV"), DomainError);
  CHECK_THROWS_AS(parse_scenario(""), DomainError);
  CHECK_THROWS_AS(parse_scenario("a-i"), DomainError);
}

TEST_CASE("manifest round-trips every stored field") {
  TmpDir dir("manifest");
  RunConfig cfg;
  cfg.command = Command::simulate;
  cfg.input = "data.csv";
  cfg.output = "ZZZ";   // not stored
  cfg.threads = 9;      // not stored
  cfg.threshold = -0.5;
  cfg.outcome = OutcomeKind::binary;
  cfg.kernel = KernelKind::window;
  cfg.q = 2;
  cfg.use_spike_slab = false;
  cfg.use_robust_mixture = false;
  cfg.bandwidth = BandwidthChoice::global;
  cfg.fixed_h = 0.3;
  cfg.grid_size = 5;
  cfg.n_iter = 77;
  cfg.n_burn = 33;
  cfg.seed = 0xDEADBEEF12345678ull;
  cfg.save_draws = true;
  cfg.scenario = "C-III";
  cfg.G = 8;
  cfg.cluster_sizes = {7, 8, 9, 10};
  cfg.R = 4;

  const fs::path m1 = dir.path / "m1.json";
  const fs::path m2 = dir.path / "m2.json";
  write_manifest(m1.string(), cfg);
  write_manifest(m2.string(), cfg);
  CHECK(slurp(m1) == slurp(m2));

  const RunConfig back = load_manifest(m1.string());
  CHECK(back.command == Command::simulate);
  CHECK(back.input == "data.csv");
  CHECK(back.output == ".");  // defaulted, not stored
  CHECK(back.threads == 1);   // defaulted, not stored
  CHECK(back.threshold == -0.5);
  CHECK(back.outcome == OutcomeKind::binary);
  CHECK(back.kernel == KernelKind::window);
  CHECK(back.q == 2);
  CHECK(back.use_spike_slab == false);
  CHECK(back.use_robust_mixture == false);
  CHECK(back.bandwidth == BandwidthChoice::global);
  CHECK(back.fixed_h == 0.3);
  CHECK(back.grid_size == 5);
  CHECK(back.n_iter == 77);
  CHECK(back.n_burn == 33);
  CHECK(back.seed == 0xDEADBEEF12345678ull);
  CHECK(back.save_draws == true);
  CHECK(back.scenario == "C-III");
  CHECK(back.G == 8);
  CHECK(back.cluster_sizes == std::array<std::size_t, 4>{7, 8, 9, 10});
  CHECK(back.R == 4);
}

TEST_CASE("load_manifest rejects malformed manifests") {
  TmpDir dir("badmanifest");
  const auto file = [&](const std::string& name, const std::string& text) {
    spit(dir.path / name, text);
    return (dir.path / name).string();
  };
  CHECK_THROWS_AS(load_manifest(file("garbage.json", "not json at all")), ParseError);
  CHECK_THROWS_AS(load_manifest(file("wrongtool.json",
                                     R"({"tool":"other","command":"fit"})")),
                  ParseError);
  CHECK_THROWS_AS(load_manifest(file("noconfig.json",
                                     R"({"tool":"hrdd","command":"fit"})")),
                  ParseError);
  CHECK_THROWS_AS(
      load_manifest(file("badcmd.json",
                         R"({"tool":"hrdd","command":"dance","config":{}})")),
      ParseError);
  CHECK_THROWS_AS(load_manifest("io_test_tmp/absent.json"), IoError);
}

TEST_CASE("validate_config rejects out-of-range options") {
  TmpDir dir("validate");
  spit(dir.path / "d.csv", "group,y,x\na,1,-0.5\na,2,0.5\n");
  const std::string input = (dir.path / "d.csv").string();

  RunConfig ok;
  ok.command = Command::fit;
  ok.input = input;
  ok.output = dir.path.string();
  CHECK_NOTHROW(validate_config(ok));

  const auto reject = [&](auto mutate) {
    RunConfig bad = ok;
    mutate(bad);
    CHECK_THROWS_AS(validate_config(bad), DomainError);
  };
  reject([](RunConfig& c) { c.output.clear(); });
  reject([](RunConfig& c) { c.threads = 0; });
  reject([](RunConfig& c) { c.n_iter = 100; c.n_burn = 100; });
  reject([](RunConfig& c) { c.n_burn = -1; });
  reject([](RunConfig& c) { c.q = 4; });
  reject([](RunConfig& c) { c.q = -1; });
  reject([](RunConfig& c) { c.input = "missing.csv"; });
  reject([](RunConfig& c) { c.threshold = std::nan(""); });
  reject([](RunConfig& c) { c.grid_size = 1; });
  reject([](RunConfig& c) { c.bandwidth = BandwidthChoice::fixed; });  // no h
  reject([](RunConfig& c) {
    c.bandwidth = BandwidthChoice::fixed;
    c.fixed_h = -1.0;
  });
  reject([](RunConfig& c) {
    c.command = Command::bandwidth;
    c.bandwidth = BandwidthChoice::fixed;
    c.fixed_h = 0.5;
  });

  RunConfig sim_ok;
  sim_ok.command = Command::simulate;
  sim_ok.output = dir.path.string();
  sim_ok.G = 8;
  sim_ok.R = 2;
  CHECK_NOTHROW(validate_config(sim_ok));
  const auto reject_sim = [&](auto mutate) {
    RunConfig bad = sim_ok;
    mutate(bad);
    CHECK_THROWS_AS(validate_config(bad), DomainError);
  };
  reject_sim([](RunConfig& c) { c.G = 10; });
  reject_sim([](RunConfig& c) { c.G = 0; });
  reject_sim([](RunConfig& c) { c.R = 0; });
  reject_sim([](RunConfig& c) { c.cluster_sizes[2] = 0; });
  reject_sim([](RunConfig& c) { c.scenario = "A-X"; });
  reject_sim([](RunConfig& c) { c.grid_size = 0; });

  // fixed mode needs no candidate grid
  RunConfig fixed_ok = ok;
  fixed_ok.bandwidth = BandwidthChoice::fixed;
  fixed_ok.fixed_h = 0.5;
  fixed_ok.grid_size = 1;
  CHECK_NOTHROW(validate_config(fixed_ok));
}

TEST_CASE("run_command fit writes a reproducible file set") {
  TmpDir dir("fit");
  const fs::path input = dir.path / "data.csv";
  spit(input, make_fit_csv(50, 321));

  RunConfig cfg = fit_config(input, dir.path / "out1");
  run_command(cfg);
  cfg.output = (dir.path / "out2").string();
  cfg.threads = 5;  // must not matter
  run_command(cfg);

  for (const char* name : {"summary.csv", "score_trace.csv", "manifest.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir.path / "out1" / name));
    CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out2" / name));
  }
  CHECK(!fs::exists(dir.path / "out1" / "draws.csv"));

  const auto summary = lines_of(slurp(dir.path / "out1" / "summary.csv"));
  REQUIRE(summary.size() == 4);  // header + 3 groups
  const auto row = split_fields(summary[1]);
  CHECK(row[0] == "g0");
  CHECK(row[1] == "50");
  CHECK(std::strtod(row[2].c_str(), nullptr) > 0.0);
  // the unit jump should be roughly recovered
  const double post_mean = std::strtod(row[3].c_str(), nullptr);
  CHECK(post_mean > 0.3);
  CHECK(post_mean < 1.7);

  const auto trace = lines_of(slurp(dir.path / "out1" / "score_trace.csv"));
  CHECK(trace.size() > 1);  // selection visited at least one batch

  // replaying the manifest into a third directory reproduces the bytes
  const RunConfig stored =
      load_manifest((dir.path / "out1" / "manifest.json").string());
  RunConfig replay = stored;
  replay.output = (dir.path / "out3").string();
  replay.threads = 2;
  run_command(replay);
  for (const char* name : {"summary.csv", "score_trace.csv", "manifest.json"}) {
    CAPTURE(name);
    CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out3" / name));
  }
}

TEST_CASE("run_command fit with fixed bandwidth and saved draws") {
  TmpDir dir("fixed");
  const fs::path input = dir.path / "data.csv";
  spit(input, make_fit_csv(40, 99));

  RunConfig cfg = fit_config(input, dir.path / "out");
  cfg.bandwidth = BandwidthChoice::fixed;
  cfg.fixed_h = 0.8;
  cfg.save_draws = true;
  run_command(cfg);

  const auto summary = lines_of(slurp(dir.path / "out" / "summary.csv"));
  REQUIRE(summary.size() == 4);
  for (int g = 1; g <= 3; ++g)
    CHECK(std::strtod(split_fields(summary[g])[2].c_str(), nullptr) == 0.8);

  // no selection ran: the trace is header-only
  const auto trace = lines_of(slurp(dir.path / "out" / "score_trace.csv"));
  CHECK(trace.size() == 1);

  // long-format draws: (120 - 40) retained sweeps x 3 groups
  const auto draws = lines_of(slurp(dir.path / "out" / "draws.csv"));
  CHECK(draws.size() == 1 + 80 * 3);
}

TEST_CASE("run_command bandwidth emits the plan") {
  TmpDir dir("plan");
  const fs::path input = dir.path / "data.csv";
  spit(input, make_fit_csv(40, 55));

  RunConfig cfg = fit_config(input, dir.path / "out");
  cfg.command = Command::bandwidth;
  cfg.bandwidth = BandwidthChoice::global;
  run_command(cfg);

  const auto plan = lines_of(slurp(dir.path / "out" / "plan.csv"));
  REQUIRE(plan.size() == 4);
  CHECK(plan[0] == "group,h");
  // global mode: one selected h repeated for every group
  const std::string h0 = split_fields(plan[1])[1];
  CHECK(split_fields(plan[2])[1] == h0);
  CHECK(split_fields(plan[3])[1] == h0);
  CHECK(std::strtod(h0.c_str(), nullptr) > 0.0);
  CHECK(fs::exists(dir.path / "out" / "score_trace.csv"));
  CHECK(!fs::exists(dir.path / "out" / "summary.csv"));

  const RunConfig stored = load_manifest((dir.path / "out" / "manifest.json").string());
  CHECK(stored.command == Command::bandwidth);
  CHECK(stored.bandwidth == BandwidthChoice::global);
}

TEST_CASE("run_command simulate is thread-invariant") {
  TmpDir dir("simulate");
  RunConfig cfg;
  cfg.command = Command::simulate;
  cfg.scenario = "A-II";
  cfg.G = 4;
  cfg.cluster_sizes = {40, 50, 60, 70};
  cfg.R = 2;
  cfg.n_iter = 120;
  cfg.n_burn = 40;
  cfg.grid_size = 2;
  cfg.seed = 7;
  cfg.output = (dir.path / "t1").string();
  cfg.threads = 1;
  run_command(cfg);
  cfg.output = (dir.path / "t3").string();
  cfg.threads = 3;
  run_command(cfg);

  CHECK(slurp(dir.path / "t1" / "metrics.csv") ==
        slurp(dir.path / "t3" / "metrics.csv"));
  CHECK(slurp(dir.path / "t1" / "manifest.json") ==
        slurp(dir.path / "t3" / "manifest.json"));

  const auto metrics = lines_of(slurp(dir.path / "t1" / "metrics.csv"));
  REQUIRE(metrics.size() == 5);
  CHECK(metrics[0] == "method,rmse,coverage,avg_length,n_cells,n_failures");
  const char* want_method[] = {"hrdd-g", "hrdd-l", "srdd", "pooled"};
  for (int m = 0; m < 4; ++m) {
    const auto row = split_fields(metrics[m + 1]);
    CHECK(row[0] == want_method[m]);
    // every cell fit: 2 replications x 4 groups, nothing excluded
    CHECK(row[4] == "8");
    CHECK(row[5] == "0");
    CHECK(std::strtod(row[1].c_str(), nullptr) > 0.0);
  }
}

TEST_CASE("run_command fit on a binary outcome") {
  TmpDir dir("binfit");
  RngStream rng(5, 3);
  std::string csv = "group,y,x\n";
  for (int g = 0; g < 2; ++g) {
    for (int i = 0; i < 60; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const double latent = (x >= 0.0 ? 1.0 : 0.0) + 0.4 * x + rng.normal();
      csv += "g" + std::to_string(g) + "," + (latent >= 0.0 ? "1" : "0") + "," +
             format_real(x) + "\n";
    }
  }
  const fs::path input = dir.path / "data.csv";
  spit(input, csv);

  RunConfig cfg = fit_config(input, dir.path / "out");
  cfg.outcome = OutcomeKind::binary;
  cfg.use_spike_slab = false;
  cfg.use_robust_mixture = false;
  cfg.bandwidth = BandwidthChoice::fixed;
  cfg.fixed_h = 0.9;
  run_command(cfg);

  const auto summary = lines_of(slurp(dir.path / "out" / "summary.csv"));
  REQUIRE(summary.size() == 3);
  for (int g = 1; g <= 2; ++g) {
    const double mean = std::strtod(split_fields(summary[g])[3].c_str(), nullptr);
    CHECK(mean > -1.0);
    CHECK(mean < 1.0);
  }
}
