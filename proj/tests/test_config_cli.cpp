#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "marketlab/errors.hpp"
#include "marketlab/io.hpp"
#include "marketlab/learner.hpp"
#include "marketlab/market.hpp"
#include "marketlab/simulator.hpp"
#include "marketlab/strategies.hpp"

using namespace marketlab;
namespace fs = std::filesystem;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(static_cast<bool>(out));
  out << text;
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("marketlab_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string cli_binary() {
  const char* env = std::getenv("MARKETLAB_BIN");
  if (env == nullptr || *env == '\0') {
    throw std::runtime_error("MARKETLAB_BIN is not set; run through ctest");
  }
  return env;
}

fs::path source_dir() {
  const char* env = std::getenv("MARKETLAB_SOURCE_DIR");
  if (env == nullptr || *env == '\0') {
    throw std::runtime_error("MARKETLAB_SOURCE_DIR is not set; run through ctest");
  }
  return fs::path(env);
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the CLI with `args`, capturing exit code, stdout and stderr.
RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = scratch_dir() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err_path = scratch_dir() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = "\"" + cli_binary() + "\" " + args + " > \"" + out_path.string() +
                          "\" 2> \"" + err_path.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

}  // namespace

TEST_CASE("config parser handles sections, comments and typed getters") {
  const io::Config cfg = io::Config::parse_string(
      "# leading comment\n"
      "\n"
      "[market]\n"
      "mean_r = 0.55   # trailing comment\n"
      "  var_r=0.04\n"
      "[grid]\n"
      "rounds = 250\n"
      "corr_tr_values = 0.8, 0.9,0.95\n"
      "strategies = sharpe unif\n"
      "[strategy.fractional_kelly]\n"
      "kelly_fraction = 0.5\n"
      "seed_like = 18446744073709551615\n");

  CHECK(cfg.has("market", "mean_r"));
  CHECK_FALSE(cfg.has("market", "mean_m"));
  CHECK(cfg.line_of("market", "mean_r") == 4);
  CHECK(cfg.line_of("market", "var_r") == 5);
  CHECK(cfg.line_of("market", "absent") == 0);

  CHECK(cfg.get_double("market", "mean_r", 0.0) == doctest::Approx(0.55));
  CHECK(cfg.get_double("market", "var_r", 0.0) == doctest::Approx(0.04));
  CHECK(cfg.get_double("market", "mean_m", 0.125) == doctest::Approx(0.125));
  CHECK(cfg.get_int("grid", "rounds", 0) == 250);
  CHECK(cfg.get_int("grid", "absent", 7) == 7);
  CHECK(cfg.get_u64("strategy.fractional_kelly", "seed_like", 0) == 18446744073709551615ull);
  CHECK(cfg.get_string("grid", "strategies", "") == "sharpe unif");

  const std::vector<double> tr = cfg.get_double_list("grid", "corr_tr_values", {});
  REQUIRE(tr.size() == 3);
  CHECK(tr[0] == doctest::Approx(0.8));
  CHECK(tr[2] == doctest::Approx(0.95));
  const std::vector<double> dflt = cfg.get_double_list("grid", "corr_tm_values", {0.5});
  REQUIRE(dflt.size() == 1);
  CHECK(dflt[0] == doctest::Approx(0.5));

  // lists split on commas when present, otherwise on whitespace
  const std::vector<std::string> names = cfg.get_string_list("grid", "strategies", {});
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "sharpe");
  CHECK(names[1] == "unif");

  CHECK(cfg.snapshot().find("# leading comment") == 0);
}

TEST_CASE("config parse errors carry the offending line") {
  auto line_of_error = [](const std::string& text) {
    try {
      io::Config::parse_string(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };

  CHECK_THROWS_WITH_AS(io::Config::parse_string("[market]\na = 1\na = 2\n"),
                       "line 3: duplicate key 'a' (first at line 2)", ConfigError);
  CHECK(line_of_error("[market\nx = 1\n") == 1);          // unterminated header
  CHECK(line_of_error("[mar ket]\n") == 1);               // invalid section name
  CHECK(line_of_error("[market]\njust words\n") == 2);    // missing '='
  CHECK(line_of_error("[market]\nBad-Key = 1\n") == 2);   // invalid key characters
  CHECK(line_of_error("[market]\nmean_r =\n") == 2);      // empty value
  CHECK_THROWS_WITH_AS(io::Config::parse_string("x = 1\nx2 = oops\n")
                           .get_double("", "x2", 0.0),
                       "line 2: value 'oops' for .x2 is not a number", ConfigError);

  const io::Config cfg = io::Config::parse_string(
      "[grid]\nrounds = 2.5\nstrategies = sharpe,,unif\ncorr_rm_values = 0.9, nope\n");
  CHECK_THROWS_WITH_AS(cfg.get_int("grid", "rounds", 0),
                       "line 2: value '2.5' for grid.rounds is not an integer", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_string_list("grid", "strategies", {}),
                       "line 3: malformed list for grid.strategies", ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_double_list("grid", "corr_rm_values", {}),
                       "line 4: value 'nope' for grid.corr_rm_values is not a number",
                       ConfigError);
  CHECK_THROWS_WITH_AS(cfg.get_u64("grid", "rounds", 0),
                       "line 2: value '2.5' for grid.rounds is not an unsigned integer",
                       ConfigError);
}

TEST_CASE("require_known flags unknown sections and keys") {
  const auto allowed = io::allowed_config_keys();
  CHECK_NOTHROW(io::Config::parse_string("[market]\nmean_r = 0.5\n").require_known(allowed));
  CHECK_THROWS_WITH_AS(
      io::Config::parse_string("[market]\nbogus = 1\n").require_known(allowed),
      "line 2: unknown key 'bogus' in [market]", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::Config::parse_string("[nonsense]\nx = 1\n").require_known(allowed),
      "line 2: unknown section '[nonsense]'", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::Config::parse_string("top_level = 1\n").require_known(allowed),
      "line 1: unknown section '[]'", ConfigError);
}

TEST_CASE("load_market_spec reads every key and validates its enums") {
  const io::Config cfg = io::Config::parse_string(
      "[market]\n"
      "mode = betting\n"
      "mean_r = 0.52\nmean_m = 0.51\nmean_t = 0.49\n"
      "var_r = 0.06\nvar_m = 0.05\nvar_t = 0.04\n"
      "corr_tm = 0.9\ncorr_tr = 0.85\ncorr_rm = 0.95\n"
      "margin = 0.02\n"
      "copula_calibration = direct\n");
  const market::MarketSpec s = io::load_market_spec(cfg);
  CHECK(s.mode == market::Mode::betting);
  CHECK(s.mean_r == doctest::Approx(0.52));
  CHECK(s.mean_m == doctest::Approx(0.51));
  CHECK(s.mean_t == doctest::Approx(0.49));
  CHECK(s.var_r == doctest::Approx(0.06));
  CHECK(s.var_m == doctest::Approx(0.05));
  CHECK(s.var_t == doctest::Approx(0.04));
  CHECK(s.corr_tm == doctest::Approx(0.9));
  CHECK(s.corr_tr == doctest::Approx(0.85));
  CHECK(s.corr_rm == doctest::Approx(0.95));
  CHECK(s.margin == doctest::Approx(0.02));
  CHECK(s.calibration == market::CopulaCalibration::direct);

  CHECK_THROWS_WITH_AS(
      io::load_market_spec(io::Config::parse_string("[market]\nmode = swap\n")),
      "line 2: mode must be 'betting' or 'stock', got 'swap'", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::load_market_spec(io::Config::parse_string("[market]\ncopula_calibration = magic\n")),
      "line 2: copula_calibration must be 'matched' or 'direct', got 'magic'", ConfigError);
}

TEST_CASE("load_grid resolves strategies with sensible precedence") {
  // no strategy configuration at all: the sharpe/unif pair
  const sim::ExperimentGrid bare = io::load_grid(io::Config::parse_string(""));
  REQUIRE(bare.strats.size() == 2);
  CHECK(bare.strats[0].kind == strategies::StrategyKind::sharpe);
  CHECK(bare.strats[1].kind == strategies::StrategyKind::unif);
  CHECK(bare.rounds == 10000);
  CHECK(bare.bets_per_round == 30);

  // a [strategy] section alone selects a single strategy
  const sim::ExperimentGrid single = io::load_grid(io::Config::parse_string(
      "[strategy]\nstrategy = fractional_kelly\nkelly_fraction = 0.25\n"));
  REQUIRE(single.strats.size() == 1);
  CHECK(single.strats[0].kind == strategies::StrategyKind::fractional_kelly);
  CHECK(single.strats[0].kelly_fraction == doctest::Approx(0.25));

  // [grid] strategies wins over [strategy] strategy; [strategy] scalars act
  // as global defaults and [strategy.<kind>] entries override per kind
  const sim::ExperimentGrid both = io::load_grid(io::Config::parse_string(
      "[grid]\nstrategies = mpt, unif\n"
      "[strategy]\nstrategy = kelly\nrisk_weight = 2.5\n"
      "[strategy.unif]\nunit_stake = 0.01\n"));
  REQUIRE(both.strats.size() == 2);
  CHECK(both.strats[0].kind == strategies::StrategyKind::mpt);
  CHECK(both.strats[0].risk_weight == doctest::Approx(2.5));
  CHECK(both.strats[0].unit_stake == doctest::Approx(0.0));
  CHECK(both.strats[1].kind == strategies::StrategyKind::unif);
  CHECK(both.strats[1].risk_weight == doctest::Approx(2.5));
  CHECK(both.strats[1].unit_stake == doctest::Approx(0.01));

  // unknown kinds are reported against the line that named them
  CHECK_THROWS_AS(io::load_grid(io::Config::parse_string("[grid]\nstrategies = warp\n")),
                  ConfigError);
  try {
    io::load_grid(io::Config::parse_string("[grid]\nstrategies = warp\n"));
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  try {
    io::load_grid(io::Config::parse_string("# pad\n[strategy]\nstrategy = warp\n"));
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }

  CHECK_THROWS_WITH_AS(io::load_grid(io::Config::parse_string("[grid]\nrounds = 0\n")),
                       "line 2: grid.rounds must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_grid(io::Config::parse_string("[grid]\nbets_per_round = 0\n")),
                       "line 2: grid.bets_per_round must be at least 1", ConfigError);
}

TEST_CASE("load_train applies defaults and validates ranges") {
  const learner::TrainConfig dflt = io::load_train(io::Config::parse_string(""));
  CHECK(dflt.gamma == doctest::Approx(0.0));
  CHECK(dflt.variant == learner::LossVariant::market_distance);
  CHECK(dflt.link == learner::Link::logistic);

  const learner::TrainConfig t = io::load_train(io::Config::parse_string(
      "[train]\ngamma = 0.4\nloss = residual_cov\nlink = identity\n"
      "learning_rate = 0.05\nepochs = 7\nbatch_size = 16\nweight_decay = 0.001\n"));
  CHECK(t.gamma == doctest::Approx(0.4));
  CHECK(t.variant == learner::LossVariant::residual_cov);
  CHECK(t.link == learner::Link::identity);
  CHECK(t.learning_rate == doctest::Approx(0.05));
  CHECK(t.epochs == 7);
  CHECK(t.batch_size == 16);
  CHECK(t.weight_decay == doctest::Approx(0.001));

  CHECK_THROWS_WITH_AS(io::load_train(io::Config::parse_string("[train]\ngamma = 1.5\n")),
                       "line 2: train.gamma must lie in [0, 1]", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_train(io::Config::parse_string("[train]\nlearning_rate = 0\n")),
                       "line 2: train.learning_rate must be positive", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_train(io::Config::parse_string("[train]\nepochs = 0\n")),
                       "line 2: train.epochs must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_train(io::Config::parse_string("[train]\nbatch_size = 0\n")),
                       "line 2: train.batch_size must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_train(io::Config::parse_string("[train]\nweight_decay = -1\n")),
                       "line 2: train.weight_decay must be nonnegative", ConfigError);
  CHECK_THROWS_AS(io::load_train(io::Config::parse_string("[train]\nloss = huber\n")),
                  ConfigError);
  CHECK_THROWS_AS(io::load_train(io::Config::parse_string("[train]\nlink = probit\n")),
                  ConfigError);
}

TEST_CASE("load_sweep validates its ranges with line numbers") {
  const learner::SweepConfig s = io::load_sweep(io::Config::parse_string(
      "[sweep]\ngammas = 0.0, 0.5, 1.0\ntrain_fraction = 0.6\nbets_per_round = 10\n"
      "margin = 0.02\nreplicates = 3\n[train]\nepochs = 5\n"));
  REQUIRE(s.gammas.size() == 3);
  CHECK(s.gammas[1] == doctest::Approx(0.5));
  CHECK(s.train_fraction == doctest::Approx(0.6));
  CHECK(s.bets_per_round == 10);
  CHECK(s.margin == doctest::Approx(0.02));
  CHECK(s.replicates == 3);
  CHECK(s.train.epochs == 5);

  CHECK_THROWS_WITH_AS(io::load_sweep(io::Config::parse_string("[sweep]\ngammas = 0.5, 1.5\n")),
                       "line 2: sweep.gammas entries must lie in [0, 1], got 1.5", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::load_sweep(io::Config::parse_string("[sweep]\ntrain_fraction = 1\n")),
      "line 2: sweep.train_fraction must lie in (0, 1)", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_sweep(io::Config::parse_string("[sweep]\nmargin = 0.6\n")),
                       "line 2: sweep.margin must lie in [0, 0.5)", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_sweep(io::Config::parse_string("[sweep]\nbets_per_round = 0\n")),
                       "line 2: sweep.bets_per_round must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(io::load_sweep(io::Config::parse_string("[sweep]\nreplicates = 0\n")),
                       "line 2: sweep.replicates must be at least 1", ConfigError);
}

TEST_CASE("load_synth validates its ranges with line numbers") {
  const sim::SynthParams p = io::load_synth(io::Config::parse_string(
      "[synthetic]\nsamples = 2000\nfeature_dim = 3\ntrader_noise = 1.5\n"
      "bookmaker_noise = 0.3\nmarket_view_noise = 0.2\nmarket_bias = 0.9\n"
      "mean_r = 0.45\nvar_r = 0.05\n"));
  CHECK(p.samples == 2000);
  CHECK(p.feature_dim == 3);
  CHECK(p.trader_noise == doctest::Approx(1.5));
  CHECK(p.bookmaker_noise == doctest::Approx(0.3));
  CHECK(p.market_view_noise == doctest::Approx(0.2));
  CHECK(p.market_bias == doctest::Approx(0.9));
  CHECK(p.mean_r == doctest::Approx(0.45));
  CHECK(p.var_r == doctest::Approx(0.05));

  CHECK_THROWS_WITH_AS(io::load_synth(io::Config::parse_string("[synthetic]\nsamples = 0\n")),
                       "line 2: synthetic.samples must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::load_synth(io::Config::parse_string("[synthetic]\nfeature_dim = 0\n")),
      "line 2: synthetic.feature_dim must be at least 1", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::load_synth(io::Config::parse_string("[synthetic]\nmarket_bias = 0\n")),
      "line 2: synthetic.market_bias must be positive", ConfigError);
  CHECK_THROWS_WITH_AS(
      io::load_synth(io::Config::parse_string("[synthetic]\ntrader_noise = -0.1\n")),
      "line 2: synthetic.trader_noise must be nonnegative", ConfigError);
}

TEST_CASE("config key docs and the allowed-key table agree") {
  const auto& docs = io::config_key_docs();
  const auto allowed = io::allowed_config_keys();

  std::size_t allowed_total = 0;
  for (const auto& [section, keys] : allowed) allowed_total += keys.size();
  CHECK(docs.size() == allowed_total);

  std::vector<std::string> seen;
  for (const auto& d : docs) {
    CHECK_FALSE(d.section.empty());
    CHECK_FALSE(d.key.empty());
    CHECK_FALSE(d.doc.empty());
    const std::string full = d.section + "." + d.key;
    CHECK(std::find(seen.begin(), seen.end(), full) == seen.end());
    seen.push_back(full);
    const auto it = allowed.find(d.section);
    REQUIRE(it != allowed.end());
    CHECK(std::find(it->second.begin(), it->second.end(), d.key) != it->second.end());
  }

  // every strategy kind gets its per-kind override section
  for (const char* kind : {"unif", "mpt", "sharpe", "kelly", "fractional_kelly"}) {
    CHECK(allowed.count(std::string("strategy.") + kind) == 1);
  }
}

TEST_CASE("shipped config files parse clean and load") {
  const fs::path root = source_dir();
  const auto allowed = io::allowed_config_keys();

  const io::Config grid_cfg =
      io::Config::parse_file((root / "configs/correlation_grid.cfg").string());
  CHECK_NOTHROW(grid_cfg.require_known(allowed));
  const sim::ExperimentGrid grid = io::load_grid(grid_cfg);
  CHECK_NOTHROW(grid.base.validate());
  CHECK(grid.rounds == 10000);
  CHECK(grid.bets_per_round == 30);
  REQUIRE(grid.corr_tr.size() == 3);
  REQUIRE(grid.strats.size() == 2);
  CHECK(grid.strats[0].kind == strategies::StrategyKind::sharpe);
  CHECK(grid.strats[1].kind == strategies::StrategyKind::unif);

  const io::Config synth = io::Config::parse_file((root / "configs/synthetic.cfg").string());
  CHECK_NOTHROW(synth.require_known(allowed));
  const learner::SweepConfig sweep = io::load_sweep(synth);
  CHECK(sweep.gammas.size() == 6);
  CHECK(sweep.margin > 0.0);
  const sim::SynthParams params = io::load_synth(synth);
  CHECK(params.samples >= 1000);
  CHECK(params.feature_dim >= 2);
}

TEST_CASE("manifest json is sorted, hashed and written next to the CSV") {
  io::RunManifest m;
  m.tool_version = "1.0.0";
  m.subcommand = "sample";
  m.seed = 42;
  m.config_snapshot = "[market]\nmean_r = 0.5\n";
  m.outputs = {"a.csv"};

  const std::string json = io::manifest_json(m);
  const std::size_t p_config = json.find("\"config\"");
  const std::size_t p_outputs = json.find("\"outputs\"");
  const std::size_t p_seed = json.find("\"seed\"");
  const std::size_t p_sub = json.find("\"subcommand\"");
  const std::size_t p_version = json.find("\"version\"");
  REQUIRE(p_config != std::string::npos);
  CHECK(p_config < p_outputs);
  CHECK(p_outputs < p_seed);
  CHECK(p_seed < p_sub);
  CHECK(p_sub < p_version);
  CHECK(contains(json, "\"seed\": 42"));
  CHECK(contains(json, "\"subcommand\": \"sample\""));

  const std::string hash = io::manifest_hash(m);
  REQUIRE(hash.size() == 16);
  for (char c : hash) {
    CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
  }
  CHECK(io::manifest_hash(m) == hash);  // deterministic
  io::RunManifest other = m;
  other.seed = 43;
  CHECK(io::manifest_hash(other) != hash);

  const fs::path csv = scratch_dir() / "manifest_probe.csv";
  io::write_manifest_file(m, csv.string());
  const fs::path side = scratch_dir() / "manifest_probe.csv.manifest.json";
  REQUIRE(fs::exists(side));
  CHECK(slurp(side) == json + "\n");
}

TEST_CASE("numeric formatting is locale-free and canonicalizes negative zero") {
  CHECK(io::fmt_sig(0.1) == "0.1");
  CHECK(io::fmt_sig(1.0 / 3.0, 4) == "0.3333");
  CHECK(io::fmt_sig(-2.5) == "-2.5");
  CHECK(io::fmt_sig(1234567.0, 3) == "1.23e+06");
  CHECK(io::fmt_fixed(1.0, 2) == "1.00");
  CHECK(io::fmt_fixed(2.345, 2) == "2.35");
  CHECK(io::fmt_fixed(-1.23456, 3) == "-1.235");
  CHECK(io::fmt_fixed(-0.0001, 2) == "0.00");
  CHECK(io::fmt_fixed(-0.0, 6) == "0.000000");
  CHECK(io::fmt_fixed(0.0, 2) == "0.00");
}

TEST_CASE("dataset reader accepts betting CSVs and reports bad rows") {
  std::istringstream good(
      "y,m,x1,x2\n"
      "1,0.6,0.5,-0.25\n"
      "\n"
      "0, 0.4 , -1.5 , 2\n");
  const io::Dataset ds = io::read_dataset_csv(good);
  CHECK(ds.mode == market::Mode::betting);
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.samples[0].outcome == doctest::Approx(1.0));
  CHECK(ds.samples[0].market == doctest::Approx(0.6));
  REQUIRE(ds.samples[0].features.size() == 2);
  CHECK(ds.samples[0].features[1] == doctest::Approx(-0.25));
  CHECK(ds.samples[1].outcome == doctest::Approx(0.0));
  CHECK(ds.samples[1].features[0] == doctest::Approx(-1.5));

  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return io::read_dataset_csv(in);
  };
  CHECK_THROWS_WITH_AS(read(""), "line 1: dataset is empty", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m\n1,0.5\n"),
                       "line 1: dataset header needs at least 'y,m,x1' or 'r,m,x1'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(read("q,m,x1\n1,0.5,0\n"),
                       "line 1: dataset header must start with 'y' (betting) or 'r' (stock), "
                       "got 'q'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(read("y,p,x1\n1,0.5,0\n"),
                       "line 1: second dataset column must be 'm', got 'p'", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,z1\n1,0.5,0\n"),
                       "line 1: expected column 'x1', got 'z1'", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,x1\n1,0.5\n"),
                       "line 2: expected 3 fields, got 2", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,x1\n1,0.5,0\n2,0.5,0\n"),
                       "line 3: betting outcome must be 0 or 1, got '2'", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,x1\n1,1.2,0\n"),
                       "line 2: betting market probability must lie in (0, 1), got '1.2'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,x1\n1,0.5,zap\n"),
                       "line 2: value 'zap' for column 'x1' is not a number", ConfigError);
  CHECK_THROWS_WITH_AS(read("y,m,x1\n"), "line 1: dataset has a header but no rows",
                       ConfigError);
  CHECK_THROWS_AS(io::read_dataset_file("/definitely/not/there.csv"), ConfigError);
}

TEST_CASE("dataset reader detects stock mode from the header") {
  std::istringstream good("r,m,x1\n1.2,1.1,0.3\n0.8,0.9,-0.2\n");
  const io::Dataset ds = io::read_dataset_csv(good);
  CHECK(ds.mode == market::Mode::stock);
  REQUIRE(ds.samples.size() == 2);
  CHECK(ds.samples[1].outcome == doctest::Approx(0.8));

  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return io::read_dataset_csv(in);
  };
  CHECK_THROWS_WITH_AS(read("r,m,x1\n-1,1.1,0\n"),
                       "line 2: stock settlement must be positive, got '-1'", ConfigError);
  CHECK_THROWS_WITH_AS(read("r,m,x1\n1.2,0,0\n"),
                       "line 2: stock price must be positive, got '0'", ConfigError);
}

TEST_CASE("cli: examples audit passes and prints stable output") {
  const RunResult first = run_cli("examples");
  CHECK(first.exit_code == 0);
  CHECK(contains(first.out, "[PASS]"));
  CHECK_FALSE(contains(first.out, "[FAIL]"));
  const RunResult second = run_cli("examples");
  CHECK(second.out == first.out);
}

TEST_CASE("cli: sample writes manifest-bound CSVs deterministically") {
  // the manifest records the output path, so reruns must target the same file
  const fs::path out = scratch_dir() / "sample_run.csv";
  const fs::path side = scratch_dir() / "sample_run.csv.manifest.json";

  const RunResult ra = run_cli("sample --count 50 --seed 7 --out \"" + out.string() + "\"");
  REQUIRE(ra.exit_code == 0);
  const std::string text_a = slurp(out);
  REQUIRE(fs::exists(side));
  const std::string manifest_a = slurp(side);

  const RunResult rb = run_cli("sample --count 50 --seed 7 --out \"" + out.string() + "\"");
  REQUIRE(rb.exit_code == 0);
  CHECK(slurp(out) == text_a);
  CHECK(slurp(side) == manifest_a);

  const RunResult rc = run_cli("sample --count 50 --seed 8 --out \"" + out.string() + "\"");
  REQUIRE(rc.exit_code == 0);
  CHECK(slurp(out) != text_a);

  CHECK(text_a.rfind("# manifest: ", 0) == 0);
  CHECK(contains(text_a, "id,r,m,t\n"));

  const std::string manifest = manifest_a;
  CHECK(contains(manifest, "\"subcommand\": \"sample\""));
  CHECK(contains(manifest, "\"seed\": 7"));
  // the CSV header carries the hash of exactly this manifest
  const std::string first_line = text_a.substr(0, text_a.find('\n'));
  const std::string hash = first_line.substr(std::string("# manifest: ").size());
  CHECK(hash.size() == 16);

  // stdout emission is deterministic too
  const RunResult s1 = run_cli("sample --count 20 --seed 3");
  const RunResult s2 = run_cli("sample --count 20 --seed 3");
  CHECK(s1.exit_code == 0);
  CHECK(s1.out == s2.out);
  CHECK(s1.out.rfind("# manifest: ", 0) == 0);
}

TEST_CASE("cli: simulate output is identical across thread counts") {
  const fs::path cfg = scratch_dir() / "small_grid.cfg";
  spit(cfg, "[grid]\nrounds = 40\nbets_per_round = 6\n");
  const fs::path out = scratch_dir() / "sim_probe.csv";
  const fs::path side = scratch_dir() / "sim_probe.csv.manifest.json";

  const RunResult r1 = run_cli("simulate --config \"" + cfg.string() +
                               "\" --seed 5 --threads 1 --out \"" + out.string() + "\"");
  REQUIRE(r1.exit_code == 0);
  const std::string csv1 = slurp(out);
  const std::string manifest1 = slurp(side);

  const RunResult r3 = run_cli("simulate --config \"" + cfg.string() +
                               "\" --seed 5 --threads 3 --out \"" + out.string() + "\"");
  REQUIRE(r3.exit_code == 0);
  CHECK(slurp(out) == csv1);
  // manifests ignore the thread count, so the side file is unchanged too
  CHECK(slurp(side) == manifest1);

  CHECK(contains(csv1, "corr_tr,corr_tm,w_sharpe,w_sharpe_se,w_unif,w_unif_se,"
                       "accuracy,consensus,upset,missed,spotted"));
}

TEST_CASE("cli: ordering prints a census summary when writing to a file") {
  const fs::path out = scratch_dir() / "census.csv";
  const RunResult r =
      run_cli("ordering --count 2000 --uniform --seed 11 --out \"" + out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "profitable_fraction = "));
  CHECK(contains(r.out, "ties = "));
  const std::string csv = slurp(out);
  CHECK(contains(csv, "id,r,m,t,ordering,decision,profitable,kelly_tendency\n"));
}

TEST_CASE("cli: train emits a loss trace and a weight summary") {
  const fs::path cfg = scratch_dir() / "train_small.cfg";
  spit(cfg,
       "[synthetic]\nsamples = 400\nfeature_dim = 2\n"
       "[train]\nepochs = 3\nbatch_size = 32\n");
  const fs::path out = scratch_dir() / "train_trace.csv";
  const RunResult r = run_cli("train --config \"" + cfg.string() + "\" --seed 2 --out \"" +
                              out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  CHECK(contains(r.out, "weights ="));
  CHECK(contains(r.out, "final_loss = "));
  const std::string csv = slurp(out);
  CHECK(contains(csv, "epoch,loss\n"));
  CHECK(contains(csv, "\n3,"));  // one row per epoch
}

TEST_CASE("cli: sweep runs on a dataset CSV from disk") {
  const fs::path data = scratch_dir() / "bets.csv";
  std::ostringstream csv;
  csv << "y,m,x1,x2\n";
  for (int i = 0; i < 60; ++i) {
    const double m = 0.25 + 0.5 * ((i * 29) % 60) / 59.0;
    const int y = ((i * 13) % 60) < 30 ? 1 : 0;
    const double x1 = (y == 1 ? 0.8 : -0.8) + 0.1 * ((i % 7) - 3);
    const double x2 = m - 0.5;
    csv << y << ',' << m << ',' << x1 << ',' << x2 << '\n';
  }
  spit(data, csv.str());

  const fs::path cfg = scratch_dir() / "sweep_small.cfg";
  spit(cfg,
       "[sweep]\ngammas = 0.0, 1.0\ntrain_fraction = 0.5\nbets_per_round = 5\n"
       "[train]\nepochs = 3\nbatch_size = 8\nlearning_rate = 0.05\n");
  const fs::path out = scratch_dir() / "sweep_rows.csv";
  const RunResult r = run_cli("sweep --config \"" + cfg.string() + "\" --data \"" +
                              data.string() + "\" --seed 4 --out \"" + out.string() + "\"");
  REQUIRE(r.exit_code == 0);
  const std::string rows = slurp(out);
  CHECK(contains(rows, "gamma,profit_sharpe,profit_sharpe_se,profit_unif,profit_unif_se,"
                       "accuracy,accuracy_se,corr_tm\n"));
  CHECK(contains(rows, "\n0.00,"));
  CHECK(contains(rows, "\n1.00,"));
}

TEST_CASE("cli: error paths use distinct exit codes") {
  const RunResult missing = run_cli("sample --config /definitely/not/there.cfg");
  CHECK(missing.exit_code == 2);
  CHECK(contains(missing.err, "cannot open config file"));

  const fs::path unknown = scratch_dir() / "unknown_key.cfg";
  spit(unknown, "[market]\nbogus = 1\n");
  const RunResult bad_key = run_cli("sample --config \"" + unknown.string() + "\"");
  CHECK(bad_key.exit_code == 2);
  CHECK(contains(bad_key.err, "unknown key 'bogus'"));

  const fs::path infeasible = scratch_dir() / "infeasible.cfg";
  spit(infeasible, "[market]\nvar_r = 0.4\n");
  const RunResult spec = run_cli("sample --config \"" + infeasible.string() + "\"");
  CHECK(spec.exit_code == 3);

  const fs::path bad_gamma = scratch_dir() / "bad_gamma.cfg";
  spit(bad_gamma, "[sweep]\ngammas = 0.5, 1.5\n");
  const RunResult gamma = run_cli("sweep --config \"" + bad_gamma.string() + "\"");
  CHECK(gamma.exit_code == 2);
  CHECK(contains(gamma.err, "must lie in [0, 1]"));

  const fs::path stock = scratch_dir() / "stock.csv";
  spit(stock, "r,m,x1\n1.2,1.1,0.3\n0.8,0.9,-0.2\n");
  const RunResult wrong_mode = run_cli("sweep --data \"" + stock.string() + "\"");
  CHECK(wrong_mode.exit_code == 2);
  CHECK(contains(wrong_mode.err, "needs a betting dataset"));

  const RunResult unknown_cmd = run_cli("frobnicate");
  CHECK(unknown_cmd.exit_code == 2);

  const RunResult version = run_cli("--version");
  CHECK(version.exit_code == 0);
  CHECK(contains(version.out, "marketlab 1.0.0"));
}

TEST_CASE("cli: every documented config key appears in some --help footer") {
  std::string help;
  for (const char* sub : {"sample", "ordering", "simulate", "sweep", "train"}) {
    const RunResult r = run_cli(std::string(sub) + " --help");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "Config keys read by this subcommand:"));
    help += r.out;
  }
  for (const auto& d : io::config_key_docs()) {
    INFO("[" << d.section << "] " << d.key);
    CHECK(contains(help, "[" + d.section + "] " + d.key));
  }
}
