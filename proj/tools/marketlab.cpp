#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marketlab/audit.hpp"
#include "marketlab/errors.hpp"
#include "marketlab/io.hpp"
#include "marketlab/learner.hpp"
#include "marketlab/market.hpp"
#include "marketlab/returns.hpp"
#include "marketlab/rng.hpp"
#include "marketlab/simulator.hpp"

namespace {

using namespace marketlab;

constexpr const char* kVersion = "1.0.0";

struct GlobalArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  int threads = 1;
};

bool section_matches(const std::string& section, const std::vector<std::string>& wanted) {
  for (const std::string& w : wanted) {
    if (w == section) return true;
    if (!w.empty() && w.back() == '*' &&
        section.rfind(w.substr(0, w.size() - 1), 0) == 0) {
      return true;
    }
  }
  return false;
}

std::string footer_for(const std::vector<std::string>& sections) {
  std::ostringstream os;
  os << "Config keys read by this subcommand:\n";
  for (const auto& d : io::config_key_docs()) {
    if (section_matches(d.section, sections)) {
      os << "  [" << d.section << "] " << d.key << " -- " << d.doc << "\n";
    }
  }
  return os.str();
}

bool has_section(const io::Config& cfg, const std::string& section) {
  const std::string prefix = section + ".";
  for (const auto& [key, entry] : cfg.entries()) {
    (void)entry;
    if (key.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

/// Writes one CSV through `writer` to --out (plus a .manifest.json side
/// file) or to stdout, binding it to the run manifest hash either way.
void emit_csv(const GlobalArgs& g, io::RunManifest manifest,
              const std::function<void(std::ostream&, const std::string&)>& writer) {
  if (g.out_path.empty()) {
    const std::string hash = io::manifest_hash(manifest);
    writer(std::cout, hash);
    return;
  }
  manifest.outputs.push_back(g.out_path);
  const std::string hash = io::manifest_hash(manifest);
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file '" + g.out_path + "'");
  writer(out, hash);
  io::write_manifest_file(manifest, g.out_path);
}

io::RunManifest manifest_for(const GlobalArgs& g, const std::string& subcommand,
                             const io::Config* cfg) {
  io::RunManifest m;
  m.tool_version = kVersion;
  m.subcommand = subcommand;
  m.seed = g.seed;
  if (cfg != nullptr) m.config_snapshot = cfg->snapshot();
  return m;
}

std::vector<market::EstimateTriple> draw_triples(const GlobalArgs& g, const io::Config* cfg,
                                                 bool force_uniform, int count,
                                                 std::uint64_t tag) {
  const std::uint64_t seed = rng::derive(g.seed, tag);
  const std::size_t n = static_cast<std::size_t>(count);
  if (cfg != nullptr && has_section(*cfg, "market") && !force_uniform) {
    market::MarketSpec spec = io::load_market_spec(*cfg);
    spec.validate();
    return market::sample_correlated(spec, n, seed);
  }
  return market::sample_uniform(n, seed);
}

int cmd_sample(const GlobalArgs& g, const io::Config* cfg, bool force_uniform, int count) {
  const auto triples = draw_triples(g, cfg, force_uniform, count, rng::kTagSample);
  emit_csv(g, manifest_for(g, "sample", cfg),
           [&](std::ostream& os, const std::string& hash) {
             io::write_samples_csv(os, triples, hash);
           });
  return 0;
}

int cmd_ordering(const GlobalArgs& g, const io::Config* cfg, bool force_uniform, int count) {
  const auto triples = draw_triples(g, cfg, force_uniform, count, rng::kTagOrdering);
  emit_csv(g, manifest_for(g, "ordering", cfg),
           [&](std::ostream& os, const std::string& hash) {
             io::write_classification_csv(os, triples, hash);
           });
  if (!g.out_path.empty()) {
    const sim::CensusResult census = sim::ordering_census(triples);
    for (std::size_t i = 0; i < census.ordering_freq.size(); ++i) {
      std::cout << "ordering " << returns::to_string(static_cast<returns::Ordering>(i)) << " = "
                << io::fmt_fixed(census.ordering_freq[i], 6) << "\n";
    }
    std::cout << "ties = " << io::fmt_fixed(census.tie_freq, 6) << "\n";
    std::cout << "profitable_fraction = " << io::fmt_fixed(census.profitable_fraction, 6)
              << "\n";
  }
  return 0;
}

int cmd_simulate(const GlobalArgs& g, const io::Config* cfg, int rounds_override,
                 int bets_override) {
  io::Config empty;
  const io::Config& c = cfg != nullptr ? *cfg : empty;
  sim::ExperimentGrid grid = io::load_grid(c);
  grid.threads = g.threads;
  if (rounds_override > 0) grid.rounds = rounds_override;
  if (bets_override > 0) grid.bets_per_round = bets_override;
  grid.base.validate();
  const auto cells = sim::run_experiment(grid, rng::derive(g.seed, rng::kTagSimulate));
  emit_csv(g, manifest_for(g, "simulate", cfg),
           [&](std::ostream& os, const std::string& hash) {
             io::write_experiment_csv(os, cells, grid.strats, hash);
           });
  return 0;
}

std::vector<learner::LabeledSample> load_samples(const GlobalArgs& g, const io::Config& cfg,
                                                 const std::string& data,
                                                 const char* subcommand) {
  if (data == "synthetic") {
    const sim::SynthParams params = io::load_synth(cfg);
    return sim::synth_market_for_learner(params, rng::derive(g.seed, rng::kTagSynthetic))
        .samples;
  }
  io::Dataset ds = io::read_dataset_file(data);
  if (ds.mode != market::Mode::betting) {
    throw ConfigError(std::string(subcommand) +
                      " needs a betting dataset (header y,m,x1,...); got a stock dataset");
  }
  return std::move(ds.samples);
}

int cmd_sweep(const GlobalArgs& g, const io::Config* cfg, const std::string& data) {
  io::Config empty;
  const io::Config& c = cfg != nullptr ? *cfg : empty;
  learner::SweepConfig sc = io::load_sweep(c);
  sc.seed = rng::derive(g.seed, rng::kTagSweep);
  const auto samples = load_samples(g, c, data, "sweep");
  const auto rows = learner::gamma_sweep(samples, sc);
  emit_csv(g, manifest_for(g, "sweep", cfg),
           [&](std::ostream& os, const std::string& hash) {
             io::write_sweep_csv(os, rows, hash);
           });
  return 0;
}

int cmd_train(const GlobalArgs& g, const io::Config* cfg, const std::string& data) {
  io::Config empty;
  const io::Config& c = cfg != nullptr ? *cfg : empty;
  learner::TrainConfig tc = io::load_train(c);
  tc.seed = rng::derive(g.seed, rng::kTagTrain);
  const auto samples = load_samples(g, c, data, "train");
  const learner::TrainResult res = learner::train(samples, tc);
  emit_csv(g, manifest_for(g, "train", cfg),
           [&](std::ostream& os, const std::string& hash) {
             os << "# manifest: " << hash << "\n";
             os << "epoch,loss\n";
             for (std::size_t e = 0; e < res.epoch_loss.size(); ++e) {
               os << (e + 1) << ',' << io::fmt_sig(res.epoch_loss[e]) << '\n';
             }
           });
  if (!g.out_path.empty()) {
    std::cout << "samples = " << samples.size() << "\n";
    std::cout << "final_loss = " << io::fmt_sig(res.epoch_loss.back()) << "\n";
    std::cout << "negative_loss_epochs = " << res.negative_loss_epochs << "\n";
    std::cout << "weights =";
    for (double w : res.model.weights) std::cout << ' ' << io::fmt_sig(w);
    std::cout << "\n";
  }
  return 0;
}

int cmd_examples() {
  const auto checks = audit::worked_examples();
  std::cout << audit::render_report(checks);
  return audit::all_pass(checks) ? 0 : 1;
}

int run(int argc, char** argv) {
  CLI::App app{"market simulation and strategy evaluation toolkit"};
  app.set_version_flag("--version", std::string("marketlab ") + kVersion);
  app.require_subcommand(1);
  app.footer(
      "Config files are line-oriented 'key = value' text with [section] headers\n"
      "and '#' comments; each subcommand's --help lists the keys it reads.");

  GlobalArgs g;
  app.add_option("--config", g.config_path, "path to a key = value config file");
  app.add_option("--seed", g.seed, "master random seed")->capture_default_str();
  app.add_option("--out", g.out_path, "output CSV path (stdout when omitted)");
  app.add_option("--threads", g.threads, "worker threads for simulate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  int count = 1000;
  bool force_uniform = false;
  int rounds_override = 0;
  int bets_override = 0;
  std::string data = "synthetic";

  auto* sample = app.add_subcommand("sample", "draw (r, m, t) triples and emit them as CSV");
  sample->add_option("--count", count, "number of triples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_flag("--uniform", force_uniform,
                   "draw from the uniform cube even when [market] is configured");
  sample->footer(footer_for({"market"}));

  auto* ordering = app.add_subcommand(
      "ordering", "classify drawn triples by ordering, decision and profitability");
  ordering->add_option("--count", count, "number of triples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  ordering->add_flag("--uniform", force_uniform,
                     "draw from the uniform cube even when [market] is configured");
  ordering->footer(footer_for({"market"}));

  auto* simulate = app.add_subcommand(
      "simulate", "run the correlation-grid Monte Carlo experiment and emit its CSV");
  simulate->add_option("--rounds", rounds_override, "override [grid] rounds")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--bets", bets_override, "override [grid] bets_per_round")
      ->check(CLI::PositiveNumber);
  simulate->footer(footer_for({"market", "grid", "strategy", "strategy.*"}));

  auto* sweep = app.add_subcommand(
      "sweep", "train across decorrelation weights and emit the sweep CSV");
  sweep->add_option("--data", data,
                    "dataset CSV path, or 'synthetic' for the generated market")
      ->capture_default_str();
  sweep->footer(footer_for({"sweep", "train", "synthetic"}));

  auto* train = app.add_subcommand("train", "train one estimator and emit its loss trace");
  train->add_option("--data", data,
                    "dataset CSV path, or 'synthetic' for the generated market")
      ->capture_default_str();
  train->footer(footer_for({"train", "synthetic"}));

  auto* examples =
      app.add_subcommand("examples", "recompute the built-in worked examples and audit them");

  for (CLI::App* sub : {sample, ordering, simulate, sweep, train, examples}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  io::Config cfg;
  const io::Config* cfg_ptr = nullptr;
  if (!g.config_path.empty()) {
    cfg = io::Config::parse_file(g.config_path);
    cfg.require_known(io::allowed_config_keys());
    cfg_ptr = &cfg;
  }

  if (app.got_subcommand(sample)) return cmd_sample(g, cfg_ptr, force_uniform, count);
  if (app.got_subcommand(ordering)) return cmd_ordering(g, cfg_ptr, force_uniform, count);
  if (app.got_subcommand(simulate)) return cmd_simulate(g, cfg_ptr, rounds_override, bets_override);
  if (app.got_subcommand(sweep)) return cmd_sweep(g, cfg_ptr, data);
  if (app.got_subcommand(train)) return cmd_train(g, cfg_ptr, data);
  return cmd_examples();
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InfeasibleSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
