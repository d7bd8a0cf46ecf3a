#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "marketlab/learner.hpp"
#include "marketlab/market.hpp"
#include "marketlab/metrics.hpp"
#include "marketlab/simulator.hpp"
#include "marketlab/strategies.hpp"

namespace marketlab::io {

/// Line-oriented `key = value` config with `[section]` headers and `#`
/// comments. Parsing and the typed getters throw ConfigError with the
/// offending 1-based line number.
class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  int line_of(const std::string& section, const std::string& key) const;  // 0 if absent

  // Getters return `def` when the key is absent.
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& def) const;
  double get_double(const std::string& section, const std::string& key, double def) const;
  int get_int(const std::string& section, const std::string& key, int def) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t def) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                      const std::vector<double>& def) const;
  std::vector<std::string> get_string_list(const std::string& section, const std::string& key,
                                           const std::vector<std::string>& def) const;

  /// Throws ConfigError on the first key that is not in the allowed table
  /// (section name -> allowed key names).
  void require_known(const std::map<std::string, std::vector<std::string>>& allowed) const;

  const std::string& snapshot() const { return text_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::string text_;
  std::map<std::string, Entry> entries_;  // "section.key" -> entry
};

// Section loaders. Absent keys keep the defaults of the returned struct;
// semantic validation (moment feasibility, ...) stays with the structs.
market::MarketSpec load_market_spec(const Config& cfg);
strategies::StrategyConfig load_strategy(const Config& cfg,
                                         const std::string& section = "strategy");
sim::ExperimentGrid load_grid(const Config& cfg);
learner::TrainConfig load_train(const Config& cfg);
learner::SweepConfig load_sweep(const Config& cfg);
sim::SynthParams load_synth(const Config& cfg);

/// Documentation row for one recognized config key; the same table backs
/// `--help` text and unknown-key validation.
struct ConfigKeyDoc {
  std::string section;
  std::string key;
  std::string doc;
};
const std::vector<ConfigKeyDoc>& config_key_docs();
std::map<std::string, std::vector<std::string>> allowed_config_keys();

/// Provenance of one tool invocation. Serialized as JSON with sorted keys;
/// its FNV-1a 64 hash binds every emitted CSV (`# manifest: <hash>` header
/// line) to the run. Thread count is deliberately excluded: outputs are
/// byte-identical across --threads.
struct RunManifest {
  std::string tool_version;
  std::string subcommand;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);
std::string manifest_hash(const RunManifest& m);  // 16 lowercase hex digits
void write_manifest_file(const RunManifest& m, const std::string& csv_path);

// Fixed-format numeric rendering (diffable outputs; no locale, no negative
// zero).
std::string fmt_sig(double v, int digits = 12);
std::string fmt_fixed(double v, int decimals);

void write_samples_csv(std::ostream& os, const std::vector<market::EstimateTriple>& triples,
                       const std::string& hash);
void write_classification_csv(std::ostream& os,
                              const std::vector<market::EstimateTriple>& triples,
                              const std::string& hash);
void write_experiment_csv(std::ostream& os, const std::vector<sim::ExperimentCell>& cells,
                          const std::vector<strategies::StrategyConfig>& strats,
                          const std::string& hash);
void write_sweep_csv(std::ostream& os, const std::vector<learner::SweepRow>& rows,
                     const std::string& hash);
void write_calibration_csv(std::ostream& os, const std::vector<metrics::CalibrationBin>& bins,
                           const std::string& hash);

/// Labeled dataset parsed from CSV with header `y,m,x1,...,xk` (betting
/// outcomes in {0,1}) or `r,m,x1,...,xk` (stock settlements). Throws
/// ConfigError carrying the offending line number.
struct Dataset {
  market::Mode mode = market::Mode::betting;
  std::vector<learner::LabeledSample> samples;
};
Dataset read_dataset_csv(std::istream& is);
Dataset read_dataset_file(const std::string& path);

}  // namespace marketlab::io
