#include "marketlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "marketlab/errors.hpp"
#include "marketlab/returns.hpp"

namespace marketlab::io {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool valid_key_chars(const std::string& s, bool allow_dot) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
                    (allow_dot && c == '.');
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (value.find(',') != std::string::npos) {
    std::size_t pos = 0;
    while (pos <= value.size()) {
      const std::size_t next = value.find(',', pos);
      const std::string tok =
          trim(next == std::string::npos ? value.substr(pos) : value.substr(pos, next - pos));
      out.push_back(tok);
      if (next == std::string::npos) break;
      pos = next + 1;
    }
  } else {
    std::istringstream iss(value);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
  }
  return out;
}

bool parse_double_token(const std::string& tok, double& out) {
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

double need_double(const std::string& tok, const std::string& what, int line) {
  double v = 0.0;
  if (!parse_double_token(tok, v)) {
    throw ConfigError("value '" + tok + "' for " + what + " is not a number", line);
  }
  return v;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  cfg.text_ = text;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string section;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key_chars(section, true)) {
        throw ConfigError("invalid section name '" + section + "'", line_no);
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key_chars(key, false)) throw ConfigError("invalid key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    const auto ins = cfg.entries_.emplace(full, Entry{value, line_no});
    if (!ins.second) {
      throw ConfigError("duplicate key '" + key + "' (first at line " +
                            std::to_string(ins.first->second.line) + ")",
                        line_no);
    }
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  return entries_.count(section.empty() ? key : section + "." + key) > 0;
}

int Config::line_of(const std::string& section, const std::string& key) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  return it == entries_.end() ? 0 : it->second.line;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  return it == entries_.end() ? def : it->second.value;
}

double Config::get_double(const std::string& section, const std::string& key, double def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  if (it == entries_.end()) return def;
  return need_double(it->second.value, section + "." + key, it->second.line);
}

int Config::get_int(const std::string& section, const std::string& key, int def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  if (it == entries_.end()) return def;
  const std::string& tok = it->second.value;
  int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ConfigError("value '" + tok + "' for " + section + "." + key + " is not an integer",
                      it->second.line);
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  if (it == entries_.end()) return def;
  const std::string& tok = it->second.value;
  std::uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw ConfigError(
        "value '" + tok + "' for " + section + "." + key + " is not an unsigned integer",
        it->second.line);
  }
  return v;
}

std::vector<double> Config::get_double_list(const std::string& section, const std::string& key,
                                            const std::vector<double>& def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  if (it == entries_.end()) return def;
  const std::vector<std::string> toks = split_list(it->second.value);
  if (toks.empty()) {
    throw ConfigError("empty list for " + section + "." + key, it->second.line);
  }
  std::vector<double> out;
  out.reserve(toks.size());
  for (const std::string& t : toks) {
    out.push_back(need_double(t, section + "." + key, it->second.line));
  }
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& section,
                                                 const std::string& key,
                                                 const std::vector<std::string>& def) const {
  const auto it = entries_.find(section.empty() ? key : section + "." + key);
  if (it == entries_.end()) return def;
  const std::vector<std::string> toks = split_list(it->second.value);
  if (toks.empty() || std::any_of(toks.begin(), toks.end(),
                                  [](const std::string& t) { return t.empty(); })) {
    throw ConfigError("malformed list for " + section + "." + key, it->second.line);
  }
  return toks;
}

void Config::require_known(const std::map<std::string, std::vector<std::string>>& allowed) const {
  for (const auto& [full, entry] : entries_) {
    const std::size_t dot = full.rfind('.');
    const std::string section = dot == std::string::npos ? "" : full.substr(0, dot);
    const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    const auto it = allowed.find(section);
    if (it == allowed.end()) {
      throw ConfigError("unknown section '[" + section + "]'", entry.line);
    }
    if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
      throw ConfigError("unknown key '" + key + "' in [" + section + "]", entry.line);
    }
  }
}

namespace {

// Maps enum-valued keys, rethrowing the module's invalid_argument as a
// line-numbered ConfigError.
template <typename F>
auto enum_key(const Config& cfg, const std::string& section, const std::string& key,
              const std::string& def, F&& from) {
  const std::string name = cfg.get_string(section, key, def);
  try {
    return from(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), cfg.line_of(section, key));
  }
}

void check_range(const Config& cfg, const std::string& section, const std::string& key,
                 bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(section + "." + key + " " + msg, cfg.line_of(section, key));
}

void apply_strategy_scalars(const Config& cfg, const std::string& section,
                            strategies::StrategyConfig& c) {
  c.unit_stake = cfg.get_double(section, "unit_stake", c.unit_stake);
  c.risk_weight = cfg.get_double(section, "risk_weight", c.risk_weight);
  c.kelly_fraction = cfg.get_double(section, "kelly_fraction", c.kelly_fraction);
  const std::string base = cfg.get_string(section, "log_base", "");
  if (!base.empty()) {
    if (base == "natural") {
      c.log_base = strategies::LogBase::natural;
    } else if (base == "ten") {
      c.log_base = strategies::LogBase::ten;
    } else {
      throw ConfigError("log_base must be 'natural' or 'ten', got '" + base + "'",
                        cfg.line_of(section, "log_base"));
    }
  }
}

}  // namespace

market::MarketSpec load_market_spec(const Config& cfg) {
  market::MarketSpec s;
  const std::string mode = cfg.get_string("market", "mode", "betting");
  if (mode == "betting") {
    s.mode = market::Mode::betting;
  } else if (mode == "stock") {
    s.mode = market::Mode::stock;
  } else {
    throw ConfigError("mode must be 'betting' or 'stock', got '" + mode + "'",
                      cfg.line_of("market", "mode"));
  }
  s.mean_r = cfg.get_double("market", "mean_r", s.mean_r);
  s.mean_m = cfg.get_double("market", "mean_m", s.mean_m);
  s.mean_t = cfg.get_double("market", "mean_t", s.mean_t);
  s.var_r = cfg.get_double("market", "var_r", s.var_r);
  s.var_m = cfg.get_double("market", "var_m", s.var_m);
  s.var_t = cfg.get_double("market", "var_t", s.var_t);
  s.corr_tm = cfg.get_double("market", "corr_tm", s.corr_tm);
  s.corr_tr = cfg.get_double("market", "corr_tr", s.corr_tr);
  s.corr_rm = cfg.get_double("market", "corr_rm", s.corr_rm);
  s.margin = cfg.get_double("market", "margin", s.margin);
  const std::string cal = cfg.get_string("market", "copula_calibration", "matched");
  if (cal == "matched") {
    s.calibration = market::CopulaCalibration::matched;
  } else if (cal == "direct") {
    s.calibration = market::CopulaCalibration::direct;
  } else {
    throw ConfigError("copula_calibration must be 'matched' or 'direct', got '" + cal + "'",
                      cfg.line_of("market", "copula_calibration"));
  }
  return s;
}

strategies::StrategyConfig load_strategy(const Config& cfg, const std::string& section) {
  strategies::StrategyConfig c;
  c.kind = enum_key(cfg, section, "strategy", to_string(c.kind), strategies::strategy_kind_from);
  apply_strategy_scalars(cfg, section, c);
  return c;
}

sim::ExperimentGrid load_grid(const Config& cfg) {
  sim::ExperimentGrid g;
  g.base = load_market_spec(cfg);
  g.corr_tr = cfg.get_double_list("grid", "corr_tr_values", g.corr_tr);
  g.corr_tm = cfg.get_double_list("grid", "corr_tm_values", g.corr_tm);
  g.corr_rm = cfg.get_double_list("grid", "corr_rm_values", g.corr_rm);
  g.rounds = cfg.get_int("grid", "rounds", g.rounds);
  g.bets_per_round = cfg.get_int("grid", "bets_per_round", g.bets_per_round);
  check_range(cfg, "grid", "rounds", g.rounds >= 1, "must be at least 1");
  check_range(cfg, "grid", "bets_per_round", g.bets_per_round >= 1, "must be at least 1");
  // [grid] strategies wins; otherwise a [strategy] section selects a single
  // strategy, and with neither the sharpe/unif pair is evaluated.
  std::vector<std::string> default_names = {"sharpe", "unif"};
  if (cfg.has("strategy", "strategy")) {
    default_names = {cfg.get_string("strategy", "strategy", "sharpe")};
  }
  const std::vector<std::string> names =
      cfg.get_string_list("grid", "strategies", default_names);
  for (const std::string& name : names) {
    strategies::StrategyConfig c;
    try {
      c.kind = strategies::strategy_kind_from(name);
    } catch (const std::invalid_argument& e) {
      const int line = cfg.line_of("grid", "strategies") > 0
                           ? cfg.line_of("grid", "strategies")
                           : cfg.line_of("strategy", "strategy");
      throw ConfigError(e.what(), line);
    }
    apply_strategy_scalars(cfg, "strategy", c);          // global defaults
    apply_strategy_scalars(cfg, "strategy." + name, c);  // per-kind overrides
    g.strats.push_back(c);
  }
  return g;
}

learner::TrainConfig load_train(const Config& cfg) {
  learner::TrainConfig t;
  t.gamma = cfg.get_double("train", "gamma", t.gamma);
  check_range(cfg, "train", "gamma", t.gamma >= 0.0 && t.gamma <= 1.0, "must lie in [0, 1]");
  t.variant = enum_key(cfg, "train", "loss", to_string(t.variant), learner::loss_variant_from);
  t.link = enum_key(cfg, "train", "link", to_string(t.link), learner::link_from);
  t.learning_rate = cfg.get_double("train", "learning_rate", t.learning_rate);
  check_range(cfg, "train", "learning_rate", t.learning_rate > 0.0, "must be positive");
  t.epochs = cfg.get_int("train", "epochs", t.epochs);
  check_range(cfg, "train", "epochs", t.epochs >= 1, "must be at least 1");
  t.batch_size = cfg.get_int("train", "batch_size", t.batch_size);
  check_range(cfg, "train", "batch_size", t.batch_size >= 1, "must be at least 1");
  t.weight_decay = cfg.get_double("train", "weight_decay", t.weight_decay);
  check_range(cfg, "train", "weight_decay", t.weight_decay >= 0.0, "must be nonnegative");
  return t;
}

learner::SweepConfig load_sweep(const Config& cfg) {
  learner::SweepConfig s;
  s.train = load_train(cfg);
  s.gammas = cfg.get_double_list("sweep", "gammas", s.gammas);
  for (double g : s.gammas) {
    check_range(cfg, "sweep", "gammas", g >= 0.0 && g <= 1.0,
                "entries must lie in [0, 1], got " + fmt_sig(g, 6));
  }
  s.train_fraction = cfg.get_double("sweep", "train_fraction", s.train_fraction);
  check_range(cfg, "sweep", "train_fraction",
              s.train_fraction > 0.0 && s.train_fraction < 1.0, "must lie in (0, 1)");
  s.bets_per_round = cfg.get_int("sweep", "bets_per_round", s.bets_per_round);
  check_range(cfg, "sweep", "bets_per_round", s.bets_per_round >= 1, "must be at least 1");
  s.margin = cfg.get_double("sweep", "margin", s.margin);
  check_range(cfg, "sweep", "margin", s.margin >= 0.0 && s.margin < 0.5,
              "must lie in [0, 0.5)");
  s.replicates = cfg.get_int("sweep", "replicates", s.replicates);
  check_range(cfg, "sweep", "replicates", s.replicates >= 1, "must be at least 1");
  return s;
}

sim::SynthParams load_synth(const Config& cfg) {
  sim::SynthParams p;
  p.samples = static_cast<std::size_t>(
      cfg.get_u64("synthetic", "samples", static_cast<std::uint64_t>(p.samples)));
  check_range(cfg, "synthetic", "samples", p.samples >= 1, "must be at least 1");
  p.feature_dim = cfg.get_int("synthetic", "feature_dim", p.feature_dim);
  check_range(cfg, "synthetic", "feature_dim", p.feature_dim >= 1, "must be at least 1");
  p.trader_noise = cfg.get_double("synthetic", "trader_noise", p.trader_noise);
  p.bookmaker_noise = cfg.get_double("synthetic", "bookmaker_noise", p.bookmaker_noise);
  p.market_view_noise = cfg.get_double("synthetic", "market_view_noise", p.market_view_noise);
  p.market_bias = cfg.get_double("synthetic", "market_bias", p.market_bias);
  check_range(cfg, "synthetic", "market_bias", p.market_bias > 0.0, "must be positive");
  check_range(cfg, "synthetic", "trader_noise", p.trader_noise >= 0.0, "must be nonnegative");
  check_range(cfg, "synthetic", "bookmaker_noise", p.bookmaker_noise >= 0.0,
              "must be nonnegative");
  check_range(cfg, "synthetic", "market_view_noise", p.market_view_noise >= 0.0,
              "must be nonnegative");
  p.mean_r = cfg.get_double("synthetic", "mean_r", p.mean_r);
  p.var_r = cfg.get_double("synthetic", "var_r", p.var_r);
  return p;
}

const std::vector<ConfigKeyDoc>& config_key_docs() {
  static const std::vector<ConfigKeyDoc> docs = [] {
    std::vector<ConfigKeyDoc> d = {
        {"market", "mode", "market type: 'betting' (probabilities) or 'stock' (prices)"},
        {"market", "mean_r", "mean of the true value R"},
        {"market", "mean_m", "mean of the market price M"},
        {"market", "mean_t", "mean of the trader estimate T"},
        {"market", "var_r", "variance of R"},
        {"market", "var_m", "variance of M"},
        {"market", "var_t", "variance of T"},
        {"market", "corr_tm", "target correlation between T and M"},
        {"market", "corr_tr", "target correlation between T and R"},
        {"market", "corr_rm", "target correlation between R and M"},
        {"market", "margin", "bookmaker margin added to each side of the quote"},
        {"market", "copula_calibration",
         "'matched' calibrates latent correlations to the targets; 'direct' uses them as-is"},
        {"strategy", "strategy",
         "single strategy to evaluate when [grid] strategies is not set: "
         "unif|mpt|sharpe|kelly|fractional_kelly"},
        {"strategy", "unit_stake", "unif stake per selected bet (0 = 1/bets_per_round)"},
        {"strategy", "risk_weight", "mpt risk-aversion weight gamma"},
        {"strategy", "kelly_fraction", "fraction of the full Kelly stake"},
        {"strategy", "log_base", "growth-rate logarithm base: 'natural' or 'ten'"},
        {"grid", "corr_tr_values", "comma-separated corr_tr grid values"},
        {"grid", "corr_tm_values", "comma-separated corr_tm grid values"},
        {"grid", "corr_rm_values", "comma-separated corr_rm values averaged over"},
        {"grid", "rounds", "Monte Carlo rounds per grid cell"},
        {"grid", "bets_per_round", "simultaneous bets per round"},
        {"grid", "strategies", "comma-separated strategy kinds to evaluate"},
        {"train", "gamma", "decorrelation weight in [0, 1]"},
        {"train", "loss", "augmented-loss variant: 'residual_cov' or 'market_distance'"},
        {"train", "link", "model output link: 'logistic' or 'identity'"},
        {"train", "learning_rate", "gradient-descent step size"},
        {"train", "epochs", "training epochs"},
        {"train", "batch_size", "minibatch size"},
        {"train", "weight_decay", "L2 penalty on non-bias weights"},
        {"sweep", "gammas", "comma-separated decorrelation weights, each in [0, 1]"},
        {"sweep", "train_fraction", "leading fraction of the dataset used for training"},
        {"sweep", "bets_per_round", "bets per backtest round on the held-out tail"},
        {"sweep", "margin", "bookmaker margin applied to the backtest quotes"},
        {"sweep", "replicates", "training replicates per gamma (seeds shared across gammas)"},
        {"synthetic", "samples", "number of synthetic samples"},
        {"synthetic", "feature_dim", "feature count (last feature tracks the market when >= 2)"},
        {"synthetic", "trader_noise", "noise sd on each truth-tracking feature"},
        {"synthetic", "bookmaker_noise", "noise sd on the bookmaker's signal"},
        {"synthetic", "market_view_noise", "extra noise sd on the market-view feature"},
        {"synthetic", "market_bias",
         "quote distortion exponent (1 = fair; < 1 compresses quotes toward 1/2)"},
        {"synthetic", "mean_r", "mean of the synthetic true probability"},
        {"synthetic", "var_r", "variance of the synthetic true probability"},
    };
    for (const char* kind : {"unif", "mpt", "sharpe", "kelly", "fractional_kelly"}) {
      for (const char* key : {"unit_stake", "risk_weight", "kelly_fraction", "log_base"}) {
        d.push_back({std::string("strategy.") + kind, key,
                     std::string("override for the '") + kind + "' grid strategy"});
      }
    }
    return d;
  }();
  return docs;
}

std::map<std::string, std::vector<std::string>> allowed_config_keys() {
  std::map<std::string, std::vector<std::string>> allowed;
  for (const ConfigKeyDoc& d : config_key_docs()) allowed[d.section].push_back(d.key);
  return allowed;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["config"] = m.config_snapshot;
  j["outputs"] = m.outputs;
  j["seed"] = m.seed;
  j["subcommand"] = m.subcommand;
  j["version"] = m.tool_version;
  return j.dump(2);
}

std::string manifest_hash(const RunManifest& m) {
  const std::string body = manifest_json(m);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : body) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void write_manifest_file(const RunManifest& m, const std::string& csv_path) {
  const std::string path = csv_path + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest file '" + path + "'");
  out << manifest_json(m) << "\n";
}

std::string fmt_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return std::string(buf);
}

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  // canonicalize negative zero ("-0.00" -> "0.00")
  if (!s.empty() && s.front() == '-' &&
      s.find_first_not_of("0.", 1) == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

void write_samples_csv(std::ostream& os, const std::vector<market::EstimateTriple>& triples,
                       const std::string& hash) {
  os << "# manifest: " << hash << "\n";
  os << "id,r,m,t\n";
  for (std::size_t i = 0; i < triples.size(); ++i) {
    os << i << ',' << fmt_sig(triples[i].r) << ',' << fmt_sig(triples[i].m) << ','
       << fmt_sig(triples[i].t) << '\n';
  }
}

void write_classification_csv(std::ostream& os,
                              const std::vector<market::EstimateTriple>& triples,
                              const std::string& hash) {
  os << "# manifest: " << hash << "\n";
  os << "id,r,m,t,ordering,decision,profitable,kelly_tendency\n";
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& e = triples[i];
    const returns::OrderingClass c = returns::classify_ordering(e.r, e.m, e.t);
    os << i << ',' << fmt_sig(e.r) << ',' << fmt_sig(e.m) << ',' << fmt_sig(e.t) << ','
       << returns::to_string(c.ordering) << ',' << returns::to_string(c.decision) << ','
       << (c.profitable ? 1 : 0) << ',' << returns::to_string(c.tendency) << '\n';
  }
}

void write_experiment_csv(std::ostream& os, const std::vector<sim::ExperimentCell>& cells,
                          const std::vector<strategies::StrategyConfig>& strats,
                          const std::string& hash) {
  os << "# manifest: " << hash << "\n";
  os << "corr_tr,corr_tm";
  for (const auto& s : strats) {
    const std::string name = strategies::to_string(s.kind);
    os << ",w_" << name << ",w_" << name << "_se";
  }
  os << ",accuracy,consensus,upset,missed,spotted\n";
  for (const auto& cell : cells) {
    if (cell.w_mean.size() != strats.size()) {
      throw std::invalid_argument("experiment cell does not match the strategy list");
    }
    os << fmt_fixed(cell.corr_tr, 2) << ',' << fmt_fixed(cell.corr_tm, 2);
    for (std::size_t s = 0; s < strats.size(); ++s) {
      os << ',' << fmt_fixed(cell.w_mean[s], 2) << ',' << fmt_fixed(cell.w_se[s], 2);
    }
    os << ',' << fmt_fixed(cell.accuracy, 2) << ',' << fmt_fixed(cell.breakdown.consensus, 2)
       << ',' << fmt_fixed(cell.breakdown.upset, 2) << ',' << fmt_fixed(cell.breakdown.missed, 2)
       << ',' << fmt_fixed(cell.breakdown.spotted, 2) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<learner::SweepRow>& rows,
                     const std::string& hash) {
  os << "# manifest: " << hash << "\n";
  os << "gamma,profit_sharpe,profit_sharpe_se,profit_unif,profit_unif_se,accuracy,accuracy_se,"
        "corr_tm\n";
  for (const auto& r : rows) {
    os << fmt_fixed(r.gamma, 2) << ',' << fmt_fixed(r.profit_sharpe, 2) << ','
       << fmt_fixed(r.profit_sharpe_se, 2) << ',' << fmt_fixed(r.profit_unif, 2) << ','
       << fmt_fixed(r.profit_unif_se, 2) << ',' << fmt_fixed(r.accuracy, 6) << ','
       << fmt_fixed(r.accuracy_se, 6) << ',' << fmt_fixed(r.corr_tm, 6) << '\n';
  }
}

void write_calibration_csv(std::ostream& os, const std::vector<metrics::CalibrationBin>& bins,
                           const std::string& hash) {
  os << "# manifest: " << hash << "\n";
  os << "bin_lo,bin_hi,mean_prob,emp_freq,count\n";
  for (const auto& b : bins) {
    os << fmt_fixed(b.lo, 6) << ',' << fmt_fixed(b.hi, 6) << ',' << fmt_fixed(b.mean_prob, 6)
       << ',' << fmt_fixed(b.emp_freq, 6) << ',' << b.count << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("dataset is empty", 1);
  std::vector<std::string> header = split_list(trim(line));
  if (header.size() < 3) {
    throw ConfigError("dataset header needs at least 'y,m,x1' or 'r,m,x1'", 1);
  }
  Dataset ds;
  if (header[0] == "y") {
    ds.mode = market::Mode::betting;
  } else if (header[0] == "r") {
    ds.mode = market::Mode::stock;
  } else {
    throw ConfigError("dataset header must start with 'y' (betting) or 'r' (stock), got '" +
                          header[0] + "'",
                      1);
  }
  if (header[1] != "m") {
    throw ConfigError("second dataset column must be 'm', got '" + header[1] + "'", 1);
  }
  for (std::size_t i = 2; i < header.size(); ++i) {
    const std::string want = "x" + std::to_string(i - 1);
    if (header[i] != want) {
      throw ConfigError("expected column '" + want + "', got '" + header[i] + "'", 1);
    }
  }
  const std::size_t cols = header.size();

  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::vector<std::string> toks = split_list(body);
    if (toks.size() != cols) {
      throw ConfigError("expected " + std::to_string(cols) + " fields, got " +
                            std::to_string(toks.size()),
                        line_no);
    }
    learner::LabeledSample s;
    s.outcome = need_double(toks[0], "column '" + header[0] + "'", line_no);
    s.market = need_double(toks[1], "column 'm'", line_no);
    if (ds.mode == market::Mode::betting) {
      if (s.outcome != 0.0 && s.outcome != 1.0) {
        throw ConfigError("betting outcome must be 0 or 1, got '" + toks[0] + "'", line_no);
      }
      if (!(s.market > 0.0 && s.market < 1.0)) {
        throw ConfigError("betting market probability must lie in (0, 1), got '" + toks[1] + "'",
                          line_no);
      }
    } else {
      if (!(s.outcome > 0.0)) {
        throw ConfigError("stock settlement must be positive, got '" + toks[0] + "'", line_no);
      }
      if (!(s.market > 0.0)) {
        throw ConfigError("stock price must be positive, got '" + toks[1] + "'", line_no);
      }
    }
    s.features.resize(cols - 2);
    for (std::size_t i = 2; i < cols; ++i) {
      s.features[i - 2] = need_double(toks[i], "column '" + header[i] + "'", line_no);
    }
    ds.samples.push_back(std::move(s));
  }
  if (ds.samples.empty()) throw ConfigError("dataset has a header but no rows", 1);
  return ds;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open dataset '" + path + "'");
  return read_dataset_csv(in);
}

}  // namespace marketlab::io
