#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "bwk/baselines.hpp"
#include "bwk/errors.hpp"
#include "bwk/fixtures.hpp"
#include "bwk/lp.hpp"
#include "bwk/nrm.hpp"
#include "bwk/oaucb.hpp"
#include "bwk/oracles.hpp"
#include "bwk/simulate.hpp"

namespace bwk {

enum class EnvKind { generic, nrm };

struct ExperimentConfig {
  std::string experiment = "default";
  std::string preset;  // empty for fully custom configs
  EnvKind kind = EnvKind::generic;
  EnvironmentSpec env;  // generic template; b and T come from the axes
  NrmSpec nrm;          // nrm template
  int lower_bound_fixture = 0;  // 1 or 2 rebuilds that fixture for every T
  std::vector<double> b_values;
  std::vector<int> T_values;
  std::vector<std::string> policies;
  std::vector<std::string> oracles;
  int reps = 1;
  std::uint64_t seed = 1;
  double delta = 0.0;         // <= 0: 1/T
  double ridge = 1.0;         // AR(1) oracle regulariser
  std::size_t sw_window = 0;  // 0: 4 ceil(sqrt T)
  double pdb_step = 0.0;      // 0: sqrt(ln d / B)
  int threads = 0;  // 0: default_threads()
  bool timing = false;  // wall_ms is written as 0 unless enabled
  int trace_stride = 1;

  void validate() const {
    if (reps < 1) throw ConfigError("config: reps must be >= 1");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
    if (trace_stride < 1) throw ConfigError("config: trace_stride must be >= 1");
    if (b_values.empty() || T_values.empty()) {
      throw ConfigError("config: need at least one b and one T");
    }
    for (double b : b_values) {
      if (!(b > 0.0)) throw ConfigError("config: b must be positive");
    }
    for (int T : T_values) {
      if (T < 1) throw ConfigError("config: T must be >= 1");
      if (lower_bound_fixture != 0 && T % 2 != 0) {
        throw ConfigError("config: lower-bound fixtures need even T");
      }
    }
    if (policies.empty()) throw ConfigError("config: no policies");
    if (oracles.empty()) throw ConfigError("config: no oracles");
    for (const auto& name : experiment_names()) {
      if (name.find_first_of(",\n\"") != std::string::npos) {
        throw ConfigError("config: names may not contain commas or quotes");
      }
    }
    if (!(ridge > 0.0)) throw ConfigError("config: ridge must be positive");
    if (delta != 0.0 && !(delta > 0.0 && delta < 1.0)) {
      throw ConfigError("config: delta must lie in (0,1)");
    }
  }

 private:
  std::vector<std::string> experiment_names() const {
    std::vector<std::string> v{experiment, preset};
    v.insert(v.end(), policies.begin(), policies.end());
    v.insert(v.end(), oracles.begin(), oracles.end());
    return v;
  }
};

// ---------------------------------------------------------------- presets

struct PresetInfo {
  std::string name;
  std::string description;
};

inline const std::vector<PresetInfo>& preset_catalog() {
  static const std::vector<PresetInfo> catalog = {
      {"paper-bwk-d1",
       "K=4 (+null), d=1, AR(1) demand (12, 0.5, 2), b=15, T=2000, 20 reps"},
      {"paper-ar1", "AR(1) demand (12, 0.5, 2), T=4096, 50 reps; oracle traces"},
      {"paper-linear",
       "linear demand (5, 0.5, M=2), T=8192, 50 reps; oracle traces"},
      {"lower-bound-i1", "two-action fixture I1 (demand drops to 1/16), T=640"},
      {"lower-bound-i2", "two-action fixture I2 (unit demand), T=1000"},
      {"nrm-single", "single product pricing, prices $10-$19, b=10, T=2000"},
      {"nrm-multi-linear", "2 products, 3 resources, linear choice, b=20"},
      {"nrm-multi-exp", "2 products, 3 resources, exponential choice, b=20"},
      {"nrm-multi-logit", "2 products, 3 resources, logit choice, b=20"},
  };
  return catalog;
}

inline EnvironmentSpec paper_bwk_d1_env() {
  EnvironmentSpec e;
  e.mean_reward = {1.0, 0.8, 0.5, 0.3, 0.0};
  e.mean_cost = Matrix{{0.95}, {0.7}, {0.4}, {0.2}, {0.0}};
  e.null_index = 4;
  e.normalized_budget = 15.0;
  e.horizon = 2000;
  e.demand = Ar1DemandParams{12.0, 0.5, 2.0, 12.0};
  e.noise = {NoiseKind::truncated_normal, 1.0};
  return e;
}

inline ExperimentConfig make_preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.experiment = name;
  c.seed = 1;
  if (name == "paper-bwk-d1") {
    c.env = paper_bwk_d1_env();
    c.b_values = {15.0};
    c.T_values = {2000};
    c.policies = {"oa-ucb", "pdb", "sw-ucb"};
    c.oracles = {"pow2-ar1-ridge"};
    c.reps = 20;
  } else if (name == "paper-ar1") {
    c.env = paper_bwk_d1_env();
    c.b_values = {15.0};
    c.T_values = {4096};
    c.policies = {"oa-ucb"};
    c.oracles = {"pow2-ar1-ridge"};
    c.reps = 50;
  } else if (name == "paper-linear") {
    c.env = paper_bwk_d1_env();
    c.env.demand = LinearDemandParams{5.0, 0.5, 2.0};
    c.b_values = {15.0};
    c.T_values = {8192};
    c.policies = {"oa-ucb"};
    c.oracles = {"ls-linear"};
    c.reps = 50;
  } else if (name == "lower-bound-i1" || name == "lower-bound-i2") {
    c.lower_bound_fixture = name == "lower-bound-i1" ? 1 : 2;
    c.env = fixture_lower_bound(c.lower_bound_fixture, 2);
    c.b_values = {0.5};
    c.T_values = {c.lower_bound_fixture == 1 ? 640 : 1000};
    c.policies = {"oa-ucb", "greedy-ucb"};
    c.oracles = {"clairvoyant"};
    c.reps = 1;
  } else if (name == "nrm-single") {
    c.kind = EnvKind::nrm;
    c.nrm = nrm_single_product();
    c.b_values = {10.0};
    c.T_values = {2000};
    c.policies = {"oa-ucb-dp", "greedy-ucb-dp"};
    c.oracles = {"pow2-ar1-ridge"};
    c.reps = 20;
  } else if (name == "nrm-multi-linear" || name == "nrm-multi-exp" ||
             name == "nrm-multi-logit") {
    c.kind = EnvKind::nrm;
    const ChoiceKind k = name == "nrm-multi-linear" ? ChoiceKind::linear
                         : name == "nrm-multi-exp"  ? ChoiceKind::exponential
                                                    : ChoiceKind::logit;
    c.nrm = nrm_multi_product(k);
    c.b_values = {20.0};
    c.T_values = {2000};
    c.policies = {"oa-ucb-dp", "greedy-ucb-dp"};
    c.oracles = {"pow2-ar1-ridge"};
    c.reps = 20;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

// ------------------------------------------------------------ JSON config

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline Matrix matrix_from(const json& j, const std::string& where) {
  auto rows = get_as<std::vector<std::vector<double>>>(j, where);
  try {
    return Matrix::from_rows(rows);
  } catch (const ArgumentError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <typename T>
std::vector<T> scalar_or_list(const json& j, const std::string& where) {
  if (j.is_array()) return get_as<std::vector<T>>(j, where);
  return {get_as<T>(j, where)};
}

inline DemandModel demand_from(const json& j) {
  reject_unknown(j, {"kind", "alpha", "beta", "sigma", "q1", "M", "values"},
                 "demand");
  const auto kind = get_as<std::string>(j.at("kind"), "demand.kind");
  auto num = [&](const char* key) {
    if (!j.contains(key)) {
      throw ConfigError(std::string("demand: missing '") + key + "'");
    }
    return get_as<double>(j.at(key), std::string("demand.") + key);
  };
  if (kind == "ar1") {
    Ar1DemandParams p{num("alpha"), num("beta"), num("sigma"), num("q1")};
    p.validate();
    return p;
  }
  if (kind == "linear") {
    LinearDemandParams p{num("alpha"), num("beta"), num("M")};
    p.validate();
    return p;
  }
  if (kind == "explicit") {
    return ExplicitDemand{
        get_as<std::vector<double>>(j.at("values"), "demand.values")};
  }
  throw ConfigError("demand: unknown kind '" + kind + "'");
}

inline ChoiceModel choice_from(const json& j) {
  reject_unknown(j, {"kind", "a", "b", "table"}, "choice");
  ChoiceModel m;
  const auto kind = get_as<std::string>(j.at("kind"), "choice.kind");
  if (kind == "table") {
    m.kind = ChoiceKind::table;
    m.table = matrix_from(j.at("table"), "choice.table");
    return m;
  }
  if (kind == "linear") {
    m.kind = ChoiceKind::linear;
  } else if (kind == "exponential") {
    m.kind = ChoiceKind::exponential;
  } else if (kind == "logit") {
    m.kind = ChoiceKind::logit;
  } else {
    throw ConfigError("choice: unknown kind '" + kind + "'");
  }
  m.a = get_as<std::vector<double>>(j.at("a"), "choice.a");
  m.b = get_as<std::vector<double>>(j.at("b"), "choice.b");
  return m;
}

inline void environment_from(const json& j, ExperimentConfig& c) {
  reject_unknown(j,
                 {"kind", "mean_reward", "mean_cost", "null_index", "noise",
                  "demand", "prices", "consumption", "choice"},
                 "environment");
  const auto kind = get_as<std::string>(j.at("kind"), "environment.kind");
  c.lower_bound_fixture = 0;
  if (kind == "generic") {
    c.kind = EnvKind::generic;
    EnvironmentSpec e;
    e.mean_reward = get_as<std::vector<double>>(j.at("mean_reward"),
                                                "environment.mean_reward");
    e.mean_cost = matrix_from(j.at("mean_cost"), "environment.mean_cost");
    e.null_index = get_as<std::size_t>(j.at("null_index"),
                                       "environment.null_index");
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      reject_unknown(n, {"kind", "sigma"}, "environment.noise");
      const auto nk = get_as<std::string>(n.at("kind"), "noise.kind");
      if (nk == "truncated_normal") {
        e.noise.kind = NoiseKind::truncated_normal;
      } else if (nk == "deterministic") {
        e.noise.kind = NoiseKind::deterministic;
      } else {
        throw ConfigError("noise: unknown kind '" + nk + "'");
      }
      if (n.contains("sigma")) e.noise.sigma = get_as<double>(n.at("sigma"), "noise.sigma");
    }
    if (!j.contains("demand")) throw ConfigError("environment: missing demand");
    e.demand = demand_from(j.at("demand"));
    c.env = std::move(e);
  } else if (kind == "nrm") {
    c.kind = EnvKind::nrm;
    NrmSpec s;
    s.prices = matrix_from(j.at("prices"), "environment.prices");
    s.consumption = matrix_from(j.at("consumption"), "environment.consumption");
    s.choice = choice_from(j.at("choice"));
    if (!j.contains("demand")) throw ConfigError("environment: missing demand");
    s.demand = demand_from(j.at("demand"));
    c.nrm = std::move(s);
  } else {
    throw ConfigError("environment: unknown kind '" + kind + "'");
  }
}

inline ExperimentConfig parse_config_impl(const nlohmann::json& j) {
  detail::reject_unknown(
      j,
      {"schema", "experiment", "preset", "environment", "b", "T", "policies",
       "oracles", "reps", "seed", "delta", "ridge", "sw_window", "pdb_step",
       "threads", "timing", "trace_stride"},
      "config");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != 1) {
    throw ConfigError("config: 'schema' must be 1");
  }
  ExperimentConfig c;
  if (j.contains("preset")) {
    c = make_preset(get_as<std::string>(j.at("preset"), "preset"));
  } else {
    c.experiment = "custom";
  }
  if (j.contains("experiment")) {
    c.experiment = get_as<std::string>(j.at("experiment"), "experiment");
  }
  if (j.contains("environment")) detail::environment_from(j.at("environment"), c);
  if (j.contains("b")) c.b_values = detail::scalar_or_list<double>(j.at("b"), "b");
  if (j.contains("T")) c.T_values = detail::scalar_or_list<int>(j.at("T"), "T");
  if (j.contains("policies")) {
    c.policies = get_as<std::vector<std::string>>(j.at("policies"), "policies");
  }
  if (j.contains("oracles")) {
    c.oracles = get_as<std::vector<std::string>>(j.at("oracles"), "oracles");
  }
  if (j.contains("reps")) c.reps = get_as<int>(j.at("reps"), "reps");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("delta")) c.delta = get_as<double>(j.at("delta"), "delta");
  if (j.contains("ridge")) c.ridge = get_as<double>(j.at("ridge"), "ridge");
  if (j.contains("sw_window")) {
    c.sw_window = get_as<std::size_t>(j.at("sw_window"), "sw_window");
  }
  if (j.contains("pdb_step")) c.pdb_step = get_as<double>(j.at("pdb_step"), "pdb_step");
  if (j.contains("threads")) c.threads = get_as<int>(j.at("threads"), "threads");
  if (j.contains("timing")) c.timing = get_as<bool>(j.at("timing"), "timing");
  if (j.contains("trace_stride")) {
    c.trace_stride = get_as<int>(j.at("trace_stride"), "trace_stride");
  }
  return c;
}
}  // namespace detail

/// Parses a versioned JSON config. A "preset" key supplies defaults that the
/// remaining keys override.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  try {
    return detail::parse_config_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

// ------------------------------------------------------ factories per cell

/// "+5T" / "-20T" / "0T" style offsets.
inline std::optional<double> parse_offset_label(const std::string& s) {
  if (s.size() < 2 || s.back() != 'T') return std::nullopt;
  const std::string num = s.substr(0, s.size() - 1);
  try {
    std::size_t used = 0;
    const double x = std::stod(num, &used);
    if (used != num.size() || !std::isfinite(x)) return std::nullopt;
    return x;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline bool known_oracle(const std::string& name) {
  static const std::set<std::string> names = {
      "ls-linear", "ar1-ridge", "pow2-ls-linear", "pow2-ar1-ridge",
      "clairvoyant"};
  return names.count(name) > 0 || parse_offset_label(name).has_value();
}

inline std::unique_ptr<PredictionOracle> make_oracle(const std::string& name,
                                                     double true_total,
                                                     int horizon,
                                                     double ridge) {
  if (name == "ls-linear") return std::make_unique<LeastSquaresLinearOracle>();
  if (name == "ar1-ridge") return std::make_unique<Ar1RidgeOracle>(ridge);
  if (name == "pow2-ls-linear") {
    return std::make_unique<PowerOfTwoOracle>(
        std::make_unique<LeastSquaresLinearOracle>());
  }
  if (name == "pow2-ar1-ridge") {
    return std::make_unique<PowerOfTwoOracle>(
        std::make_unique<Ar1RidgeOracle>(ridge));
  }
  if (name == "clairvoyant") return make_clairvoyant(true_total, horizon);
  if (auto x = parse_offset_label(name)) {
    return std::make_unique<StaticOffsetOracle>(true_total, *x, horizon);
  }
  throw ConfigError("unknown oracle '" + name + "'");
}

inline bool policy_fits(const std::string& name, EnvKind kind) {
  static const std::set<std::string> generic = {"oa-ucb", "pdb", "sw-ucb",
                                                "greedy-ucb"};
  static const std::set<std::string> pricing = {"oa-ucb-dp", "greedy-ucb-dp"};
  return kind == EnvKind::generic ? generic.count(name) > 0
                                  : pricing.count(name) > 0;
}

inline std::unique_ptr<Policy> make_policy(const std::string& name,
                                           const ExperimentConfig& cfg,
                                           const NrmSpec* nrm, int horizon) {
  if (name == "oa-ucb") {
    OaUcbConfig c;
    c.delta = cfg.delta;
    return std::make_unique<OaUcbPolicy>(c);
  }
  if (name == "pdb") {
    PdbConfig c;
    c.delta = cfg.delta;
    c.step = cfg.pdb_step;
    return std::make_unique<PdbPolicy>(c);
  }
  if (name == "sw-ucb") {
    return std::make_unique<OaUcbPolicy>(
        make_sw_ucb(horizon, cfg.sw_window, cfg.delta));
  }
  if (name == "greedy-ucb") return std::make_unique<GreedyUcbPolicy>(cfg.delta);
  if ((name == "oa-ucb-dp" || name == "greedy-ucb-dp") && nrm) {
    OaUcbDpConfig c;
    c.delta = cfg.delta;
    c.ignore_costs = name == "greedy-ucb-dp";
    return std::make_unique<OaUcbDpPolicy>(*nrm, c);
  }
  throw ConfigError("unknown policy '" + name + "'");
}

inline void check_names(const ExperimentConfig& cfg) {
  for (const auto& p : cfg.policies) {
    if (!policy_fits(p, cfg.kind)) {
      throw ConfigError("policy '" + p + "' does not apply to this environment");
    }
  }
  for (const auto& o : cfg.oracles) {
    if (!known_oracle(o)) throw ConfigError("unknown oracle '" + o + "'");
  }
}

// One (b, T) environment, ready to simulate.
struct Cell {
  double b = 0.0;
  int horizon = 0;
  EnvironmentSpec env;
  NrmSpec nrm;
};

inline Cell build_cell(const ExperimentConfig& cfg, double b, int horizon) {
  Cell cell{b, horizon, {}, {}};
  if (cfg.kind == EnvKind::generic) {
    cell.env = cfg.lower_bound_fixture != 0
                   ? fixture_lower_bound(cfg.lower_bound_fixture, horizon)
                   : cfg.env;
    cell.env.normalized_budget = b;
    cell.env.horizon = horizon;
    cell.env.validate();
  } else {
    cell.nrm = cfg.nrm;
    cell.nrm.normalized_budget = b;
    cell.nrm.horizon = horizon;
    cell.nrm.validate();
  }
  return cell;
}

// ------------------------------------------------------------- execution

struct ResultRow {
  std::string experiment, preset, algo, oracle;
  double b = 0.0;
  int T = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double regret = 0.0, cr = 0.0;
  int tau = 0;
  double opt_lp = 0.0, total_reward = 0.0;
  double wall_ms = 0.0;
};

struct AggregateRow {
  std::string experiment, preset, algo, oracle;
  double b = 0.0;
  int T = 0;
  int reps = 0;
  double mean_regret = 0.0, stderr_regret = 0.0;
  double mean_cr = 0.0, stderr_cr = 0.0;
  double mean_tau = 0.0;
  double wall_ms = 0.0;
};

inline std::uint64_t replication_seed(std::uint64_t master, int rep) {
  return derive_seed(master, "replication", static_cast<std::uint64_t>(rep));
}

// Sample mean and standard error (sample std / sqrt(n); 0 when n == 1).
inline std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

// Runs every (policy, oracle) pair on one replication of one cell; all of them
// share the replication's demand sequence and outcome stream.
inline std::vector<ResultRow> run_replication(const ExperimentConfig& cfg,
                                              const Cell& cell, int rep) {
  const std::uint64_t seed = replication_seed(cfg.seed, rep);
  const SeedStreams streams = SeedStreams::from(seed);
  const bool nrm = cfg.kind == EnvKind::nrm;
  const DemandModel& model = nrm ? cell.nrm.demand : cell.env.demand;
  const DemandSeries demand =
      generate_demand(model, cell.horizon, streams.demand);
  const double Q = demand.total();
  if (!(Q > 0.0)) throw std::runtime_error("realized total demand is zero");

  std::unique_ptr<OutcomeSource> source;
  ProblemInfo info;
  double opt = 0.0;
  if (nrm) {
    source = std::make_unique<NrmOutcomeSource>(cell.nrm, streams.outcome);
    info = cell.nrm.problem_info();
    opt = nrm_opt_lp(cell.nrm, Q).value;
  } else {
    source = std::make_unique<SpecOutcomeSource>(cell.env, streams.outcome);
    info = ProblemInfo::from(cell.env);
    opt = solve_opt_lp(cell.env.mean_reward, cell.env.mean_cost, Q,
                       cell.env.budget())
              .value;
  }

  std::vector<ResultRow> rows;
  for (const auto& pname : cfg.policies) {
    for (const auto& oname : cfg.oracles) {
      auto policy = make_policy(pname, cfg, nrm ? &cell.nrm : nullptr,
                                cell.horizon);
      auto oracle = make_oracle(oname, Q, cell.horizon, cfg.ridge);
      const auto start = std::chrono::steady_clock::now();
      const TrajectoryLog log =
          simulate_run(info, demand.values, *source, *policy, *oracle);
      const auto stop = std::chrono::steady_clock::now();
      const RunMetrics m = compute_metrics(log, opt);
      ResultRow r;
      r.experiment = cfg.experiment;
      r.preset = cfg.preset;
      r.algo = pname;
      r.oracle = oname;
      r.b = cell.b;
      r.T = cell.horizon;
      r.rep = rep;
      r.seed = seed;
      r.regret = m.regret;
      r.cr = m.competitive_ratio;
      r.tau = log.stopping_time;
      r.opt_lp = opt;
      r.total_reward = log.total_reward;
      r.wall_ms =
          cfg.timing
              ? std::chrono::duration<double, std::milli>(stop - start).count()
              : 0.0;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// Default worker count: BWK_ADVICE_THREADS if set and valid, else the
// hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("BWK_ADVICE_THREADS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("BWK_ADVICE_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline int resolve_threads(int requested) {
  return requested > 0 ? requested : default_threads();
}

// Runs job(i) for i in [0, n) on `threads` workers. The first exception
// thrown by any job is rethrown once every worker has stopped.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int k = 1; k < count; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct ExperimentResult {
  std::vector<ResultRow> rows;  // ordered by (b, T, algo, oracle, rep)
  std::vector<AggregateRow> aggregates;
};

inline std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<AggregateRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    auto same = [&](const ResultRow& a, const ResultRow& b) {
      return a.experiment == b.experiment && a.preset == b.preset &&
             a.algo == b.algo && a.oracle == b.oracle && a.b == b.b &&
             a.T == b.T;
    };
    std::vector<double> regret, cr;
    double tau = 0.0, wall = 0.0;
    while (j < rows.size() && same(rows[i], rows[j])) {
      regret.push_back(rows[j].regret);
      cr.push_back(rows[j].cr);
      tau += rows[j].tau;
      wall += rows[j].wall_ms;
      ++j;
    }
    AggregateRow a;
    a.experiment = rows[i].experiment;
    a.preset = rows[i].preset;
    a.algo = rows[i].algo;
    a.oracle = rows[i].oracle;
    a.b = rows[i].b;
    a.T = rows[i].T;
    a.reps = static_cast<int>(j - i);
    std::tie(a.mean_regret, a.stderr_regret) = mean_stderr(regret);
    std::tie(a.mean_cr, a.stderr_cr) = mean_stderr(cr);
    a.mean_tau = tau / a.reps;
    a.wall_ms = wall;
    out.push_back(std::move(a));
    i = j;
  }
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  check_names(cfg);

  std::vector<Cell> cells;
  for (double b : cfg.b_values) {
    for (int T : cfg.T_values) cells.push_back(build_cell(cfg, b, T));
  }
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  std::vector<std::vector<ResultRow>> per_job(cells.size() * reps);
  parallel_for(per_job.size(), resolve_threads(cfg.threads), [&](std::size_t job) {
    per_job[job] = run_replication(cfg, cells[job / reps],
                                   static_cast<int>(job % reps));
  });

  ExperimentResult result;
  const std::size_t combos = cfg.policies.size() * cfg.oracles.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t k = 0; k < combos; ++k) {
      for (std::size_t r = 0; r < reps; ++r) {
        result.rows.push_back(per_job[c * reps + r][k]);
      }
    }
  }
  result.aggregates = aggregate(result.rows);
  return result;
}

// ------------------------------------------------------------------- CSV

inline constexpr const char* kResultsHeader =
    "experiment,preset,algo,oracle,b,T,rep,seed,regret,cr,tau,opt_lp,"
    "total_reward,wall_ms";
inline constexpr const char* kAggregatesHeader =
    "experiment,preset,algo,oracle,b,T,reps,mean_regret,stderr_regret,"
    "mean_cr,stderr_cr,mean_tau,wall_ms";
inline constexpr const char* kTraceHeader =
    "oracle,T,t,mean_abs_error,stderr_abs_error,mean_rel_error";

// Round-trippable number formatting.
inline std::string num(double x) { return fmt::format("{:.17g}", x); }

inline void write_results_csv(std::ostream& os,
                              const std::vector<ResultRow>& rows) {
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.preset << ',' << r.algo << ',' << r.oracle
       << ',' << num(r.b) << ',' << r.T << ',' << r.rep << ',' << r.seed << ','
       << num(r.regret) << ',' << num(r.cr) << ',' << r.tau << ','
       << num(r.opt_lp) << ',' << num(r.total_reward) << ','
       << num(r.wall_ms) << '\n';
  }
}

inline void write_aggregates_csv(std::ostream& os,
                                 const std::vector<AggregateRow>& rows) {
  os << kAggregatesHeader << '\n';
  for (const auto& a : rows) {
    os << a.experiment << ',' << a.preset << ',' << a.algo << ',' << a.oracle
       << ',' << num(a.b) << ',' << a.T << ',' << a.reps << ','
       << num(a.mean_regret) << ',' << num(a.stderr_regret) << ','
       << num(a.mean_cr) << ',' << num(a.stderr_cr) << ',' << num(a.mean_tau)
       << ',' << num(a.wall_ms) << '\n';
  }
}

inline std::vector<std::vector<std::string>> read_csv(std::istream& is,
                                                      std::string& header) {
  std::vector<std::vector<std::string>> rows;
  if (!std::getline(is, header)) throw ConfigError("csv: empty input");
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline std::vector<ResultRow> parse_results_csv(std::istream& is) {
  std::string header;
  auto raw = read_csv(is, header);
  if (header != kResultsHeader) throw ConfigError("results csv: bad header");
  std::vector<ResultRow> rows;
  for (const auto& c : raw) {
    if (c.size() != 14) throw ConfigError("results csv: wrong column count");
    ResultRow r;
    r.experiment = c[0];
    r.preset = c[1];
    r.algo = c[2];
    r.oracle = c[3];
    r.b = std::stod(c[4]);
    r.T = std::stoi(c[5]);
    r.rep = std::stoi(c[6]);
    r.seed = std::stoull(c[7]);
    r.regret = std::stod(c[8]);
    r.cr = std::stod(c[9]);
    r.tau = std::stoi(c[10]);
    r.opt_lp = std::stod(c[11]);
    r.total_reward = std::stod(c[12]);
    r.wall_ms = std::stod(c[13]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<AggregateRow> parse_aggregates_csv(std::istream& is) {
  std::string header;
  auto raw = read_csv(is, header);
  if (header != kAggregatesHeader) {
    throw ConfigError("aggregates csv: bad header");
  }
  std::vector<AggregateRow> rows;
  for (const auto& c : raw) {
    if (c.size() != 13) throw ConfigError("aggregates csv: wrong column count");
    AggregateRow a;
    a.experiment = c[0];
    a.preset = c[1];
    a.algo = c[2];
    a.oracle = c[3];
    a.b = std::stod(c[4]);
    a.T = std::stoi(c[5]);
    a.reps = std::stoi(c[6]);
    a.mean_regret = std::stod(c[7]);
    a.stderr_regret = std::stod(c[8]);
    a.mean_cr = std::stod(c[9]);
    a.stderr_cr = std::stod(c[10]);
    a.mean_tau = std::stod(c[11]);
    a.wall_ms = std::stod(c[12]);
    rows.push_back(std::move(a));
  }
  return rows;
}

inline void write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw std::runtime_error("cannot create directory '" +
                               path.parent_path().string() +
                               "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void write_experiment(const ExperimentResult& result,
                             const std::filesystem::path& dir) {
  write_file(dir / "results.csv",
             [&](std::ostream& os) { write_results_csv(os, result.rows); });
  write_file(dir / "aggregates.csv", [&](std::ostream& os) {
    write_aggregates_csv(os, result.aggregates);
  });
}

// ------------------------------------------------------------ oracle trace

struct TracePoint {
  std::string oracle;
  int T = 0;
  int t = 0;
  double mean_abs_error = 0.0;
  double stderr_abs_error = 0.0;
  double mean_rel_error = 0.0;
};

/// Runs each configured oracle against generated demand only and records
/// mean |Q-hat_t - Q| across replications at every `trace_stride`-th round
/// (and the last).
inline std::vector<TracePoint> trace_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  for (const auto& o : cfg.oracles) {
    if (!known_oracle(o)) throw ConfigError("unknown oracle '" + o + "'");
  }
  const DemandModel& model =
      cfg.kind == EnvKind::nrm ? cfg.nrm.demand : cfg.env.demand;
  std::vector<TracePoint> out;
  for (int T : cfg.T_values) {
    std::vector<int> rounds;
    for (int t = 1; t <= T; t += cfg.trace_stride) rounds.push_back(t);
    if (rounds.back() != T) rounds.push_back(T);

    for (const auto& oname : cfg.oracles) {
      const std::size_t R = static_cast<std::size_t>(cfg.reps);
      std::vector<std::vector<double>> abs_err(R), rel_err(R);
      parallel_for(R, resolve_threads(cfg.threads), [&](std::size_t rep) {
        const auto seed = replication_seed(cfg.seed, static_cast<int>(rep));
        const DemandModel m = cfg.lower_bound_fixture != 0
                                  ? fixture_lower_bound(cfg.lower_bound_fixture, T).demand
                                  : model;
        const DemandSeries d =
            generate_demand(m, T, SeedStreams::from(seed).demand);
        const double Q = d.total();
        auto oracle = make_oracle(oname, Q, T, cfg.ridge);
        oracle->reset();
        std::size_t next = 0;
        for (int t = 1; t <= T; ++t) {
          const double pred = oracle->predict(
              std::span<const double>(d.values).first(
                  static_cast<std::size_t>(t - 1)),
              t, T);
          if (next < rounds.size() && rounds[next] == t) {
            abs_err[rep].push_back(std::abs(pred - Q));
            rel_err[rep].push_back(std::abs(pred - Q) / Q);
            ++next;
          }
        }
      });
      for (std::size_t k = 0; k < rounds.size(); ++k) {
        std::vector<double> a(R), r(R);
        for (std::size_t rep = 0; rep < R; ++rep) {
          a[rep] = abs_err[rep][k];
          r[rep] = rel_err[rep][k];
        }
        const auto [ma, sa] = mean_stderr(a);
        out.push_back({oname, T, rounds[k], ma, sa, mean_stderr(r).first});
      }
    }
  }
  return out;
}

inline void write_trace_csv(std::ostream& os,
                            const std::vector<TracePoint>& points) {
  os << kTraceHeader << '\n';
  for (const auto& p : points) {
    os << p.oracle << ',' << p.T << ',' << p.t << ',' << num(p.mean_abs_error)
       << ',' << num(p.stderr_abs_error) << ',' << num(p.mean_rel_error)
       << '\n';
  }
}

// ------------------------------------------------------------------ table

inline std::string format_table(const std::vector<AggregateRow>& rows) {
  std::string s = fmt::format("{:<16} {:<16} {:>8} {:>7} {:>24} {:>18} {:>9}\n",
                              "algo", "oracle", "b", "T", "regret", "CR",
                              "mean tau");
  for (const auto& a : rows) {
    s += fmt::format(
        "{:<16} {:<16} {:>8} {:>7} {:>24} {:>18} {:>9.1f}\n", a.algo, a.oracle,
        fmt::format("{:g}", a.b), a.T,
        fmt::format("{:.1f} ± {:.1f}", a.mean_regret, a.stderr_regret),
        fmt::format("{:.3f} ± {:.3f}", a.mean_cr, a.stderr_cr), a.mean_tau);
  }
  return s;
}

}  // namespace bwk
