// Command-line front end: run, sweep, trace-oracle, table, presets.
//
// Exit codes: 0 success, 2 configuration or usage error, 1 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bwk/harness.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::string preset;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<int> threads;
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON experiment config")
      ->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "named preset (see `presets`)");
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--reps", o.reps, "replications per cell");
  cmd->add_option("--threads", o.threads,
                  "worker threads (default: $BWK_ADVICE_THREADS or all cores)");
  cmd->add_flag("--timing", o.timing, "record wall_ms per run");
}

bwk::ExperimentConfig resolve(const CommonOptions& o) {
  if (!o.config.empty() && !o.preset.empty()) {
    throw bwk::ConfigError("give either --config or --preset, not both");
  }
  bwk::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = bwk::load_config(o.config);
  } else if (!o.preset.empty()) {
    cfg = bwk::make_preset(o.preset);
  } else {
    throw bwk::ConfigError("one of --config or --preset is required");
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.reps) cfg.reps = *o.reps;
  if (o.threads) {
    if (*o.threads < 1) throw bwk::ConfigError("--threads must be >= 1");
    cfg.threads = *o.threads;
  }
  if (o.timing) cfg.timing = true;
  return cfg;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// "b=10,15,20", "T=1000,2000" or "x=+5,-5,0" (oracle offsets).
void apply_axis(bwk::ExperimentConfig& cfg, const std::string& axis) {
  const auto eq = axis.find('=');
  if (eq == std::string::npos || eq + 1 == axis.size()) {
    throw bwk::ConfigError("axis '" + axis + "' must look like name=v1,v2");
  }
  const std::string name = axis.substr(0, eq);
  const auto values = split(axis.substr(eq + 1), ',');
  auto to_double = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw bwk::ConfigError("axis '" + name + "': bad value '" + v + "'");
  };
  if (name == "b") {
    cfg.b_values.clear();
    for (const auto& v : values) cfg.b_values.push_back(to_double(v));
  } else if (name == "T") {
    cfg.T_values.clear();
    for (const auto& v : values) {
      const double x = to_double(v);
      if (x != static_cast<int>(x)) {
        throw bwk::ConfigError("axis 'T': values must be integers");
      }
      cfg.T_values.push_back(static_cast<int>(x));
    }
  } else if (name == "x") {
    cfg.oracles.clear();
    for (const auto& v : values) {
      cfg.oracles.push_back(
          bwk::StaticOffsetOracle::label(to_double(v)));
    }
  } else {
    throw bwk::ConfigError("unknown axis '" + name + "' (use b, T or x)");
  }
}

void run_and_write(const bwk::ExperimentConfig& cfg, const std::string& out) {
  const auto result = bwk::run_experiment(cfg);
  bwk::write_experiment(result, out);
  std::cout << bwk::format_table(result.aggregates);
  std::cout << "wrote " << (fs::path(out) / "results.csv").string() << " and "
            << (fs::path(out) / "aggregates.csv").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandits-with-knapsacks simulator with demand predictions"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, trace_opts;
  auto* run = app.add_subcommand("run", "run one experiment");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "run an experiment over axes");
  add_common(sweep, sweep_opts);
  std::vector<std::string> axes;
  sweep->add_option("--axis", axes, "sweep axis, e.g. b=10,15,20")
      ->required();

  auto* trace = app.add_subcommand("trace-oracle",
                                   "log prediction error against demand");
  add_common(trace, trace_opts);

  auto* table = app.add_subcommand("table", "pretty-print aggregates.csv");
  std::string table_in = "aggregates.csv";
  table->add_option("input", table_in, "aggregates CSV or its directory")
      ->capture_default_str();

  app.add_subcommand("presets", "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      run_and_write(resolve(run_opts), run_opts.out);
    } else if (*sweep) {
      auto cfg = resolve(sweep_opts);
      for (const auto& a : axes) apply_axis(cfg, a);
      run_and_write(cfg, sweep_opts.out);
    } else if (*trace) {
      const auto cfg = resolve(trace_opts);
      const auto points = bwk::trace_oracle(cfg);
      const fs::path path = fs::path(trace_opts.out) / "estimation_error.csv";
      bwk::write_file(path, [&](std::ostream& os) {
        bwk::write_trace_csv(os, points);
      });
      std::cout << "wrote " << path.string() << " (" << points.size()
                << " rows)\n";
    } else if (*table) {
      fs::path path = table_in;
      if (fs::is_directory(path)) path /= "aggregates.csv";
      std::ifstream in(path);
      if (!in) throw bwk::ConfigError("cannot open '" + path.string() + "'");
      std::cout << bwk::format_table(bwk::parse_aggregates_csv(in));
    } else {
      for (const auto& p : bwk::preset_catalog()) {
        std::cout << p.name << "\t" << p.description << "\n";
      }
    }
  } catch (const bwk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bwk::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
