// rotospec: run speed-measurement experiments from scenario files or builtins.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rotospec/config_io.hpp"
#include "rotospec/harness.hpp"
#include "rotospec/spectrum.hpp"

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string scenario_file;
  std::string builtin;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string out_dir = ".";
  std::string format = "csv";
  bool timing = false;
  unsigned threads = 0;
  std::vector<double> thresholds_dbm;
  bool interference_cases = false;
};

rotospec::Scenario load(const RunArgs& a) {
  if (!a.builtin.empty()) return rotospec::builtin_scenario(a.builtin);
  return rotospec::load_scenario(a.scenario_file);
}

int run(const RunArgs& a) {
  rotospec::Scenario s = load(a);
  if (a.seed) s.rng_seed = *a.seed;
  if (a.trials) s.trials = *a.trials;

  rotospec::RunOptions opts;
  opts.record_timing = a.timing;
  opts.threads = a.threads;

  std::vector<rotospec::TrialResult> results;
  if (!a.thresholds_dbm.empty() || a.interference_cases) {
    std::vector<double> thresholds;
    for (double d : a.thresholds_dbm) thresholds.push_back(rotospec::dbm_to_linear(d));
    if (thresholds.empty()) thresholds.push_back(s.threshold);
    results = rotospec::run_snr_sweep(s, thresholds, a.interference_cases, opts);
  } else {
    results = rotospec::run_scenario(s, opts);
  }

  const auto format = a.format == "json" ? rotospec::ResultFormat::json
                                         : rotospec::ResultFormat::csv;
  fs::create_directories(a.out_dir);
  const fs::path dest = fs::path(a.out_dir) / (s.name + (a.format == "json" ? ".json" : ".csv"));
  rotospec::write_results(results, format, dest);

  std::size_t failed = 0;
  for (const auto& r : results) failed += r.detection_failed ? 1 : 0;
  std::cerr << "wrote " << results.size() << " rows to " << dest.string();
  if (failed) std::cerr << " (" << failed << " detection failures)";
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotational-Doppler speed measurement simulator"};
  app.require_subcommand(1);

  RunArgs args;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write a results table");
  auto* file_opt = run_cmd->add_option("scenario-file", args.scenario_file, "Scenario JSON file");
  auto* builtin_opt =
      run_cmd->add_option("--builtin", args.builtin, "Run a builtin scenario instead of a file");
  file_opt->excludes(builtin_opt);
  run_cmd->add_option("--seed", args.seed, "Override the scenario rng_seed");
  run_cmd->add_option("--trials", args.trials, "Override the trial count")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", args.out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--format", args.format, "Results format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  run_cmd->add_flag("--timing", args.timing, "Record per-trial wall time (output not reproducible)");
  run_cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
  run_cmd->add_option("--thresholds-dbm", args.thresholds_dbm,
                      "Repeat an snr_db sweep once per threshold");
  run_cmd->add_flag("--interference-cases", args.interference_cases,
                    "Add similar- and different-speed interferer runs to an snr_db sweep");

  app.add_subcommand("list-builtins", "List builtin scenarios");

  std::string gen_name;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-config", "Print a builtin scenario as a scenario file");
  gen_cmd->add_option("builtin-name", gen_name, "Builtin scenario name")->required();
  gen_cmd->add_option("--out", gen_out, "Write to this directory instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      if (args.scenario_file.empty() && args.builtin.empty()) {
        std::cerr << "run: give a scenario file or --builtin <name>\n";
        return 2;
      }
      return run(args);
    }
    if (app.got_subcommand("list-builtins")) {
      for (const auto& b : rotospec::list_builtins()) {
        std::cout << b.name << "\t" << b.description << '\n';
      }
      return 0;
    }
    if (*gen_cmd) {
      const std::string text = rotospec::serialize_scenario(rotospec::builtin_scenario(gen_name));
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        fs::create_directories(gen_out);
        const fs::path dest = fs::path(gen_out) / (gen_name + ".json");
        std::ofstream(dest) << text;
        std::cerr << "wrote " << dest.string() << '\n';
      }
      return 0;
    }
  } catch (const rotospec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
