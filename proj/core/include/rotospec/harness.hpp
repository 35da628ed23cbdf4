#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rotospec/aggregation.hpp"
#include "rotospec/signal_model.hpp"
#include "rotospec/speed_extraction.hpp"

namespace rotospec {

enum class SweepParameter { snr_db, subcarrier_count, window_duration, threshold, rotation_speed };

std::string_view to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view name);

struct Sweep {
  SweepParameter parameter = SweepParameter::snr_db;
  /// rotation_speed values are rpm; threshold values are linear magnitudes.
  std::vector<double> values;
};

struct EstimatorSettings {
  ExtractionConfig extraction;
  AggregationConfig aggregation;
};

struct Scenario {
  std::string name;
  std::vector<MachineSpec> machines;
  SubcarrierPlan plan;
  std::vector<NoiseSpec> noise;
  double threshold = 1e-3;  // linear spectrum magnitude
  std::size_t machine_count = 1;
  EstimatorSettings estimator;
  std::optional<Sweep> sweep;
  std::size_t trials = 1;
  std::uint64_t rng_seed = 1;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

struct TrialResult {
  std::string scenario_name;
  std::string sweep_param;  // "none" without a sweep
  double sweep_value = 0.0;
  std::size_t trial = 0;
  std::size_t machine = 0;  // rank among target machines by true speed
  double true_rpm = 0.0;
  double fused_rpm = 0.0;
  double abs_error_rpm = 0.0;
  double pct_error = 0.0;
  std::size_t loc = 0;
  double loc_ratio = 0.0;
  bool detection_failed = false;
  double wall_time_ms = 0.0;
};

struct RunOptions {
  /// Wall time makes output run-dependent, so it is opt-in; when off the
  /// wall_time_ms column is 0 and results are byte-reproducible.
  bool record_timing = false;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Mixes the scenario seed with a trial index (splitmix64 finalizer over
/// seed + golden-ratio * (trial + 1)). Sweep values do not enter the seed, so
/// every sweep point sees the same noise draws up to scale.
std::uint64_t trial_seed(std::uint64_t scenario_seed, std::size_t trial);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Returns a copy of the scenario with one sweep value applied.
Scenario apply_sweep_value(const Scenario& scenario, SweepParameter parameter,
                           double value);

/// Subcarriers a noise source applies to in a given trial.
std::vector<std::size_t> noise_subcarriers(const NoiseSpec& noise,
                                           std::size_t subcarrier_count,
                                           std::uint64_t seed);

/// Per sweep value and trial: synthesize all subcarriers, extract speeds per
/// subcarrier, fuse across subcarriers, score against the target machines.
/// Output is ordered by (sweep value, trial, machine) independent of threads.
std::vector<TrialResult> run_scenario(const Scenario& scenario,
                                      const RunOptions& options = {});

/// Coarse-window study: sweep on window_duration, values within [1, 30] s.
std::vector<TrialResult> run_coarse_window_sweep(const Scenario& scenario,
                                                 bool fine_disabled,
                                                 const RunOptions& options = {});

/// Runs an snr_db sweep once per threshold (scenario_name gets a
/// "@threshold=<v>" suffix). With include_interference_cases the sweep is
/// repeated for a similar-speed interferer (+8 rpm, M = 1) and a
/// different-speed interferer (0.55x speed) at M = 1 and M = 2, derived from
/// the first target machine.
std::vector<TrialResult> run_snr_sweep(const Scenario& scenario,
                                       std::span<const double> thresholds,
                                       bool include_interference_cases,
                                       const RunOptions& options = {});

struct BuiltinInfo {
  std::string name;
  std::string description;
};

std::vector<BuiltinInfo> list_builtins();
/// Throws std::invalid_argument for an unknown name.
Scenario builtin_scenario(std::string_view name);

}  // namespace rotospec
