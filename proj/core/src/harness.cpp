#include "rotospec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "rotospec/spectrum.hpp"

namespace rotospec {

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::snr_db: return "snr_db";
    case SweepParameter::subcarrier_count: return "subcarrier_count";
    case SweepParameter::window_duration: return "window_duration";
    case SweepParameter::threshold: return "threshold";
    case SweepParameter::rotation_speed: return "rotation_speed";
  }
  return "unknown";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view name) {
  for (auto p : {SweepParameter::snr_db, SweepParameter::subcarrier_count,
                 SweepParameter::window_duration, SweepParameter::threshold,
                 SweepParameter::rotation_speed}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

void Scenario::validate() const {
  if (machines.empty()) throw std::invalid_argument("scenario has no machines");
  for (std::size_t i = 0; i < machines.size(); ++i) {
    try {
      machines[i].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("machines[" + std::to_string(i) + "]: " + e.what());
    }
    if (machines[i].topological_charge != machines.front().topological_charge) {
      throw std::invalid_argument(
          "all machines must share the antenna's topological_charge");
    }
    if (machines[i].doppler_hz() > plan.sample_rate / 2.0) {
      throw std::invalid_argument("machines[" + std::to_string(i) +
                                  "]: Doppler shift exceeds sample_rate / 2");
    }
  }
  if (std::none_of(machines.begin(), machines.end(),
                   [](const MachineSpec& m) { return m.target; })) {
    throw std::invalid_argument("scenario has no target machine");
  }
  plan.validate();
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
  if (machine_count < 1) throw std::invalid_argument("machine_count must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (sweep && sweep->values.empty()) {
    throw std::invalid_argument("sweep values must be non-empty");
  }
  for (const auto& n : noise) {
    for (auto idx : n.subcarriers) {
      if (idx >= plan.count && !(sweep && sweep->parameter == SweepParameter::subcarrier_count)) {
        throw std::invalid_argument("noise subcarrier index out of range");
      }
    }
    if (!(n.corrupted_fraction >= 0.0 && n.corrupted_fraction <= 1.0)) {
      throw std::invalid_argument("corrupted_fraction must lie in [0, 1]");
    }
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t scenario_seed, std::size_t trial) {
  return mix_seed(scenario_seed, trial);
}

Scenario apply_sweep_value(const Scenario& scenario, SweepParameter parameter,
                           double value) {
  Scenario s = scenario;
  switch (parameter) {
    case SweepParameter::snr_db: {
      bool found = false;
      for (auto& n : s.noise) {
        if (n.kind == NoiseKind::awgn) {
          n.snr_db = value;
          found = true;
        }
      }
      if (!found) {
        NoiseSpec awgn;
        awgn.kind = NoiseKind::awgn;
        awgn.snr_db = value;
        s.noise.push_back(awgn);
      }
      break;
    }
    case SweepParameter::subcarrier_count:
      if (!(value >= 1.0)) throw std::invalid_argument("subcarrier_count sweep value < 1");
      s.plan.count = static_cast<std::size_t>(std::llround(value));
      break;
    case SweepParameter::window_duration:
      s.plan.window_duration = value;
      break;
    case SweepParameter::threshold:
      s.threshold = value;
      break;
    case SweepParameter::rotation_speed: {
      auto it = std::find_if(s.machines.begin(), s.machines.end(),
                             [](const MachineSpec& m) { return m.target; });
      if (it == s.machines.end()) throw std::invalid_argument("no target machine to sweep");
      it->rotation_speed = rpm_to_rad_per_s(value);
      break;
    }
  }
  return s;
}

std::vector<std::size_t> noise_subcarriers(const NoiseSpec& noise,
                                           std::size_t subcarrier_count,
                                           std::uint64_t seed) {
  std::vector<std::size_t> out;
  if (!noise.subcarriers.empty()) {
    for (auto i : noise.subcarriers) {
      if (i < subcarrier_count) out.push_back(i);
    }
  } else if (noise.corrupted_fraction > 0.0) {
    const auto k = static_cast<std::size_t>(
        std::ceil(noise.corrupted_fraction * static_cast<double>(subcarrier_count) - 1e-12));
    std::vector<std::size_t> all(subcarrier_count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with explicit draws so the subset is the same on
    // every standard library.
    for (std::size_t i = 0; i < std::min(k, subcarrier_count); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (subcarrier_count - i));
      std::swap(all[i], all[j]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(k, subcarrier_count)));
  } else {
    out.resize(subcarrier_count);
    std::iota(out.begin(), out.end(), std::size_t{0});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<TrialResult> run_trial(const Scenario& s, std::size_t trial,
                                   const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = trial_seed(s.rng_seed, trial);
  const std::size_t n_sub = s.plan.count;
  const int charge = s.machines.front().topological_charge;

  std::vector<std::vector<std::size_t>> targets_of_noise;
  for (std::size_t j = 0; j < s.noise.size(); ++j) {
    targets_of_noise.push_back(
        noise_subcarriers(s.noise[j], n_sub, mix_seed(seed, 0x5EEDULL + j)));
  }

  std::vector<std::vector<SpeedEstimate>> rows(n_sub);
  for (std::size_t n = 0; n < n_sub; ++n) {
    BasebandWindow w = synthesize(s.machines, s.plan, n);
    double ref = mean_power(w.samples);
    if (ref == 0.0) ref = 1.0;
    for (std::size_t j = 0; j < s.noise.size(); ++j) {
      const auto& hit = targets_of_noise[j];
      if (!std::binary_search(hit.begin(), hit.end(), n)) continue;
      NoiseSpec ns = s.noise[j];
      ns.rng_seed = mix_seed(mix_seed(seed, ns.rng_seed * 64 + j), n);
      w = ns.kind == NoiseKind::awgn ? add_awgn(std::move(w), ns, ref)
                                     : inject_narrowband(std::move(w), ns);
    }
    const Spectrum spec = dft_spectrum(w, s.plan.window_duration);
    rows[n] = extract_speeds(spec, s.machine_count, s.threshold, charge,
                             s.estimator.extraction);
  }
  auto reports = aggregate_all(rows, s.estimator.aggregation);
  std::sort(reports.begin(), reports.end(), [](const AggregateReport& a, const AggregateReport& b) {
    return a.fused_rpm < b.fused_rpm;
  });

  std::vector<double> truth;
  for (const auto& m : s.machines) {
    if (m.target) truth.push_back(m.rpm());
  }
  std::sort(truth.begin(), truth.end());

  std::vector<TrialResult> out;
  std::vector<bool> used(reports.size(), false);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    TrialResult r;
    r.trial = trial;
    r.machine = t;
    r.true_rpm = truth[t];
    std::size_t best = reports.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(reports[i].fused_rpm - truth[t]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best == reports.size()) {
      r.detection_failed = true;
      r.fused_rpm = 0.0;
      r.loc = 0;
      r.loc_ratio = 0.0;
    } else {
      used[best] = true;
      r.fused_rpm = reports[best].fused_rpm;
      r.loc = reports[best].loc;
      r.loc_ratio = reports[best].loc_ratio;
    }
    r.abs_error_rpm = std::abs(r.fused_rpm - r.true_rpm);
    r.pct_error = 100.0 * r.abs_error_rpm / r.true_rpm;
    out.push_back(r);
  }

  if (options.record_timing) {
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    for (auto& r : out) r.wall_time_ms = ms;
  }
  return out;
}

}  // namespace

std::vector<TrialResult> run_scenario(const Scenario& scenario,
                                      const RunOptions& options) {
  scenario.validate();

  struct Point {
    Scenario scenario;
    double value;
  };
  std::vector<Point> points;
  std::string param = "none";
  if (scenario.sweep) {
    param = std::string(to_string(scenario.sweep->parameter));
    for (double v : scenario.sweep->values) {
      Scenario s = apply_sweep_value(scenario, scenario.sweep->parameter, v);
      s.validate();
      points.push_back({std::move(s), v});
    }
  } else {
    points.push_back({scenario, 0.0});
  }

  const std::size_t tasks = points.size() * scenario.trials;
  std::vector<std::vector<TrialResult>> slots(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks) return;
      const auto& point = points[task / scenario.trials];
      try {
        slots[task] = run_trial(point.scenario, task % scenario.trials, options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };

  unsigned threads = options.threads != 0 ? options.threads
                                          : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialResult> results;
  for (std::size_t task = 0; task < tasks; ++task) {
    for (auto& r : slots[task]) {
      r.scenario_name = scenario.name;
      r.sweep_param = param;
      r.sweep_value = points[task / scenario.trials].value;
      results.push_back(std::move(r));
    }
  }
  return results;
}

std::vector<TrialResult> run_coarse_window_sweep(const Scenario& scenario,
                                                 bool fine_disabled,
                                                 const RunOptions& options) {
  if (!scenario.sweep || scenario.sweep->parameter != SweepParameter::window_duration) {
    throw std::invalid_argument("coarse window sweep needs a window_duration sweep");
  }
  for (double v : scenario.sweep->values) {
    if (!(v >= 1.0 && v <= 30.0)) {
      throw std::invalid_argument("window_duration sweep values must lie in [1, 30] s");
    }
  }
  Scenario s = scenario;
  s.estimator.extraction.fine_enabled = !fine_disabled;
  return run_scenario(s, options);
}

namespace {

std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<TrialResult> run_snr_sweep(const Scenario& scenario,
                                       std::span<const double> thresholds,
                                       bool include_interference_cases,
                                       const RunOptions& options) {
  if (!scenario.sweep || scenario.sweep->parameter != SweepParameter::snr_db) {
    throw std::invalid_argument("snr sweep needs an snr_db sweep");
  }
  for (double v : scenario.sweep->values) {
    if (!std::isfinite(v)) throw std::invalid_argument("snr sweep values must be finite");
  }
  if (thresholds.empty()) throw std::invalid_argument("snr sweep needs at least one threshold");

  std::vector<Scenario> cases{scenario};
  if (include_interference_cases) {
    auto target = std::find_if(scenario.machines.begin(), scenario.machines.end(),
                               [](const MachineSpec& m) { return m.target; });
    if (target == scenario.machines.end()) throw std::invalid_argument("no target machine");

    auto with_interferer = [&](double rpm, std::size_t m, const char* suffix) {
      Scenario s = scenario;
      s.name += suffix;
      s.machines = {*target};
      MachineSpec interferer = *target;
      interferer.rotation_speed = rpm_to_rad_per_s(rpm);
      interferer.target = false;
      s.machines.push_back(interferer);
      s.machine_count = m;
      return s;
    };
    cases.push_back(with_interferer(target->rpm() + 8.0, 1, "/similar_interferer"));
    cases.push_back(with_interferer(target->rpm() * 0.55, 1, "/different_interferer_m1"));
    cases.push_back(with_interferer(target->rpm() * 0.55, 2, "/different_interferer_m2"));
  }

  std::vector<TrialResult> out;
  for (const auto& base : cases) {
    for (double th : thresholds) {
      Scenario s = base;
      s.threshold = th;
      s.name = base.name + "@threshold=" + format_value(th);
      auto part = run_scenario(s, options);
      out.insert(out.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
  }
  return out;
}

}  // namespace rotospec
