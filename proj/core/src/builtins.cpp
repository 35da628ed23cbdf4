#include <functional>
#include <stdexcept>
#include <string>

#include "rotospec/harness.hpp"
#include "rotospec/spectrum.hpp"

namespace rotospec {
namespace {

MachineSpec machine(double rpm, bool target = true) {
  MachineSpec m = MachineSpec::from_rpm(rpm);
  m.target = target;
  return m;
}

NoiseSpec awgn(double snr_db) {
  NoiseSpec n;
  n.kind = NoiseKind::awgn;
  n.snr_db = snr_db;
  return n;
}

Sweep snr_points() {
  return {SweepParameter::snr_db, {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0}};
}

Scenario single_machine() {
  Scenario s;
  s.name = "single_machine";
  s.machines = {machine(2303.0)};
  s.plan.count = 60;
  s.trials = 5;
  return s;
}

Scenario three_machines() {
  Scenario s;
  s.name = "three_machines";
  // Speeds chosen so no machine's fundamental or 2nd harmonic falls inside
  // another machine's harmonic tolerance windows.
  s.machines = {machine(1210.0), machine(2750.0), machine(5230.0)};
  s.plan.count = 10;
  s.machine_count = 3;
  s.trials = 5;
  return s;
}

Scenario speed_span() {
  Scenario s;
  s.name = "speed_span";
  s.machines = {machine(2303.0)};
  s.plan.count = 10;
  s.sweep = Sweep{SweepParameter::rotation_speed,
                  {60.0, 61.7, 120.0, 500.0, 1000.0, 2303.0, 4000.0, 5676.0, 7000.0}};
  return s;
}

Scenario coarse_window_sweep() {
  Scenario s;
  s.name = "coarse_window_sweep";
  s.machines = {machine(2303.0)};
  s.plan.count = 10;
  s.estimator.extraction.fine_enabled = false;
  s.sweep = Sweep{SweepParameter::window_duration, {1.0, 2.0, 5.0, 10.0, 18.0, 30.0}};
  return s;
}

Scenario narrowband_sweep() {
  Scenario s;
  s.name = "narrowband_sweep";
  s.machines = {machine(2303.0)};
  NoiseSpec nb;
  nb.kind = NoiseKind::narrowband;
  // Tones at 20, 30 and 40 Hz: the 20/40 pair reads as a harmonic family below
  // the machine, so a hit subcarrier reports ~1200 rpm.
  nb.center_frequency = 30.0;
  nb.bandwidth = 30.0;
  nb.power = 10.0;
  nb.corrupted_fraction = 0.1;
  s.noise = {awgn(20.0), nb};
  // Above the 20 dB noise floor, below the machine's fundamental.
  s.threshold = dbm_to_linear(-20.0);
  s.sweep = Sweep{SweepParameter::subcarrier_count, {1.0, 5.0, 10.0, 15.0, 30.0, 60.0}};
  s.trials = 20;
  return s;
}

Scenario awgn_sweep() {
  Scenario s;
  s.name = "awgn_sweep";
  s.machines = {machine(2242.0)};
  s.plan.count = 60;
  s.threshold = dbm_to_linear(-5.0);
  s.noise = {awgn(0.0)};
  s.sweep = snr_points();
  s.trials = 100;
  return s;
}

Scenario awgn_sweep_low_threshold() {
  Scenario s = awgn_sweep();
  s.name = "awgn_sweep_low_threshold";
  s.threshold = dbm_to_linear(-20.0);
  s.plan.count = 30;
  s.trials = 50;
  return s;
}

Scenario interferer_similar() {
  Scenario s;
  s.name = "interferer_similar";
  s.machines = {machine(1227.0), machine(1235.0, false)};
  s.plan.count = 10;
  s.threshold = dbm_to_linear(-5.0);
  s.noise = {awgn(0.0)};
  s.sweep = snr_points();
  s.trials = 20;
  return s;
}

Scenario interferer_different(std::size_t m) {
  Scenario s;
  s.name = m == 1 ? "interferer_different_m1" : "interferer_different_m2";
  s.machines = {machine(2242.0), machine(1227.0, false)};
  s.machine_count = m;
  s.plan.count = 10;
  s.threshold = dbm_to_linear(-5.0);
  s.noise = {awgn(0.0)};
  s.sweep = snr_points();
  s.trials = 20;
  return s;
}

struct Entry {
  const char* name;
  const char* description;
  std::function<Scenario()> make;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {"single_machine", "one machine at 2303 rpm, 60 subcarriers, noiseless", single_machine},
      {"three_machines", "machines at 1210/2750/5230 rpm resolved with M = 3, noiseless",
       three_machines},
      {"speed_span", "one machine swept from 60 to 7000 rpm, noiseless", speed_span},
      {"coarse_window_sweep", "coarse-only estimation with T_d swept from 1 to 30 s",
       coarse_window_sweep},
      {"narrowband_sweep",
       "subcarrier count swept 1..60 with 10% of subcarriers hit by narrowband interference",
       narrowband_sweep},
      {"awgn_sweep", "AWGN SNR swept -10..15 dB at a -5 dBm threshold", awgn_sweep},
      {"awgn_sweep_low_threshold", "AWGN SNR swept -10..15 dB at a -20 dBm threshold",
       awgn_sweep_low_threshold},
      {"interferer_similar", "target at 1227 rpm with an 8 rpm-off interferer, M = 1",
       interferer_similar},
      {"interferer_different_m1", "target at 2242 rpm, interferer at 1227 rpm, M = 1",
       [] { return interferer_different(1); }},
      {"interferer_different_m2", "target at 2242 rpm, interferer at 1227 rpm, M = 2",
       [] { return interferer_different(2); }},
  };
  return entries;
}

}  // namespace

std::vector<BuiltinInfo> list_builtins() {
  std::vector<BuiltinInfo> out;
  for (const auto& e : registry()) out.push_back({e.name, e.description});
  return out;
}

Scenario builtin_scenario(std::string_view name) {
  for (const auto& e : registry()) {
    if (name == e.name) return e.make();
  }
  throw std::invalid_argument("unknown builtin scenario '" + std::string(name) + "'");
}

}  // namespace rotospec
