#include "rotospec/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rotospec {

double rpm_to_rad_per_s(double rpm) { return rpm * 2.0 * kPi / 60.0; }
double rad_per_s_to_rpm(double omega) { return omega * 60.0 / (2.0 * kPi); }

MachineSpec MachineSpec::from_rpm(double rpm, int topological_charge) {
  MachineSpec m;
  m.rotation_speed = rpm_to_rad_per_s(rpm);
  m.topological_charge = topological_charge;
  m.validate();
  return m;
}

double MachineSpec::rpm() const { return rad_per_s_to_rpm(rotation_speed); }

double MachineSpec::doppler_hz() const {
  return rotation_speed * topological_charge / (2.0 * kPi);
}

void MachineSpec::validate() const {
  if (topological_charge < 1) {
    throw std::invalid_argument(
        "topological_charge must be >= 1 (l = 0 has no rotational Doppler "
        "shift), got " + std::to_string(topological_charge));
  }
  if (!(rotation_speed > 0.0) || !std::isfinite(rotation_speed)) {
    throw std::invalid_argument("rotation_speed must be a positive finite rate");
  }
  if (!(reflection_coefficient >= 0.0) || !std::isfinite(reflection_coefficient)) {
    throw std::invalid_argument("reflection_coefficient must be >= 0");
  }
  if (!(radial_offset >= 0.0) || !(axial_offset >= 0.0) ||
      !(tx_rx_separation >= 0.0)) {
    throw std::invalid_argument("geometry offsets must be >= 0");
  }
}

void SubcarrierPlan::validate() const {
  if (count < 1) throw std::invalid_argument("subcarrier count must be >= 1");
  if (!(subcarrier_bandwidth > 0.0) || !(total_band > 0.0)) {
    throw std::invalid_argument("subcarrier and total bandwidth must be > 0");
  }
  if (static_cast<double>(count) * subcarrier_bandwidth > total_band) {
    throw std::invalid_argument(
        "count * subcarrier_bandwidth exceeds total_band");
  }
  if (!(carrier_frequency > total_band / 2.0)) {
    throw std::invalid_argument("carrier_frequency must exceed half the band");
  }
  if (!(sample_rate > 0.0) || !(window_duration > 0.0)) {
    throw std::invalid_argument("sample_rate and window_duration must be > 0");
  }
  (void)samples_per_window();
}

std::size_t SubcarrierPlan::samples_per_window() const {
  const double n = sample_rate * window_duration;
  const double rounded = std::round(n);
  if (!(rounded >= 1.0) || std::abs(n - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument(
        "sample_rate * window_duration must be a positive whole number");
  }
  return static_cast<std::size_t>(rounded);
}

double SubcarrierPlan::subcarrier_frequency(std::size_t n) const {
  const double spacing = total_band / static_cast<double>(count);
  return carrier_frequency - total_band / 2.0 +
         (static_cast<double>(n) + 0.5) * spacing;
}

double SubcarrierPlan::wave_number(std::size_t n) const {
  return 2.0 * kPi * subcarrier_frequency(n) / kSpeedOfLight;
}

Complex scattered_sample(const MachineSpec& m, double k, double t) {
  const double r2 = m.radial_offset * m.radial_offset +
                    m.axial_offset * m.axial_offset;
  const double wt = m.rotation_speed * t;
  const double path = std::sqrt(r2 - 2.0 * m.radial_offset *
                                         m.tx_rx_separation * std::cos(wt) +
                                m.tx_rx_separation * m.tx_rx_separation);
  const double phase = m.topological_charge * wt - k * std::sqrt(r2) - k * path;
  return std::polar(m.reflection_coefficient, phase);
}

double mean_power(std::span<const Complex> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

BasebandWindow synthesize(std::span<const MachineSpec> machines,
                          const SubcarrierPlan& plan,
                          std::size_t subcarrier_index,
                          const std::optional<NoiseSpec>& noise) {
  if (machines.empty()) throw std::invalid_argument("no machines to synthesize");
  plan.validate();
  if (subcarrier_index >= plan.count) {
    throw std::invalid_argument("subcarrier_index out of range");
  }
  for (const auto& m : machines) {
    m.validate();
    if (m.doppler_hz() > plan.sample_rate / 2.0) {
      throw std::invalid_argument(
          "machine Doppler shift exceeds the baseband Nyquist limit");
    }
  }

  const std::size_t n = plan.samples_per_window();
  const double k = plan.wave_number(subcarrier_index);
  BasebandWindow w;
  w.sample_rate = plan.sample_rate;
  w.subcarrier_index = subcarrier_index;
  w.samples.assign(n, Complex{});
  for (const auto& m : machines) {
    if (m.reflection_coefficient == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / plan.sample_rate;
      w.samples[i] += scattered_sample(m, k, t);
    }
  }

  if (noise) {
    if (noise->kind == NoiseKind::awgn) {
      double ref = mean_power(w.samples);
      if (ref == 0.0) ref = 1.0;
      w = add_awgn(std::move(w), *noise, ref);
    } else {
      w = inject_narrowband(std::move(w), *noise);
    }
  }
  return w;
}

BasebandWindow add_awgn(BasebandWindow window, const NoiseSpec& noise,
                        double reference_power) {
  if (noise.kind != NoiseKind::awgn) {
    throw std::invalid_argument("add_awgn requires an awgn NoiseSpec");
  }
  if (!std::isfinite(noise.snr_db)) {
    throw std::invalid_argument("snr_db must be finite");
  }
  const double ref_bw =
      noise.snr_bandwidth > 0.0 ? noise.snr_bandwidth : window.sample_rate;
  // Noise power inside ref_bw hits the SNR; white noise spreads over fs.
  const double variance = reference_power * std::pow(10.0, -noise.snr_db / 10.0) *
                          (window.sample_rate / ref_bw);
  const double per_axis = std::sqrt(variance / 2.0);

  std::mt19937_64 rng(noise.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& s : window.samples) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    s += Complex(per_axis * re, per_axis * im);
  }
  return window;
}

std::vector<double> narrowband_tone_offsets(double bandwidth,
                                            double window_duration) {
  const double bin = 1.0 / window_duration;
  const double spacing =
      std::max(1.0, std::round(bandwidth / 3.0 / bin)) * bin;
  return {-spacing, 0.0, spacing};
}

BasebandWindow inject_narrowband(BasebandWindow window, const NoiseSpec& noise) {
  if (noise.kind != NoiseKind::narrowband) {
    throw std::invalid_argument("inject_narrowband requires a narrowband NoiseSpec");
  }
  if (!(noise.power >= 0.0) || !(noise.bandwidth >= 0.0)) {
    throw std::invalid_argument("narrowband power and bandwidth must be >= 0");
  }
  const double nyquist = window.sample_rate / 2.0;
  if (!(std::abs(noise.center_frequency) + noise.bandwidth / 2.0 < nyquist)) {
    throw std::invalid_argument(
        "narrowband interference lies outside the baseband window");
  }
  if (noise.power == 0.0) return window;

  const auto offsets = narrowband_tone_offsets(noise.bandwidth, window.duration());
  const double amplitude =
      std::sqrt(noise.power / static_cast<double>(offsets.size()));

  std::mt19937_64 rng(noise.rng_seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  for (double off : offsets) {
    const double f = noise.center_frequency + off;
    const double phi = phase_dist(rng);
    for (std::size_t i = 0; i < window.samples.size(); ++i) {
      const double t = static_cast<double>(i) / window.sample_rate;
      window.samples[i] += std::polar(amplitude, 2.0 * kPi * f * t + phi);
    }
  }
  return window;
}

}  // namespace rotospec
