#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rotospec {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

using Complex = std::complex<double>;

/// One rotating machine seen by the sensor.
///
/// Internally the speed is an angular rate in rad/s; rpm only appears at the
/// configuration and reporting boundary.
struct MachineSpec {
  double rotation_speed = 0.0;        // rad/s
  int topological_charge = 1;         // OAM charge l >= 1
  double reflection_coefficient = 1.0;
  double radial_offset = 0.0275;      // R, m
  double axial_offset = 0.30;         // D_z, m
  double tx_rx_separation = 0.002;    // d_r, m
  /// Interferers (target == false) are synthesized but never scored.
  bool target = true;

  /// Builds a validated spec from a speed in rpm. Throws std::invalid_argument.
  static MachineSpec from_rpm(double rpm, int topological_charge = 1);

  double rpm() const;
  /// Rotational Doppler shift l*omega/(2*pi) in Hz.
  double doppler_hz() const;
  /// Throws std::invalid_argument on a non-physical spec (l < 1, omega <= 0,
  /// negative reflection coefficient or geometry).
  void validate() const;
};

double rpm_to_rad_per_s(double rpm);
double rad_per_s_to_rpm(double omega);

/// N narrowband subcarriers spread across a wider RF band; each one is
/// analysed independently at complex baseband.
struct SubcarrierPlan {
  std::size_t count = 60;
  double subcarrier_bandwidth = 1000.0;  // Hz
  double total_band = 3.0e6;             // Hz
  double carrier_frequency = 5.525e9;    // Hz, band centre
  double sample_rate = 2048.0;           // Hz, per-subcarrier baseband
  double window_duration = 1.0;          // T_d, s

  void validate() const;
  /// fs * T_d; throws if it is not a positive whole number.
  std::size_t samples_per_window() const;
  double bin_width() const { return 1.0 / window_duration; }
  /// RF centre frequency of subcarrier n (uniform spread over total_band).
  double subcarrier_frequency(std::size_t n) const;
  /// k_n = 2*pi*f_n/c in rad/m.
  double wave_number(std::size_t n) const;
};

struct BasebandWindow {
  std::vector<Complex> samples;
  double sample_rate = 0.0;
  std::size_t subcarrier_index = 0;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class NoiseKind { awgn, narrowband };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::awgn;

  // awgn
  double snr_db = 20.0;
  /// Bandwidth over which the SNR is referenced; 0 means the full baseband
  /// (sample_rate).
  double snr_bandwidth = 0.0;

  // narrowband
  double center_frequency = 0.0;  // Hz, baseband
  double bandwidth = 5.0;         // Hz
  double power = 0.0;             // linear, unit-Gamma machine == 1.0

  std::uint64_t rng_seed = 0;

  // Subcarrier selection used by the experiment harness. An explicit list
  // wins; otherwise a seeded ceil(fraction * N) subset; otherwise all.
  std::vector<std::size_t> subcarriers;
  double corrupted_fraction = 0.0;
};

/// Noiseless scattered field of one machine on one subcarrier at time t.
Complex scattered_sample(const MachineSpec& machine, double wave_number,
                         double t);

/// Samples the summed scattered signal of all machines on one subcarrier over
/// one analysis window, optionally adding noise. For AWGN the SNR is taken
/// against the mean power of the noiseless window (unit power if that is
/// zero).
BasebandWindow synthesize(std::span<const MachineSpec> machines,
                          const SubcarrierPlan& plan,
                          std::size_t subcarrier_index,
                          const std::optional<NoiseSpec>& noise = std::nullopt);

/// Adds circular complex Gaussian noise at noise.snr_db relative to
/// reference_power.
BasebandWindow add_awgn(BasebandWindow window, const NoiseSpec& noise,
                        double reference_power);

/// Adds a 3-tone interference cluster spanning noise.bandwidth around
/// noise.center_frequency with total power noise.power. Tone spacing is a
/// whole number of DFT bins, so the realized power does not depend on the
/// seeded tone phases.
BasebandWindow inject_narrowband(BasebandWindow window, const NoiseSpec& noise);

/// Offsets (Hz, relative to the centre) of the interference tones.
std::vector<double> narrowband_tone_offsets(double bandwidth,
                                            double window_duration);

double mean_power(std::span<const Complex> samples);

}  // namespace rotospec
