#pragma once

#include <cstddef>
#include <vector>

#include "rotospec/spectrum.hpp"

namespace rotospec {

/// Rotation speed in rpm from a Doppler shift: 60 * delta_f / l.
/// Throws std::invalid_argument for l <= 0.
double rpm_from_doppler(double delta_f_hz, int topological_charge);

/// Doppler shift in Hz from an angular speed: omega * l / (2*pi).
/// Throws std::invalid_argument for l < 0.
double doppler_from_rotation(double omega_rad_s, int topological_charge);

/// Allowed distance, in bins, between a peak and k times a candidate
/// fundamental. With scale_with_index the tolerance is max(floor, ceil(k/2)),
/// which covers the k/2-bin drift a half-bin fundamental error causes at the
/// k-th harmonic; without it the tolerance is the flat floor.
struct HarmonicTolerance {
  int floor_bins = 1;
  bool scale_with_index = true;

  int operator()(int k) const;
};

struct CoarseConfig {
  int max_harmonic = 8;   // highest harmonic index searched (K_max)
  int min_harmonics = 2;  // members needed to accept a family (k = 1 counts)
  HarmonicTolerance tolerance;
};

struct HarmonicFamily {
  std::size_t fundamental_bin = 0;
  std::vector<std::size_t> member_bins;
  std::vector<double> member_magnitudes;
  /// Set for isolated peaks promoted only to fill the requested machine count.
  bool low_confidence = false;
};

enum class EstimateStage { coarse_only, fine };

struct SpeedEstimate {
  std::size_t machine_index = 0;
  std::size_t subcarrier_index = 0;
  double coarse_hz = 0.0;
  double fine_hz = 0.0;
  double rpm = 0.0;
  EstimateStage stage = EstimateStage::coarse_only;
  bool low_confidence = false;

  /// The Doppler frequency the rpm was derived from.
  double doppler_hz() const { return stage == EstimateStage::fine ? fine_hz : coarse_hz; }
};

/// Groups peaks into up to machine_count harmonic families, lowest candidate
/// first: each candidate claims every remaining peak within tolerance of one
/// of its multiples k = 1..max_harmonic, and its members are removed before
/// the next candidate. Candidates with fewer than min_harmonics members are
/// set aside; if that leaves fewer than machine_count families, the strongest
/// set-aside peaks are promoted as single-member, low-confidence families.
/// A faded fundamental is not reconstructed: the lowest surviving harmonic is
/// taken as the fundamental. Result is ascending by fundamental bin.
std::vector<HarmonicFamily> coarse_estimate(const PeakSet& peaks,
                                            std::size_t machine_count,
                                            const CoarseConfig& config = {});

/// Sub-bin refinement from spectral leakage around the fundamental bin f_c.
/// The larger neighbour f_f is chosen (ties go to f_c + 1) and the fractional
/// offset is A_f / (A_c + A_f), moved towards f_f. Falls back to a coarse-only
/// estimate when A_c + A_f == 0. Throws std::invalid_argument if the
/// fundamental bin is 0 or outside the spectrum.
SpeedEstimate fine_estimate(const Spectrum& spectrum, const HarmonicFamily& family,
                            int topological_charge = 1);

/// Coarse-only estimate for a family (no leakage compensation).
SpeedEstimate coarse_only_estimate(const Spectrum& spectrum,
                                   const HarmonicFamily& family,
                                   int topological_charge = 1);

struct ExtractionConfig {
  CoarseConfig coarse;
  bool fine_enabled = true;
};

/// locate_peaks -> coarse_estimate -> fine_estimate -> rpm for one spectrum.
/// Returns at most machine_count estimates, ascending by rpm, with
/// machine_index set to that rank.
std::vector<SpeedEstimate> extract_speeds(const Spectrum& spectrum,
                                          std::size_t machine_count,
                                          double threshold,
                                          int topological_charge = 1,
                                          const ExtractionConfig& config = {});

}  // namespace rotospec
