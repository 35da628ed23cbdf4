#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rotospec/signal_model.hpp"

namespace rotospec {

/// Magnitude spectrum of one window over the non-negative frequency bins.
///
/// magnitudes[b] is the normalized DFT magnitude at frequency b * bin_width.
/// Bin 0 (DC) is kept so the fine stage can read the lower neighbour of bin 1,
/// but it never takes part in peak search.
struct Spectrum {
  std::vector<double> magnitudes;
  double bin_width = 1.0;
  double window_duration = 1.0;
  std::size_t subcarrier_index = 0;

  std::size_t max_bin() const { return magnitudes.empty() ? 0 : magnitudes.size() - 1; }
  double frequency(std::size_t bin) const { return static_cast<double>(bin) * bin_width; }
};

struct Peak {
  std::size_t bin = 0;
  double magnitude = 0.0;
  /// Larger of the two immediate neighbours (the fine stage's f_f candidate).
  std::size_t neighbor_bin = 0;
  double neighbor_magnitude = 0.0;
};

/// Local maxima at or above a threshold, ascending by bin.
struct PeakSet {
  std::vector<Peak> peaks;
  double threshold = 0.0;

  bool empty() const { return peaks.empty(); }
  std::size_t size() const { return peaks.size(); }
};

/// Full rectangular-window DFT, scaled by 1/sample_rate so that a unit complex
/// tone centred on a bin has magnitude T_d there. Output index k is frequency
/// k / T_d (indices above N/2 are the negative frequencies).
std::vector<Complex> dft(std::span<const Complex> samples, double sample_rate);

/// Magnitudes of bins 0..floor(N/2). Throws std::invalid_argument when the
/// window length does not equal window_duration * sample_rate.
Spectrum dft_spectrum(const BasebandWindow& window, double window_duration);

/// Bins 1..max that are strictly greater than each existing neighbour (the
/// first and last searchable bins compare against one side only) and whose
/// magnitude is >= threshold. Throws if threshold <= 0.
PeakSet locate_peaks(const Spectrum& spectrum, double threshold);

/// Maps a receiver setting in dBm to a linear spectrum magnitude with
/// 0 dBm == 1.0 (amplitude convention, 20*log10).
double dbm_to_linear(double dbm);
double linear_to_dbm(double magnitude);

}  // namespace rotospec
