#include "rotospec/speed_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <list>
#include <stdexcept>

namespace rotospec {

double rpm_from_doppler(double delta_f_hz, int topological_charge) {
  if (topological_charge <= 0) {
    throw std::invalid_argument("topological charge must be >= 1");
  }
  return 60.0 * delta_f_hz / topological_charge;
}

double doppler_from_rotation(double omega_rad_s, int topological_charge) {
  if (topological_charge < 0) {
    throw std::invalid_argument("topological charge must be >= 0");
  }
  return omega_rad_s * topological_charge / (2.0 * kPi);
}

int HarmonicTolerance::operator()(int k) const {
  if (!scale_with_index) return floor_bins;
  return std::max(floor_bins, (k + 1) / 2);
}

namespace {

bool is_member(std::size_t peak_bin, std::size_t fundamental,
               const CoarseConfig& cfg) {
  const auto p = static_cast<long long>(peak_bin);
  const auto f = static_cast<long long>(fundamental);
  for (int k = 1; k <= cfg.max_harmonic; ++k) {
    if (std::llabs(p - k * f) <= cfg.tolerance(k)) return true;
  }
  return false;
}

}  // namespace

std::vector<HarmonicFamily> coarse_estimate(const PeakSet& peaks,
                                            std::size_t machine_count,
                                            const CoarseConfig& config) {
  if (machine_count < 1) throw std::invalid_argument("machine count must be >= 1");
  if (config.max_harmonic < 1 || config.min_harmonics < 1) {
    throw std::invalid_argument("max_harmonic and min_harmonics must be >= 1");
  }

  std::list<Peak> remaining(peaks.peaks.begin(), peaks.peaks.end());
  remaining.sort([](const Peak& a, const Peak& b) { return a.bin < b.bin; });

  std::vector<HarmonicFamily> families;
  std::vector<Peak> set_aside;

  while (families.size() < machine_count && !remaining.empty()) {
    const Peak candidate = remaining.front();
    HarmonicFamily family;
    family.fundamental_bin = candidate.bin;
    std::vector<std::list<Peak>::iterator> claimed;
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      if (is_member(it->bin, candidate.bin, config)) {
        family.member_bins.push_back(it->bin);
        family.member_magnitudes.push_back(it->magnitude);
        claimed.push_back(it);
      }
    }
    if (static_cast<int>(family.member_bins.size()) >= config.min_harmonics) {
      for (auto it : claimed) remaining.erase(it);
      families.push_back(std::move(family));
    } else {
      set_aside.push_back(candidate);
      remaining.pop_front();
    }
  }

  if (families.size() < machine_count && !set_aside.empty()) {
    std::stable_sort(set_aside.begin(), set_aside.end(),
                     [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
    for (const auto& p : set_aside) {
      if (families.size() >= machine_count) break;
      HarmonicFamily single;
      single.fundamental_bin = p.bin;
      single.member_bins = {p.bin};
      single.member_magnitudes = {p.magnitude};
      single.low_confidence = true;
      families.push_back(std::move(single));
    }
  }

  std::sort(families.begin(), families.end(),
            [](const HarmonicFamily& a, const HarmonicFamily& b) {
              return a.fundamental_bin < b.fundamental_bin;
            });
  return families;
}

SpeedEstimate coarse_only_estimate(const Spectrum& spectrum,
                                   const HarmonicFamily& family,
                                   int topological_charge) {
  if (family.fundamental_bin > spectrum.max_bin()) {
    throw std::invalid_argument("fundamental bin outside spectrum");
  }
  SpeedEstimate e;
  e.subcarrier_index = spectrum.subcarrier_index;
  e.coarse_hz = spectrum.frequency(family.fundamental_bin);
  e.fine_hz = e.coarse_hz;
  e.stage = EstimateStage::coarse_only;
  e.low_confidence = family.low_confidence;
  e.rpm = rpm_from_doppler(e.coarse_hz, topological_charge);
  return e;
}

SpeedEstimate fine_estimate(const Spectrum& spectrum, const HarmonicFamily& family,
                            int topological_charge) {
  const std::size_t fc = family.fundamental_bin;
  if (fc == 0 || fc > spectrum.max_bin()) {
    throw std::invalid_argument("fundamental bin must lie in 1..max_bin");
  }
  SpeedEstimate e = coarse_only_estimate(spectrum, family, topological_charge);

  const auto& mag = spectrum.magnitudes;
  const double a_c = mag[fc];
  const double left = mag[fc - 1];
  const bool has_right = fc + 1 <= spectrum.max_bin();
  const double right = has_right ? mag[fc + 1] : -1.0;

  double a_f = 0.0;
  double direction = 0.0;
  if (right >= left) {
    a_f = right;
    direction = 1.0;
  } else {
    a_f = left;
    direction = -1.0;
  }
  const double total = a_c + a_f;
  if (!(total > 0.0)) return e;

  const double delta = a_f / total;
  e.fine_hz = (static_cast<double>(fc) + direction * delta) * spectrum.bin_width;
  e.stage = EstimateStage::fine;
  e.rpm = rpm_from_doppler(e.fine_hz, topological_charge);
  return e;
}

std::vector<SpeedEstimate> extract_speeds(const Spectrum& spectrum,
                                          std::size_t machine_count,
                                          double threshold,
                                          int topological_charge,
                                          const ExtractionConfig& config) {
  if (machine_count < 1) throw std::invalid_argument("machine count must be >= 1");
  if (topological_charge < 1) throw std::invalid_argument("topological charge must be >= 1");

  const PeakSet peaks = locate_peaks(spectrum, threshold);
  const auto families = coarse_estimate(peaks, machine_count, config.coarse);

  std::vector<SpeedEstimate> out;
  out.reserve(families.size());
  for (const auto& fam : families) {
    out.push_back(config.fine_enabled
                      ? fine_estimate(spectrum, fam, topological_charge)
                      : coarse_only_estimate(spectrum, fam, topological_charge));
  }
  std::stable_sort(out.begin(), out.end(), [](const SpeedEstimate& a, const SpeedEstimate& b) {
    return a.rpm < b.rpm;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].machine_index = i;
  return out;
}

}  // namespace rotospec
