#include "rotospec/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace rotospec {
namespace {

// FFTW's planner is not re-entrant; execution of an existing plan on new
// arrays is. Plans are created once per length and kept for the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan forward(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (p == nullptr) throw std::runtime_error("fftw planning failed");
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

}  // namespace

std::vector<Complex> dft(std::span<const Complex> samples, double sample_rate) {
  if (samples.empty()) return {};
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be > 0");
  const std::size_t n = samples.size();
  std::vector<Complex> in(samples.begin(), samples.end());
  std::vector<Complex> out(n);
  fftw_plan plan = PlanCache::instance().forward(n);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / sample_rate;
  for (auto& x : out) x *= scale;
  return out;
}

Spectrum dft_spectrum(const BasebandWindow& window, double window_duration) {
  if (!(window_duration > 0.0)) {
    throw std::invalid_argument("window_duration must be > 0");
  }
  const double expected = window_duration * window.sample_rate;
  if (std::abs(static_cast<double>(window.samples.size()) - expected) > 1e-9 * expected) {
    throw std::invalid_argument("window length does not match duration * sample_rate");
  }
  const auto full = dft(window.samples, window.sample_rate);
  Spectrum s;
  s.bin_width = 1.0 / window_duration;
  s.window_duration = window_duration;
  s.subcarrier_index = window.subcarrier_index;
  const std::size_t half = full.size() / 2;
  s.magnitudes.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) s.magnitudes[k] = std::abs(full[k]);
  return s;
}

PeakSet locate_peaks(const Spectrum& spectrum, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");
  PeakSet out;
  out.threshold = threshold;
  const auto& mag = spectrum.magnitudes;
  const std::size_t last = spectrum.max_bin();
  if (last < 1) return out;

  for (std::size_t b = 1; b <= last; ++b) {
    const double m = mag[b];
    if (m < threshold) continue;
    const bool has_left = b > 1;  // DC is not a competitor
    const bool has_right = b < last;
    if (has_left && !(m > mag[b - 1])) continue;
    if (has_right && !(m > mag[b + 1])) continue;

    Peak p{b, m, b, 0.0};
    const double left = mag[b - 1];
    const double right = has_right ? mag[b + 1] : -1.0;
    if (right >= left) {
      p.neighbor_bin = b + 1;
      p.neighbor_magnitude = right;
    } else {
      p.neighbor_bin = b - 1;
      p.neighbor_magnitude = left;
    }
    out.peaks.push_back(p);
  }
  return out;
}

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 20.0); }
double linear_to_dbm(double magnitude) { return 20.0 * std::log10(magnitude); }

}  // namespace rotospec
