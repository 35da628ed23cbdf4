#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rotospec/signal_model.hpp"

using namespace rotospec;

namespace {

// Phase-modulation index of one machine on one subcarrier: the path length
// swings by about R*d_r/r around its mean.
double modulation_index(const MachineSpec& m, double k) {
  const double r = std::hypot(m.radial_offset, m.axial_offset);
  return k * m.radial_offset * m.tx_rx_separation / r;
}

}  // namespace

TEST(Units, RpmRoundTrip) {
  EXPECT_DOUBLE_EQ(rpm_to_rad_per_s(60.0), 2.0 * kPi);
  EXPECT_DOUBLE_EQ(rad_per_s_to_rpm(2.0 * kPi), 60.0);
  for (double rpm : {1.0, 60.0, 2303.0, 7000.0}) {
    EXPECT_NEAR(rad_per_s_to_rpm(rpm_to_rad_per_s(rpm)), rpm, 1e-12 * rpm);
  }
}

TEST(MachineSpec, DopplerFromSpeed) {
  const auto m = MachineSpec::from_rpm(2303.0);
  EXPECT_NEAR(m.doppler_hz(), 2303.0 / 60.0, 1e-12);
  EXPECT_NEAR(MachineSpec::from_rpm(600.0, 3).doppler_hz(), 30.0, 1e-12);
}

TEST(MachineSpec, RejectsNonPhysical) {
  EXPECT_THROW(MachineSpec::from_rpm(100.0, 0), std::invalid_argument);
  EXPECT_THROW(MachineSpec::from_rpm(0.0), std::invalid_argument);
  EXPECT_THROW(MachineSpec::from_rpm(-5.0), std::invalid_argument);
  MachineSpec m = MachineSpec::from_rpm(100.0);
  m.reflection_coefficient = -0.1;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.reflection_coefficient = 1.0;
  m.axial_offset = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(SubcarrierPlan, Frequencies) {
  SubcarrierPlan p;  // 60 x 50 kHz slots across 3 MHz at 5.525 GHz
  EXPECT_DOUBLE_EQ(p.subcarrier_frequency(0), 5.525e9 - 1.5e6 + 25e3);
  EXPECT_DOUBLE_EQ(p.subcarrier_frequency(59), 5.525e9 + 1.5e6 - 25e3);
  EXPECT_NEAR(p.wave_number(0), 2.0 * kPi * 5.523525e9 / 299792458.0, 1e-9);
  EXPECT_EQ(p.samples_per_window(), 2048u);
  EXPECT_DOUBLE_EQ(p.bin_width(), 1.0);
}

TEST(SubcarrierPlan, Validation) {
  SubcarrierPlan p;
  p.count = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.count = 4000;  // 4000 x 1 kHz > 3 MHz
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.window_duration = 0.0004;  // fs*T_d = 0.8192
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.window_duration = 1.5;
  EXPECT_EQ(p.samples_per_window(), 3072u);
}

TEST(Synthesize, UnitModulus) {
  const auto m = MachineSpec::from_rpm(1234.5);
  const SubcarrierPlan plan;
  const auto w = synthesize(std::vector{m}, plan, 3);
  ASSERT_EQ(w.samples.size(), 2048u);
  for (const auto& s : w.samples) EXPECT_NEAR(std::abs(s), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(w.duration(), 1.0);
  EXPECT_EQ(w.subcarrier_index, 3u);
}

TEST(Synthesize, ZeroReflectionIsSilent) {
  auto m = MachineSpec::from_rpm(1000.0);
  m.reflection_coefficient = 0.0;
  const auto w = synthesize(std::vector{m}, SubcarrierPlan{}, 0);
  EXPECT_EQ(mean_power(w.samples), 0.0);
}

TEST(Synthesize, HarmonicLevelsFollowBessel) {
  // 120 rpm puts the fundamental on bin 2 and the first harmonic on bin 4.
  const auto m = MachineSpec::from_rpm(120.0);
  const SubcarrierPlan plan;
  const auto w = synthesize(std::vector{m}, plan, 10);
  const double beta = modulation_index(m, plan.wave_number(10));
  ASSERT_GT(beta, 0.01);
  ASSERT_LT(beta, 0.05);
  EXPECT_NEAR(oracle::dft_bin_magnitude(w.samples, plan.sample_rate, 2), std::cyl_bessel_j(0, beta),
              1e-4);
  EXPECT_NEAR(oracle::dft_bin_magnitude(w.samples, plan.sample_rate, 4), std::cyl_bessel_j(1, beta),
              1e-4);
  EXPECT_NEAR(oracle::dft_bin_magnitude(w.samples, plan.sample_rate, 6), std::cyl_bessel_j(2, beta),
              1e-5);
  EXPECT_LT(oracle::dft_bin_magnitude(w.samples, plan.sample_rate, 3), 1e-9);
}

TEST(Synthesize, NoOffsetMeansNoHarmonics) {
  auto m = MachineSpec::from_rpm(120.0);
  m.tx_rx_separation = 0.0;
  const auto w = synthesize(std::vector{m}, SubcarrierPlan{}, 0);
  EXPECT_NEAR(oracle::dft_bin_magnitude(w.samples, 2048.0, 2), 1.0, 1e-9);
  EXPECT_LT(oracle::dft_bin_magnitude(w.samples, 2048.0, 4), 1e-9);
}

TEST(Synthesize, TopologicalChargeScalesShift) {
  const auto m = MachineSpec::from_rpm(120.0, 3);  // 6 Hz
  auto no_offset = m;
  no_offset.tx_rx_separation = 0.0;
  const auto w = synthesize(std::vector{no_offset}, SubcarrierPlan{}, 0);
  EXPECT_NEAR(oracle::dft_bin_magnitude(w.samples, 2048.0, 6), 1.0, 1e-9);
}

TEST(Synthesize, RejectsBadInput) {
  const SubcarrierPlan plan;
  EXPECT_THROW(synthesize(std::vector<MachineSpec>{}, plan, 0), std::invalid_argument);
  EXPECT_THROW(synthesize(std::vector{MachineSpec::from_rpm(100.0)}, plan, 60),
               std::invalid_argument);
  // 1024 Hz Nyquist at fs = 2048 is 61440 rpm.
  EXPECT_THROW(synthesize(std::vector{MachineSpec::from_rpm(61441.0)}, plan, 0),
               std::invalid_argument);
  EXPECT_NO_THROW(synthesize(std::vector{MachineSpec::from_rpm(61440.0)}, plan, 0));
}

TEST(Awgn, PowerMatchesSnr) {
  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(1 << 16, Complex{});
  NoiseSpec n;
  n.snr_db = 10.0;
  n.rng_seed = 99;
  const auto noisy = add_awgn(w, n, 2.0);
  EXPECT_NEAR(mean_power(noisy.samples), 0.2, 0.2 * 0.02);
}

TEST(Awgn, ReferenceBandwidthScalesNoise) {
  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(1 << 16, Complex{});
  NoiseSpec n;
  n.snr_db = 0.0;
  n.snr_bandwidth = 512.0;  // a quarter of the band carries the SNR
  const auto noisy = add_awgn(w, n, 1.0);
  EXPECT_NEAR(mean_power(noisy.samples), 4.0, 4.0 * 0.02);
}

TEST(Awgn, SeededAndScaled) {
  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(256, Complex{1.0, 0.0});
  NoiseSpec n;
  n.rng_seed = 5;
  n.snr_db = 0.0;
  const auto a = add_awgn(w, n, 1.0);
  const auto b = add_awgn(w, n, 1.0);
  EXPECT_EQ(a.samples, b.samples);
  n.snr_db = 20.0;
  const auto c = add_awgn(w, n, 1.0);
  // Same draws, one tenth the amplitude.
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    EXPECT_NEAR(std::abs(c.samples[i] - w.samples[i]) * 10.0, std::abs(a.samples[i] - w.samples[i]),
                1e-12);
  }
  n.rng_seed = 6;
  EXPECT_NE(add_awgn(w, n, 1.0).samples, c.samples);
}

TEST(Awgn, RejectsWrongKind) {
  NoiseSpec n;
  n.kind = NoiseKind::narrowband;
  EXPECT_THROW(add_awgn(BasebandWindow{}, n, 1.0), std::invalid_argument);
  n.kind = NoiseKind::awgn;
  n.snr_db = std::nan("");
  EXPECT_THROW(add_awgn(BasebandWindow{}, n, 1.0), std::invalid_argument);
}

TEST(Narrowband, ZeroPowerIsIdentity) {
  const auto w = synthesize(std::vector{MachineSpec::from_rpm(900.0)}, SubcarrierPlan{}, 1);
  NoiseSpec n;
  n.kind = NoiseKind::narrowband;
  n.center_frequency = 40.0;
  n.power = 0.0;
  EXPECT_EQ(inject_narrowband(w, n).samples, w.samples);
}

TEST(Narrowband, RealizedPowerIndependentOfPhase) {
  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(2048, Complex{});
  NoiseSpec n;
  n.kind = NoiseKind::narrowband;
  n.center_frequency = 100.0;
  n.bandwidth = 7.0;
  n.power = 2.5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    n.rng_seed = seed;
    EXPECT_NEAR(mean_power(inject_narrowband(w, n).samples), 2.5, 1e-9);
  }
}

TEST(Narrowband, TonesOnExpectedBins) {
  EXPECT_EQ(narrowband_tone_offsets(30.0, 1.0), (std::vector<double>{-10.0, 0.0, 10.0}));
  EXPECT_EQ(narrowband_tone_offsets(0.5, 1.0), (std::vector<double>{-1.0, 0.0, 1.0}));
  EXPECT_EQ(narrowband_tone_offsets(3.0, 10.0), (std::vector<double>{-1.0, 0.0, 1.0}));

  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(2048, Complex{});
  NoiseSpec n;
  n.kind = NoiseKind::narrowband;
  n.center_frequency = 30.0;
  n.bandwidth = 30.0;
  n.power = 3.0;
  const auto out = inject_narrowband(w, n);
  for (long long bin : {20, 30, 40}) {
    EXPECT_NEAR(oracle::dft_bin_magnitude(out.samples, 2048.0, bin), 1.0, 1e-9) << bin;
  }
  EXPECT_LT(oracle::dft_bin_magnitude(out.samples, 2048.0, 25), 1e-9);
}

TEST(Narrowband, RejectsOutOfBand) {
  BasebandWindow w;
  w.sample_rate = 2048.0;
  w.samples.assign(2048, Complex{});
  NoiseSpec n;
  n.kind = NoiseKind::narrowband;
  n.center_frequency = 1020.0;
  n.bandwidth = 10.0;
  n.power = 1.0;
  EXPECT_THROW(inject_narrowband(w, n), std::invalid_argument);
  n.center_frequency = 100.0;
  n.power = -1.0;
  EXPECT_THROW(inject_narrowband(w, n), std::invalid_argument);
}

TEST(Synthesize, OptionalNoiseUsesWindowPower) {
  const std::vector machines{MachineSpec::from_rpm(900.0), MachineSpec::from_rpm(2000.0)};
  NoiseSpec n;
  n.snr_db = 0.0;
  n.rng_seed = 3;
  const SubcarrierPlan plan;
  const auto clean = synthesize(machines, plan, 2);
  const auto noisy = synthesize(machines, plan, 2, n);
  EXPECT_EQ(noisy.samples, add_awgn(clean, n, mean_power(clean.samples)).samples);
}
