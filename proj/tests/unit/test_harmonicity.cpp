#include <gtest/gtest.h>

#include "helpers.hpp"
#include "vqt/harmonicity.hpp"
#include "vqt/synthetic.hpp"

using namespace testutil;

namespace {

vqt::AnalysisTrack constant_track(double f0, std::size_t samples, int fs) {
  vqt::AnalysisTrack tr;
  tr.sample_rate = fs;
  const std::size_t frames = samples / static_cast<std::size_t>(tr.frame_hop * fs) + 1;
  tr.f0.assign(frames, f0);
  tr.voiced.assign(frames, true);
  tr.periodicity.assign(frames, 1.0);
  tr.update_mean_t0();
  return tr;
}

std::vector<double> harmonics(double f0, double top, std::size_t n, double fs) {
  std::vector<double> x(n, 0.0);
  for (int k = 1; k * f0 < top; ++k)
    for (std::size_t i = 0; i < n; ++i) x[i] += std::cos(2 * kPi * k * f0 * i / fs + 0.7 * k * k);
  return x;
}

}  // namespace

TEST(Fm, HarmonicsBelowNoiseAbove) {
  for (double f0 : {100.0, 140.0}) {
    const auto x = vqt::synth::harmonic_plus_noise(f0, 3000, 1.0, 16000, 20.0, 3);
    const vqt::AudioBuffer buf{x, 16000};
    const auto m = vqt::max_voiced_track(buf, constant_track(f0, buf.size(), 16000));
    ASSERT_GT(m.fm.size(), 50u);
    EXPECT_NEAR(m.mean, 3000.0, 200.0) << f0;
  }
}

TEST(Fm, FullyHarmonicReachesNyquist) {
  const double fs = 16000, f0 = 125;
  const auto x = harmonics(f0, fs / 2, 640, fs);
  const auto fr = vqt::estimate_max_voiced_frequency(x, f0, fs);
  EXPECT_GE(fr.fm, 0.9 * fs / 2);
}

TEST(Fm, WhiteNoiseHasNoHarmonics) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto x = white_noise(640, seed);
    const auto fr = vqt::estimate_max_voiced_frequency(x, 100, 16000);
    EXPECT_LE(fr.fm, 200.0) << seed;
  }
}

TEST(Fm, ShortFrameRejected) {
  try {
    vqt::estimate_max_voiced_frequency(std::vector<double>(100, 1.0), 100, 16000);
    FAIL();
  } catch (const vqt::Error& e) {
    EXPECT_EQ(e.code(), vqt::Errc::kFrameTooShort);
  }
}

TEST(Fm, ResultIsAHarmonicWithEnoughVoicedBelow) {
  const double f0 = 110;
  const auto x = vqt::synth::harmonic_plus_noise(f0, 2500, 0.2, 16000, 20.0, 9);
  const auto fr = vqt::estimate_max_voiced_frequency(std::span<const double>(x).subspan(500, 700), f0, 16000);
  const int k = static_cast<int>(std::lround(fr.fm / f0));
  EXPECT_NEAR(fr.fm, k * f0, 1e-9);
  int voiced = 0;
  for (int i = 0; i < k; ++i) voiced += fr.voiced[i];
  EXPECT_TRUE(fr.voiced[k - 1]);
  EXPECT_GE(voiced, 0.8 * k);
}

TEST(Fm, MedianSmoothingStaysWithinRuns) {
  const std::vector<double> v{1, 9, 1, 1, 5, 5, 100, 5};
  const std::vector<std::size_t> idx{0, 1, 2, 3, 10, 11, 12, 13};
  const auto s = vqt::median_smooth_runs(v, idx, 3);
  EXPECT_EQ(s, (std::vector<double>{1, 1, 1, 1, 5, 5, 5, 5}));
  for (double x : s) EXPECT_NE(std::find(v.begin(), v.end(), x), v.end());
}
