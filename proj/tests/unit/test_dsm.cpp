#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"
#include "vqt/synthetic.hpp"
#include "vqt/vqt.hpp"

using namespace testutil;

namespace {

vqt::VoiceQualityPreset bundled(const std::string& name) {
  return vqt::load_preset(std::filesystem::path(VQT_PRESET_DIR) / (name + ".json"));
}

vqt::SynthesisParams steady(double f0, double seconds, int fs = 16000) {
  vqt::SynthesisParams p;
  p.sample_rate = fs;
  p.length = static_cast<std::size_t>(seconds * fs);
  p.f0.assign(static_cast<std::size_t>(seconds / p.frame_hop) + 1, f0);
  return p;
}

double band_energy(const std::vector<double>& x, double lo, double hi, double fs) {
  const auto X = vqt::fft::rfft(x);
  const double n = static_cast<double>(x.size());
  double e = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const double f = k * fs / n;
    if (f >= lo && f < hi) e += std::norm(X[k]);
  }
  return e;
}

double rms(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

}  // namespace

TEST(Excitation, DeterministicPartIsPeriodic) {
  const auto preset = bundled("modal");
  auto p = steady(100, 1.0);
  vqt::ExcitationOptions opt;
  opt.noise_gain = 0.0;
  const auto ex = vqt::synthesize_excitation(p, preset, opt);
  double num = 0, d0 = 0, d1 = 0;
  for (std::size_t m = 2000; m + 160 < 14000; ++m) {
    num += ex.samples[m] * ex.samples[m + 160];
    d0 += ex.samples[m] * ex.samples[m];
    d1 += ex.samples[m + 160] * ex.samples[m + 160];
  }
  EXPECT_GT(num / std::sqrt(d0 * d1), 0.99);
}

TEST(Excitation, PulsesFollowF0) {
  const auto pulses = vqt::detail::place_pulses(steady(100, 0.5));
  ASSERT_GT(pulses.size(), 40u);
  for (std::size_t i = 1; i < pulses.size(); ++i) EXPECT_NEAR(pulses[i] - pulses[i - 1], 160.0, 1.0);

  auto mixed = steady(100, 0.6);
  for (std::size_t i = 20; i < 40; ++i) mixed.f0[i] = 0;
  for (double x : vqt::detail::place_pulses(mixed)) EXPECT_TRUE(mixed.voiced_at(x)) << x;
}

TEST(Excitation, SeedDeterminism) {
  const auto preset = bundled("modal");
  auto p = steady(120, 0.5);
  p.noise_seed = 7;
  const auto a = vqt::synthesize_excitation(p, preset);
  const auto b = vqt::synthesize_excitation(p, preset);
  EXPECT_EQ(a.samples, b.samples);
  p.noise_seed = 8;
  const auto c = vqt::synthesize_excitation(p, preset);
  EXPECT_NE(a.samples, c.samples);
  EXPECT_EQ(a.deterministic, c.deterministic);
}

TEST(Excitation, FollowsEnergyTrack) {
  const auto preset = bundled("loud");
  auto p = steady(110, 1.0);
  p.energy.resize(p.f0.size());
  for (std::size_t i = 0; i < p.energy.size(); ++i) p.energy[i] = i < 50 ? 0.05 : 0.2;
  for (std::size_t i = 70; i < 80; ++i) p.f0[i] = 0;
  const auto ex = vqt::synthesize_excitation(p, preset);
  const auto got = vqt::detail::frame_rms(ex.samples, 16000, p.frame_hop, 0.025, p.f0.size());
  for (std::size_t i = 2; i + 2 < p.f0.size(); ++i) {
    // Windows straddling the level step or a voicing change mix two regimes.
    if ((i > 47 && i < 53) || i == 69 || i == 70 || i == 79 || i == 80) continue;
    EXPECT_NEAR(20 * std::log10(got[i] / p.energy[i]), 0.0, 1.0) << i;
  }
}

TEST(Excitation, HarmonicBelowFmNoiseAbove) {
  for (const char* name : {"loud", "soft"}) {
    const auto preset = bundled(name);
    const auto ex = vqt::synthesize_excitation(steady(120, 1.0), preset);
    const double fm = preset.fm_hz;
    const double below = 10 * std::log10(band_energy(ex.deterministic, 300, fm - 300, 16000) /
                                          band_energy(ex.stochastic, 300, fm - 300, 16000));
    const double above = 10 * std::log10(band_energy(ex.deterministic, fm + 400, 7800, 16000) /
                                          band_energy(ex.stochastic, fm + 400, 7800, 16000));
    EXPECT_GT(below, 20.0) << name;
    EXPECT_LT(above, -20.0) << name;
  }
  const auto soft = bundled("soft"), loud = bundled("loud");
  EXPECT_LT(soft.fm_hz, loud.fm_hz);
}

TEST(Excitation, Errors) {
  const auto preset = bundled("modal");
  try {
    vqt::synthesize_excitation({}, preset);
    FAIL();
  } catch (const vqt::Error& e) {
    EXPECT_EQ(e.code(), vqt::Errc::kEmptyParams);
  }
  auto p = steady(100, 0.2);
  p.energy.assign(3, 1.0);
  EXPECT_THROW(vqt::synthesize_excitation(p, preset), vqt::Error);
  auto bad = preset;
  bad.eigenresidual[10] += 0.5;
  try {
    vqt::synthesize_excitation(steady(100, 0.2), bad);
    FAIL();
  } catch (const vqt::Error& e) {
    EXPECT_EQ(e.code(), vqt::Errc::kInvalidPreset);
  }
}

TEST(Preset, JsonRoundTripIsExact) {
  const auto p = bundled("soft");
  const auto q = vqt::preset_from_json(nlohmann::json::parse(vqt::dump_json(vqt::preset_to_json(p))));
  EXPECT_EQ(q.label, p.label);
  EXPECT_EQ(q.fm_hz, p.fm_hz);
  EXPECT_EQ(q.reference_mean_f0, p.reference_mean_f0);
  EXPECT_EQ(q.eigenresidual, p.eigenresidual);
  EXPECT_EQ(q.equalizer, p.equalizer);
  EXPECT_EQ(q.tilt.a, p.tilt.a);
  EXPECT_EQ(q.tilt.gain, p.tilt.gain);
  EXPECT_EQ(q.spectrum.bins, p.spectrum.bins);

  const auto path = std::filesystem::temp_directory_path() / "vqt_preset_roundtrip.json";
  vqt::save_preset(path, p);
  EXPECT_EQ(vqt::load_preset(path).eigenresidual, p.eigenresidual);
  std::filesystem::remove(path);
}

TEST(Preset, SchemaViolationsRejected) {
  auto j = nlohmann::json::parse(vqt::dump_json(vqt::preset_to_json(bundled("modal"))));
  auto missing = j;
  missing.erase("fm_hz");
  EXPECT_THROW(vqt::preset_from_json(missing), vqt::Error);
  auto order = j;
  order["tilt"]["order"] = 3;
  EXPECT_THROW(vqt::preset_from_json(order), vqt::Error);
  auto neg = j;
  neg["fm_hz"] = -1.0;
  EXPECT_THROW(vqt::preset_from_json(neg), vqt::Error);
  EXPECT_THROW(vqt::load_preset("/nonexistent/preset.json"), vqt::Error);
}

TEST(Preset, TooFewUtterances) {
  const auto s = vqt::synth::make_sentence(vqt::synth::modal_quality(), 1);
  try {
    vqt::build_preset({s.audio}, "modal");
    FAIL();
  } catch (const vqt::Error& e) {
    EXPECT_EQ(e.code(), vqt::Errc::kInsufficientData);
  }
}

TEST(Preset, BuiltFromSmallCorpus) {
  std::vector<vqt::AudioBuffer> corpus;
  for (std::uint64_t s = 0; s < 4; ++s)
    corpus.push_back(vqt::synth::make_sentence(vqt::synth::loud_quality(), 40 + s).audio);
  vqt::PresetConfig cfg;
  cfg.min_utterances = 4;
  vqt::PresetReport rep;
  const auto p = vqt::build_preset(corpus, "loud", cfg, &rep);
  EXPECT_EQ(rep.utterances_used, 4);
  EXPECT_GT(rep.residual_frames, 100);
  EXPECT_NEAR(p.fm_hz, 4600.0, 400.0);
  EXPECT_NEAR(p.reference_mean_f0, 115.0, 15.0);
  EXPECT_GT(p.eigenvalue_share, 0.3);
  const auto again = vqt::build_preset(corpus, "loud", cfg);
  EXPECT_EQ(again.eigenresidual, p.eigenresidual);
}

TEST(Transform, OutputIsBoundedAndAligned) {
  const auto s = vqt::synth::make_sentence(vqt::synth::modal_quality(), 77);
  vqt::TransformConfig cfg;
  const auto r = vqt::transform_voice_quality(s.audio, bundled("modal"), bundled("soft"), cfg);
  ASSERT_EQ(r.output.size(), s.audio.size());
  EXPECT_EQ(r.output.sample_rate, s.audio.sample_rate);
  double in_peak = 0, out_peak = 0;
  for (double v : s.audio.samples) in_peak = std::max(in_peak, std::abs(v));
  for (double v : r.output.samples) {
    ASSERT_TRUE(std::isfinite(v));
    out_peak = std::max(out_peak, std::abs(v));
  }
  EXPECT_LE(out_peak, std::min(1.0, cfg.peak_limit * in_peak));
  EXPECT_GT(r.pulses, 50u);
  // Energy follows the input to within a few dB over the utterance.
  EXPECT_NEAR(20 * std::log10(rms(r.output.samples) / rms(s.audio.samples)), 0.0, 3.0);
}

TEST(Transform, IdentityKeepsEnvelope) {
  const auto s = vqt::synth::make_sentence(vqt::synth::modal_quality(), 78);
  const auto modal = bundled("modal");
  const auto r = vqt::transform_voice_quality(s.audio, modal, modal);
  const auto track = vqt::estimate_pitch(s.audio);
  EXPECT_LT(vqt::log_spectral_distance(s.audio, r.output, track), 3.0);
}
