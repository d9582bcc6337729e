#pragma once

// Deterministic plus stochastic excitation model, voice-quality presets and
// the preset-driven transformation of analysed speech.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vqt/analysis.hpp"
#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/eigen_basis.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"
#include "vqt/framing.hpp"
#include "vqt/harmonicity.hpp"
#include "vqt/lpc.hpp"
#include "vqt/tilt.hpp"

namespace vqt {

struct VoiceQualityPreset {
  int format_version = 1;
  std::string label;
  double fm_hz = 0.0;
  double reference_mean_f0 = 0.0;
  int frame_length = 0;
  std::vector<double> eigenresidual;
  std::vector<double> mean_frame;
  double eigenvalue_share = 0.0;
  std::vector<double> equalizer;  // per-bin gain on the eigenresidual, frame_length/2 + 1; empty = none
  ArModel tilt;
  AveragedSpectrum spectrum;
};

inline void validate(const VoiceQualityPreset& p) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::kInvalidPreset, what);
  };
  check(p.format_version == 1, "unsupported format_version");
  check(!p.label.empty(), "empty label");
  check(std::isfinite(p.fm_hz) && p.fm_hz > 0 && p.fm_hz <= 12000, "fm_hz outside (0, 12000]");
  check(std::isfinite(p.reference_mean_f0) && p.reference_mean_f0 > 0,
        "reference_mean_f0 must be positive");
  check(p.frame_length >= 32 && p.frame_length % 2 == 0, "frame_length must be even and >= 32");
  check(static_cast<int>(p.eigenresidual.size()) == p.frame_length,
        "eigenresidual length differs from frame_length");
  for (double v : p.eigenresidual) check(std::isfinite(v), "non-finite eigenresidual sample");
  check(std::abs(dsp::energy(p.eigenresidual) - 1.0) < 1e-9, "eigenresidual is not unit-norm");
  check(p.mean_frame.empty() || static_cast<int>(p.mean_frame.size()) == p.frame_length,
        "mean_frame length differs from frame_length");
  check(p.equalizer.empty() || static_cast<int>(p.equalizer.size()) == p.frame_length / 2 + 1,
        "equalizer length differs from frame_length/2 + 1");
  for (double g : p.equalizer) check(std::isfinite(g) && g > 0, "equalizer gains must be positive");
  check(p.tilt.order() >= 1 && p.tilt.a[0] == 1.0, "tilt model must be monic");
  check(std::isfinite(p.tilt.gain) && p.tilt.gain > 0, "tilt gain must be positive");
  check(is_minimum_phase(p.tilt.a), "tilt model is unstable");
  check(p.spectrum.bins.empty() ||
            static_cast<int>(p.spectrum.bins.size()) == p.spectrum.frame_length / 2 + 1,
        "averaged spectrum bin count mismatch");
}

// ---------------------------------------------------------------------------
// Eigenresidual equalization
//
// Fm falls on different normalized bins at different F0, so the harmonic
// band edge is incoherent across frames and the first eigenvector loses the
// top of the harmonic band. The equalizer restores the frames' mean power
// spectrum, smoothed over +-half bins.

inline std::vector<double> spectral_equalizer(const std::vector<std::vector<double>>& frames,
                                              const std::vector<double>& eigenresidual,
                                              int half = 3) {
  require(!frames.empty(), Errc::kEmptyFrameSet, "no frames for the equalizer");
  const std::size_t n = eigenresidual.size();
  const std::size_t K = n / 2 + 1;
  std::vector<double> P(K, 0.0), Q(K, 0.0);
  for (const auto& f : frames) {
    require(f.size() == n, Errc::kDimensionMismatch, "frame length differs from the eigenresidual");
    const auto X = fft::rfft(f);
    for (std::size_t k = 0; k < K; ++k) P[k] += std::norm(X[k]);
  }
  const auto E = fft::rfft(eigenresidual);
  for (std::size_t k = 0; k < K; ++k) Q[k] = std::norm(E[k]);
  std::vector<double> g(K);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t a = k >= static_cast<std::size_t>(half) ? k - half : 0;
    const std::size_t b = std::min(K - 1, k + half);
    double p = 0.0, q = 0.0;
    for (std::size_t j = a; j <= b; ++j) p += P[j], q += Q[j];
    g[k] = q > 0 ? std::sqrt(p / q) : 1.0;
  }
  // Scale so the equalized eigenresidual keeps unit norm.
  double e = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double w = (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
    e += w * g[k] * g[k] * Q[k];
  }
  e /= static_cast<double>(n);
  for (auto& v : g) v /= std::sqrt(e);
  return g;
}

inline std::vector<double> apply_equalizer(std::span<const double> q, const std::vector<double>& gains) {
  if (gains.empty()) return {q.begin(), q.end()};
  require(gains.size() == q.size() / 2 + 1, Errc::kDimensionMismatch,
          "equalizer length differs from frame_length/2 + 1");
  auto X = fft::rfft(q);
  for (std::size_t k = 0; k < X.size(); ++k) X[k] *= gains[k];
  return fft::irfft(X, q.size());
}

// ---------------------------------------------------------------------------
// Preset construction

struct PresetConfig {
  AnalysisConfig analysis{};
  FramingConfig framing{};
  EigenConfig eigen{};
  TiltConfig tilt{};
  int min_utterances = 10;
  bool equalize = true;
};

struct PresetReport {
  int utterances_used = 0;
  int utterances_skipped = 0;
  int residual_frames = 0;
  int speech_frames = 0;
  int fm_frames = 0;
};

inline VoiceQualityPreset build_preset(const std::vector<AudioBuffer>& corpus,
                                       const std::string& label, const PresetConfig& cfg = {},
                                       PresetReport* report = nullptr) {
  std::vector<std::vector<double>> residual_frames, speech_frames;
  std::vector<double> fm_values;
  double f0_sum = 0.0;
  std::size_t f0_count = 0;
  PresetReport rep;
  for (const auto& buf : corpus) {
    SignalAnalysis sa;
    try {
      sa = analyze_signal(buf, cfg.analysis);
    } catch (const Error&) {
      ++rep.utterances_skipped;
      continue;
    }
    if (sa.no_voiced_region || sa.track.gci.empty()) {
      ++rep.utterances_skipped;
      continue;
    }
    auto rf = extract_gci_frames(sa.residual, sa.track, SourceKind::kResidual, cfg.framing);
    auto sf = extract_gci_frames(buf, sa.track, SourceKind::kSpeech, cfg.framing);
    if (rf.empty() || sf.empty()) {
      ++rep.utterances_skipped;
      continue;
    }
    for (auto& f : rf.frames) residual_frames.push_back(std::move(f));
    for (auto& f : sf.frames) speech_frames.push_back(std::move(f));
    const auto fm = max_voiced_track(buf, sa.track, cfg.analysis.harmonicity);
    fm_values.insert(fm_values.end(), fm.fm.begin(), fm.fm.end());
    for (std::size_t i = 0; i < sa.track.frame_count(); ++i)
      if (sa.track.voiced[i]) f0_sum += sa.track.f0[i], ++f0_count;
    ++rep.utterances_used;
  }
  require(rep.utterances_used >= cfg.min_utterances, Errc::kInsufficientData,
          "label " + label + ": " + std::to_string(rep.utterances_used) +
              " usable voiced utterances, need " + std::to_string(cfg.min_utterances));
  require(!fm_values.empty(), Errc::kInsufficientData, "no frames with a maximum voiced frequency");

  const auto basis = compute_eigen_basis(residual_frames, cfg.eigen);
  VoiceQualityPreset p;
  p.label = label;
  p.frame_length = cfg.framing.normalized_length;
  p.eigenresidual = basis.eigenresidual();
  p.mean_frame = basis.mean_frame;
  p.eigenvalue_share = basis.eigenvalue_share(0);
  if (cfg.equalize) p.equalizer = spectral_equalizer(residual_frames, p.eigenresidual);
  p.fm_hz = dsp::mean(fm_values);
  p.reference_mean_f0 = f0_sum / static_cast<double>(f0_count);
  p.spectrum = averaged_spectrum(speech_frames);
  p.tilt = stabilize(fit_ar_to_spectrum(p.spectrum, cfg.tilt.order), cfg.tilt.max_pole_radius);
  rep.residual_frames = static_cast<int>(residual_frames.size());
  rep.speech_frames = static_cast<int>(speech_frames.size());
  rep.fm_frames = static_cast<int>(fm_values.size());
  if (report) *report = rep;
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// Excitation synthesis

struct SynthesisParams {
  int sample_rate = 16000;
  std::size_t length = 0;       // output samples
  double frame_hop = 0.01;      // seconds; frame i is centred at i * frame_hop
  std::vector<double> f0;       // Hz per frame, 0 when unvoiced
  std::vector<double> energy;   // target excitation RMS per frame; empty leaves levels as rendered
  std::vector<long> pulses;     // optional pulse (GCI) positions; derived from f0 when empty
  std::uint64_t noise_seed = 0;

  double f0_at(double sample) const {
    if (f0.empty()) return 0.0;
    const double t = sample / sample_rate / frame_hop;
    const long i = std::clamp<long>(std::lround(t), 0, static_cast<long>(f0.size()) - 1);
    if (f0[i] <= 0) return 0.0;
    // Linear interpolation towards the neighbouring voiced frame.
    const long j = t >= i ? i + 1 : i - 1;
    if (j < 0 || j >= static_cast<long>(f0.size()) || f0[j] <= 0) return f0[i];
    const double w = std::abs(t - i);
    return (1.0 - w) * f0[i] + w * f0[j];
  }
  bool voiced_at(double sample) const { return f0_at(sample) > 0; }
};

struct ExcitationOptions {
  bool noise_modulation = true;    // pitch-synchronous triangular envelope on the noise
  double deterministic_gain = 1.0;
  double noise_gain = 1.0;
  bool equalize = true;            // apply the preset's eigenresidual equalizer
  double transition_hz = 200.0;    // band-split filter transition width
  double attenuation_db = 60.0;
  double energy_window_s = 0.025;
  const TiltFilter* tilt = nullptr;  // applied to the eigenresidual in the normalized domain
};

struct Excitation {
  std::vector<double> samples;
  std::vector<double> deterministic;  // low band, before per-frame gain
  std::vector<double> stochastic;     // high band and unvoiced noise, before per-frame gain
  std::vector<double> pulses;         // fractional pulse positions
};

namespace detail {

/// Voiced sample ranges [begin, end).
inline std::vector<std::pair<long, long>> voiced_ranges(const SynthesisParams& p) {
  std::vector<std::pair<long, long>> out;
  const long n = static_cast<long>(p.length);
  long m = 0;
  while (m < n) {
    if (!p.voiced_at(static_cast<double>(m))) { ++m; continue; }
    const long b = m;
    while (m < n && p.voiced_at(static_cast<double>(m))) ++m;
    out.emplace_back(b, m);
  }
  return out;
}

/// Pulse positions: the supplied GCIs inside voiced ranges, with voiced
/// stretches they leave uncovered (run edges, missed cycles) filled at the
/// f0 period. Without GCIs, pulses follow f0 alone.
inline std::vector<double> place_pulses(const SynthesisParams& p) {
  std::vector<double> out;
  auto period = [&](double m) { return p.sample_rate / p.f0_at(m); };
  for (const auto& [b, e] : voiced_ranges(p)) {
    std::vector<double> g;
    for (long x : p.pulses)
      if (x >= b && x < e) g.push_back(static_cast<double>(x));
    if (g.empty()) {
      for (double m = b; m < e; m += period(m)) out.push_back(m);
      continue;
    }
    std::vector<double> head;
    for (double m = g.front() - period(g.front()); m >= b; m -= period(std::max<double>(m, b)))
      head.push_back(m);
    out.insert(out.end(), head.rbegin(), head.rend());
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.push_back(g[i]);
      if (i + 1 == g.size()) break;
      const double gap = g[i + 1] - g[i];
      const int k = static_cast<int>(std::lround(gap / period(g[i])));
      if (k >= 2)
        for (int j = 1; j < k; ++j) out.push_back(g[i] + gap * j / k);
    }
    for (double m = g.back() + period(g.back()); m < e; m += period(m)) out.push_back(m);
  }
  return out;
}

/// Local period (samples) of each pulse: spacing to the next pulse when it
/// is consistent with f0, the f0 period otherwise.
inline std::vector<double> pulse_periods(const SynthesisParams& p, const std::vector<double>& pulses) {
  std::vector<double> T(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    const double nominal = p.sample_rate / p.f0_at(pulses[i]);
    double t = nominal;
    if (i + 1 < pulses.size()) {
      const double gap = pulses[i + 1] - pulses[i];
      if (gap > 0.7 * nominal && gap < 1.4 * nominal) t = gap;
    }
    T[i] = t;
  }
  return T;
}

/// Target-rate rendering of the normalized two-period frame q for a pulse
/// at position p with period T, stored from sample `first`.
inline std::vector<double> render_pulse(const std::vector<double>& q, double p, double T,
                                        long* first) {
  const int N = static_cast<int>(q.size());
  const long a = static_cast<long>(std::ceil(p - T));
  const long b = static_cast<long>(std::floor(p + T));
  *first = a;
  std::vector<double> r(static_cast<std::size_t>(std::max(0L, b - a + 1)));
  const double scale = N / (2.0 * T);
  const double cutoff = std::min(1.0, 1.0 / scale);
  for (long m = a; m <= b; ++m)
    r[m - a] = dsp::bandlimited_sample(q, (m - p) * scale + N / 2, cutoff);
  return r;
}

/// Mean |R(k f0)|^2 / T over the harmonics just below fm; the variance of
/// white noise whose spectral density matches the pulse train there.
inline double matched_noise_variance(const std::vector<double>& r, long first, double p,
                                     double T, double fs, double fm) {
  const double f0 = fs / T;
  int k_hi = std::max(1, static_cast<int>(std::floor(fm / f0)));
  int k_lo = std::max(1, static_cast<int>(std::ceil(0.75 * fm / f0)));
  k_lo = std::min(k_lo, k_hi);
  double acc = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double w = 2.0 * dsp::kPi * k * f0 / fs;
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      s += r[i] * std::polar(1.0, -w * (first + static_cast<double>(i) - p));
    acc += std::norm(s);
  }
  return acc / (k_hi - k_lo + 1) / T;
}

inline constexpr std::uint64_t kUnvoicedStream = 0x5eed0000a5a5ULL;

/// Window RMS of x around each frame centre.
inline std::vector<double> frame_rms(const std::vector<double>& x, int fs, double hop,
                                     double window_s, std::size_t frames) {
  std::vector<double> out(frames, 0.0);
  const long half = std::max(1L, std::lround(window_s * fs / 2));
  const long n = static_cast<long>(x.size());
  for (std::size_t i = 0; i < frames; ++i) {
    const long c = std::lround(i * hop * fs);
    const long a = std::max(0L, c - half), b = std::min(n, c + half);
    if (b <= a) continue;
    double e = 0.0, wsum = 0.0;
    for (long m = a; m < b; ++m) {
      const double w = dsp::hann_taper(static_cast<double>(m - c) / half);
      e += w * x[m] * x[m];
      wsum += w;
    }
    out[i] = wsum > 0 ? std::sqrt(e / wsum) : 0.0;
  }
  return out;
}

/// Per-sample gain linearly interpolated between frame-centre gains.
inline std::vector<double> interpolate_gains(const std::vector<double>& g, int fs, double hop,
                                             std::size_t length) {
  std::vector<double> out(length, 0.0);
  if (g.empty()) return out;
  const double step = hop * fs;
  for (std::size_t m = 0; m < length; ++m) {
    const double t = m / step;
    const std::size_t i = std::min(static_cast<std::size_t>(t), g.size() - 1);
    const std::size_t j = std::min(i + 1, g.size() - 1);
    const double w = std::clamp(t - static_cast<double>(i), 0.0, 1.0);
    out[m] = (1.0 - w) * g[i] + w * g[j];
  }
  return out;
}

/// Gains that bring x's frame RMS onto target (0 where x is silent).
inline std::vector<double> matching_gains(const std::vector<double>& x,
                                          const std::vector<double>& target, int fs, double hop,
                                          double window_s) {
  const auto have = frame_rms(x, fs, hop, window_s, target.size());
  std::vector<double> g(target.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = have[i] > 1e-12 ? target[i] / have[i] : 0.0;
  return g;
}

}  // namespace detail

inline Excitation synthesize_excitation(const SynthesisParams& params,
                                        const VoiceQualityPreset& preset,
                                        const ExcitationOptions& opt = {}) {
  require(params.length > 0 && !params.f0.empty(), Errc::kEmptyParams,
          "synthesis parameters are empty");
  require(params.energy.empty() || params.energy.size() == params.f0.size(),
          Errc::kDimensionMismatch, "energy and f0 tracks differ in length");
  validate(preset);
  const int fs = params.sample_rate;
  const std::size_t n = params.length;
  require(preset.fm_hz < fs / 2.0, Errc::kInvalidArgument, "fm_hz above the output Nyquist");

  std::vector<double> q = preset.eigenresidual;
  if (opt.equalize) q = apply_equalizer(q, preset.equalizer);
  if (opt.tilt) q = apply_tilt(q, *opt.tilt);

  Excitation ex;
  ex.pulses = detail::place_pulses(params);
  const auto periods = detail::pulse_periods(params, ex.pulses);

  std::vector<double> det(n, 0.0), sigma(n, 0.0), env(n, 0.0);
  std::vector<double> pulse_sigma(ex.pulses.size(), 0.0);
  for (std::size_t i = 0; i < ex.pulses.size(); ++i) {
    long first = 0;
    const auto r = detail::render_pulse(q, ex.pulses[i], periods[i], &first);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const long m = first + static_cast<long>(k);
      if (m >= 0 && m < static_cast<long>(n)) det[m] += r[k];
    }
    pulse_sigma[i] = std::sqrt(
        detail::matched_noise_variance(r, first, ex.pulses[i], periods[i], fs, preset.fm_hz));
  }

  // Noise level and triangular envelope per voiced sample, from the nearest
  // preceding pulse.
  std::size_t pi = 0;
  for (std::size_t m = 0; m < n; ++m) {
    if (!params.voiced_at(static_cast<double>(m)) || ex.pulses.empty()) continue;
    while (pi + 1 < ex.pulses.size() && ex.pulses[pi + 1] <= m) ++pi;
    const double T = periods[pi];
    sigma[m] = pulse_sigma[pi];
    double phase = (m - ex.pulses[pi]) / T;
    phase -= std::floor(phase);
    env[m] = opt.noise_modulation ? std::sqrt(3.0) * std::abs(2.0 * phase - 1.0) : 1.0;
  }

  std::vector<double> noise(n, 0.0), unvoiced(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (sigma[m] > 0)
      noise[m] = sigma[m] * env[m] * dsp::counter_gaussian(params.noise_seed, m);
    else if (!params.voiced_at(static_cast<double>(m)))
      unvoiced[m] = dsp::counter_gaussian(params.noise_seed ^ detail::kUnvoicedStream, m);
  }

  // Passband edge at fm: every harmonic below fm stays deterministic.
  const double edge = std::min(preset.fm_hz + 0.5 * opt.transition_hz, 0.5 * fs - opt.transition_hz);
  const auto lp = dsp::kaiser_lowpass(edge, fs, opt.transition_hz, opt.attenuation_db);
  const auto hp = dsp::complementary_highpass(lp);
  ex.deterministic = dsp::filter_centered(det, lp);
  ex.stochastic = dsp::filter_centered(noise, hp);
  for (std::size_t m = 0; m < n; ++m) {
    ex.deterministic[m] *= opt.deterministic_gain;
    ex.stochastic[m] = opt.noise_gain * ex.stochastic[m] + unvoiced[m];
  }
  ex.samples.resize(n);
  for (std::size_t m = 0; m < n; ++m) ex.samples[m] = ex.deterministic[m] + ex.stochastic[m];

  if (!params.energy.empty()) {
    const auto g = detail::matching_gains(ex.samples, params.energy, fs, params.frame_hop,
                                          opt.energy_window_s);
    const auto gs = detail::interpolate_gains(g, fs, params.frame_hop, n);
    for (std::size_t m = 0; m < n; ++m) ex.samples[m] *= gs[m];
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Transformation

struct TransformConfig {
  AnalysisConfig analysis{};
  ExcitationOptions excitation{};
  std::uint64_t seed = 0;
  bool apply_tilt = true;
  double energy_window_s = 0.025;
  int energy_passes = 3;
  bool pulses_at_gci = false;  // otherwise pulses follow the f0 track
  double peak_limit = 4.0;  // output samples are held below this multiple of the input peak
};

struct TransformResult {
  AudioBuffer output;
  std::size_t clipped_samples = 0;
  std::size_t pulses = 0;
  int lpc_repaired = 0;
  std::vector<std::string> warnings;
};

/// Resynthesizes buf through its own LPC envelopes with a DSM excitation
/// built from `target`; the tilt filter maps `source`'s averaged spectrum
/// onto `target`'s. Per-frame energy follows the input.
inline TransformResult transform_voice_quality(const AudioBuffer& buf,
                                               const VoiceQualityPreset& source,
                                               const VoiceQualityPreset& target,
                                               const TransformConfig& cfg = {}) {
  validate(source);
  validate(target);
  const auto sa = analyze_signal(buf, cfg.analysis);
  require(!sa.no_voiced_region, Errc::kNoVoicedRegion, "input has no voiced frames");
  const int fs = buf.sample_rate;
  const auto& tr = sa.track;

  SynthesisParams params;
  params.sample_rate = fs;
  params.length = buf.size();
  params.frame_hop = tr.frame_hop;
  params.f0 = tr.f0;
  if (cfg.pulses_at_gci) params.pulses = tr.gci;
  params.noise_seed = cfg.seed;
  params.energy = detail::frame_rms(sa.residual.samples, fs, tr.frame_hop, cfg.energy_window_s,
                                    tr.frame_count());

  TiltFilter tilt;
  ExcitationOptions opt = cfg.excitation;
  if (cfg.apply_tilt) {
    require(source.frame_length == target.frame_length, Errc::kGridMismatch,
            "presets use different frame lengths");
    tilt = build_tilt_filter(source.tilt, target.tilt);
    opt.tilt = &tilt;
  }
  const auto ex = synthesize_excitation(params, target, opt);

  // Gains go on the excitation so the filter smooths them; a few passes
  // absorb the filter memory across energy jumps.
  const std::vector<double> target_rms =
      detail::frame_rms(buf.samples, fs, tr.frame_hop, cfg.energy_window_s, tr.frame_count());
  std::vector<double> e = ex.samples;
  auto y = synthesis_filter_smooth(e, sa.envelope);
  for (int it = 0; it < cfg.energy_passes; ++it) {
    const auto g = detail::matching_gains(y, target_rms, fs, tr.frame_hop, cfg.energy_window_s);
    const auto gs = detail::interpolate_gains(g, fs, tr.frame_hop, e.size());
    for (std::size_t m = 0; m < e.size(); ++m) e[m] *= gs[m];
    y = synthesis_filter_smooth(e, sa.envelope);
  }

  TransformResult res;
  double in_peak = 0.0;
  for (double v : buf.samples) in_peak = std::max(in_peak, std::abs(v));
  const double limit = std::min(1.0, cfg.peak_limit * in_peak);
  for (auto& v : y) {
    if (!std::isfinite(v)) {
      v = 0.0;
      ++res.clipped_samples;
    } else if (std::abs(v) > limit) {
      v = std::copysign(limit, v);
      ++res.clipped_samples;
    }
  }
  if (res.clipped_samples)
    res.warnings.push_back(std::to_string(res.clipped_samples) + " samples clipped");
  res.output = AudioBuffer{std::move(y), fs};
  res.pulses = ex.pulses.size();
  res.lpc_repaired = sa.envelope.repaired;
  return res;
}

/// Drives synthesis from external parameter tracks: excitation from
/// params/preset, shaped by env. Output is scaled to a peak of 0.9 when
/// params carry no energy track.
inline AudioBuffer synthesize_speech(const SynthesisParams& params, const LpcEnvelope& env,
                                     const VoiceQualityPreset& preset,
                                     const ExcitationOptions& opt = {}) {
  const auto ex = synthesize_excitation(params, preset, opt);
  auto y = synthesis_filter(ex.samples, env);
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (params.energy.empty() && peak > 0)
    for (auto& v : y) v *= 0.9 / peak;
  for (auto& v : y) v = std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0;
  return AudioBuffer{std::move(y), params.sample_rate};
}

}  // namespace vqt
