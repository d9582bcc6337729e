#pragma once

// Synthetic stimuli with known ground truth: Rosenberg glottal pulses,
// formant filters, harmonic-plus-noise signals and short voiced/unvoiced
// "sentences" with a controllable voice quality.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/fft.hpp"

namespace vqt::synth {

/// Rosenberg pulse timing for one period T0 (seconds): opening over Tp,
/// closing over Tn, closed from Te = oq * T0 on. sq = Tp / Tn.
struct RosenbergShape {
  double oq = 0.6;
  double sq = 2.0;

  double te(double t0) const { return oq * t0; }
  double tn(double t0) const { return te(t0) / (1.0 + sq); }
  double tp(double t0) const { return te(t0) - tn(t0); }
};

inline double rosenberg_flow(double t, double t0, const RosenbergShape& s) {
  const double tp = s.tp(t0), tn = s.tn(t0);
  if (t < 0 || t >= tp + tn) return 0.0;
  if (t < tp) return 0.5 * (1.0 - std::cos(dsp::kPi * t / tp));
  return std::cos(dsp::kPi * (t - tp) / (2.0 * tn));
}

inline double rosenberg_derivative(double t, double t0, const RosenbergShape& s) {
  const double tp = s.tp(t0), tn = s.tn(t0);
  if (t < 0 || t >= tp + tn) return 0.0;
  if (t < tp) return 0.5 * dsp::kPi / tp * std::sin(dsp::kPi * t / tp);
  return -dsp::kPi / (2.0 * tn) * std::sin(dsp::kPi * (t - tp) / (2.0 * tn));
}

struct Formant {
  double freq;
  double bandwidth;
};

inline const std::vector<Formant>& neutral_vowel() {
  static const std::vector<Formant> f{{700, 80}, {1220, 90}, {2600, 120}, {3500, 200}};
  return f;
}

/// Monic all-pole polynomial with one resonator pair per formant.
inline std::vector<double> formant_polynomial(const std::vector<Formant>& formants, double fs) {
  std::vector<double> a{1.0};
  for (const auto& f : formants) {
    const double r = std::exp(-dsp::kPi * f.bandwidth / fs);
    const double th = 2.0 * dsp::kPi * f.freq / fs;
    const double sec[3] = {1.0, -2.0 * r * std::cos(th), r * r};
    std::vector<double> next(a.size() + 2, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int j = 0; j < 3; ++j) next[i + j] += a[i] * sec[j];
    a = std::move(next);
  }
  return a;
}

/// Decimates a signal rendered at `factor` times the target rate, with a
/// Kaiser low-pass just below the target Nyquist.
inline std::vector<double> decimate(const std::vector<double>& hi, int factor, int fs) {
  const double rate = static_cast<double>(fs) * factor;
  const auto h = dsp::kaiser_lowpass(0.45 * fs, rate, 0.1 * fs, 70.0);
  const long half = static_cast<long>(h.size()) / 2;
  const long n_hi = static_cast<long>(hi.size());
  std::vector<double> out(hi.size() / factor);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const long c = static_cast<long>(i) * factor;
    double acc = 0.0;
    for (long k = 0; k < static_cast<long>(h.size()); ++k) {
      const long m = c + half - k;
      if (m >= 0 && m < n_hi) acc += h[k] * hi[m];
    }
    out[i] = acc;
  }
  return out;
}

/// Minimum-phase FIR with the magnitude response of h (real-cepstrum folding).
inline std::vector<double> minimum_phase(const std::vector<double>& h) {
  const std::size_t n = fft::next_pow2(16 * h.size());
  const auto H = fft::rfft(h, n);
  std::vector<fft::cplx> logmag(H.size());
  for (std::size_t k = 0; k < H.size(); ++k) logmag[k] = std::log(std::max(std::abs(H[k]), 1e-8));
  auto c = fft::irfft(logmag, n);
  for (std::size_t i = 1; i < n / 2; ++i) c[i] *= 2.0;
  for (std::size_t i = n / 2 + 1; i < n; ++i) c[i] = 0.0;
  const auto C = fft::rfft(c, n);
  std::vector<fft::cplx> E(C.size());
  for (std::size_t k = 0; k < C.size(); ++k) E[k] = std::exp(C[k]);
  auto out = fft::irfft(E, n);
  out.resize(h.size());
  return out;
}

struct PulseTrain {
  std::vector<double> samples;
  std::vector<double> gci;  // closure instants, fractional samples
};

/// Rosenberg flow-derivative train at constant f0; period k starts at
/// k * T0 and closes at k * T0 + oq * T0.
inline PulseTrain rosenberg_train(double f0, const RosenbergShape& s, double duration, int fs) {
  PulseTrain out;
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  const double t0 = 1.0 / f0;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    out.samples[i] = rosenberg_derivative(std::fmod(t, t0), t0, s);
  }
  for (double t = s.te(t0); t < duration; t += t0) out.gci.push_back(t * fs);
  return out;
}

/// Rosenberg train through a fixed formant filter.
inline PulseTrain rosenberg_vowel(double f0, const RosenbergShape& s, double duration, int fs,
                                  const std::vector<Formant>& formants = neutral_vowel()) {
  auto tr = rosenberg_train(f0, s, duration, fs);
  tr.samples = dsp::allpole(tr.samples, formant_polynomial(formants, fs));
  return tr;
}

/// Harmonics of f0 up to cutoff (random phases, unit amplitude) plus white
/// noise high-passed at cutoff. snr_db sets a harmonic peak this far above
/// the noise floor in a 4-period Hann analysis window.
inline std::vector<double> harmonic_plus_noise(double f0, double cutoff, double duration, int fs,
                                               double snr_db = 20.0, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * dsp::kPi);
  std::normal_distribution<double> gauss;
  const std::size_t n = static_cast<std::size_t>(duration * fs);
  std::vector<double> x(n, 0.0);
  for (int k = 1; k * f0 <= cutoff && k * f0 < fs / 2.0; ++k) {
    const double phase = ph(rng);
    const double w = 2.0 * dsp::kPi * k * f0 / fs;
    for (std::size_t i = 0; i < n; ++i) x[i] += std::cos(w * i + phase);
  }
  if (cutoff < fs / 2.0 - 100) {
    const auto hp = dsp::complementary_highpass(dsp::kaiser_lowpass(cutoff, fs, 200.0, 60.0));
    std::vector<double> w(n);
    for (auto& v : w) v = gauss(rng);
    const auto nz = dsp::filter_centered(w, hp);
    const double L = 4.0 * fs / f0;
    const double sigma = (L / 4.0) / std::sqrt(3.0 * L / 8.0) * std::pow(10.0, -snr_db / 20.0);
    for (std::size_t i = 0; i < n; ++i) x[i] += sigma * nz[i];
  }
  return x;
}

/// Voice-quality recipe for synthetic sentences.
struct VoiceQuality {
  std::string label = "modal";
  double oq = 0.55;          // mean open quotient
  double sq = 2.5;           // opening / closing duration ratio
  double oq_spread = 0.04;   // per-utterance uniform offset half-width
  double oq_drift = 0.01;    // innovation of the slow per-cycle open-quotient drift
  double fm_hz = 3990.0;     // source harmonic band edge
  double aspiration_db = 0.0;  // noise above fm relative to the matched level
  double fm_spread = 0.0;      // per-utterance uniform fm offset half-width, Hz
};

inline VoiceQuality loud_quality() { return {"loud", 0.40, 3.0, 0.04, 0.01, 4600.0, 0.0}; }
inline VoiceQuality modal_quality() { return {"modal", 0.55, 2.5, 0.04, 0.01, 3990.0, 0.0}; }
inline VoiceQuality soft_quality() { return {"soft", 0.70, 2.0, 0.04, 0.01, 2460.0, 0.0}; }

struct Sentence {
  AudioBuffer audio;
  std::vector<double> gci;         // true closure instants, fractional samples
  std::vector<double> cycle_f0;    // f0 of the cycle ending at each gci
  std::vector<double> cycle_oq;
  std::vector<std::pair<long, long>> voiced_spans;  // [begin, end) samples
};

struct SentenceConfig {
  int sample_rate = 16000;
  double f0_start = 130.0;
  double f0_end = 100.0;
  double jitter = 0.003;       // relative per-cycle period perturbation
  int voiced_segments = 3;
  double voiced_s = 0.35;
  double unvoiced_s = 0.08;
  double peak = 0.5;
};

/// A few vowels separated by fricative-like noise, excited by a Rosenberg
/// source with per-cycle jitter whose spectrum above vq.fm_hz is replaced by
/// noise at the level of the harmonics just below it.
inline Sentence make_sentence(const VoiceQuality& vq, std::uint64_t seed,
                              const SentenceConfig& cfg = {}) {
  static const std::vector<std::vector<Formant>> vowels{
      {{730, 90}, {1090, 110}, {2440, 160}, {3400, 250}},
      {{530, 60}, {1840, 100}, {2480, 120}, {3500, 250}},
      {{300, 60}, {870, 80}, {2240, 120}, {3300, 250}},
      {{660, 80}, {1720, 100}, {2410, 140}, {3450, 250}},
      {{440, 70}, {1020, 90}, {2240, 130}, {3350, 250}},
  };
  const int fs = cfg.sample_rate;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss;

  const double total = cfg.unvoiced_s * (cfg.voiced_segments + 1) + cfg.voiced_s * cfg.voiced_segments;
  const std::size_t n = static_cast<std::size_t>(total * fs);
  Sentence s;
  constexpr int kOver = 8;  // the source is rendered oversampled, then decimated
  std::vector<double> source_hi(n * kOver, 0.0), vt_out(n, 0.0);
  std::vector<int> vowel_of(n, -1);

  const double oq_utt = vq.oq + vq.oq_spread * uni(rng);
  const double fm_utt = std::clamp(vq.fm_hz + vq.fm_spread * uni(rng), 500.0, 0.5 * fs - 500.0);
  double drift = 0.0;
  double t = cfg.unvoiced_s;
  for (int seg = 0; seg < cfg.voiced_segments; ++seg) {
    const long b = std::lround(t * fs);
    const long e = std::lround((t + cfg.voiced_s) * fs);
    s.voiced_spans.emplace_back(b, e);
    const int vowel = static_cast<int>((seed + seg) % vowels.size());
    for (long m = b; m < e; ++m) vowel_of[m] = vowel;
    // Closures follow the jittered period; the opening moves with oq, so
    // shape drift does not perturb the excitation timing.
    double close = static_cast<double>(b) + oq_utt * fs / cfg.f0_start;
    while (true) {
      const double pos = (close / fs - cfg.unvoiced_s) / (total - 2 * cfg.unvoiced_s);
      const double f0 = (cfg.f0_start + (cfg.f0_end - cfg.f0_start) * std::clamp(pos, 0.0, 1.0)) *
                        (1.0 + cfg.jitter * uni(rng));
      const double T = fs / f0;
      drift = 0.9 * drift + vq.oq_drift * uni(rng);
      RosenbergShape shape{std::clamp(oq_utt + drift, 0.2, 0.95), vq.sq};
      const double start = close - shape.oq * T;
      if (start < b || close + (1.0 - shape.oq) * T > e) {
        if (start >= b) break;
        close += T;
        continue;
      }
      const long m0 = static_cast<long>(std::ceil(start * kOver));
      for (long m = m0; m < close * kOver && m < static_cast<long>(source_hi.size()); ++m)
        source_hi[m] = rosenberg_derivative((m / static_cast<double>(kOver) - start) / fs,
                                            1.0 / f0, shape);
      s.gci.push_back(close);
      s.cycle_f0.push_back(f0);
      s.cycle_oq.push_back(shape.oq);
      close += T;
    }
    t += cfg.voiced_s + cfg.unvoiced_s;
  }

  auto source = decimate(source_hi, kOver, fs);
  source.resize(n, 0.0);

  // Band split of the voiced source at fm: harmonics below, matched noise
  // above. The low-pass is minimum phase so its ringing follows closures
  // instead of leaking into the open phase.
  const auto lp = dsp::kaiser_lowpass(fm_utt, fs, 200.0, 60.0);
  const auto hp = dsp::complementary_highpass(lp);
  auto harmonic = dsp::fir(source, minimum_phase(lp));
  std::vector<double> noise(n, 0.0);
  {
    // Level: mean |D(k f0)|^2 / T over harmonics in [0.75 fm, fm] of a
    // typical cycle.
    const double f0 = 0.5 * (cfg.f0_start + cfg.f0_end);
    const double T = fs / f0;
    RosenbergShape shape{vq.oq, vq.sq};
    double acc = 0.0;
    int cnt = 0;
    for (int k = std::max(1, static_cast<int>(std::ceil(0.75 * fm_utt / f0)));
         k * f0 <= fm_utt; ++k, ++cnt) {
      std::complex<double> sum = 0.0;
      for (int m = 0; m < static_cast<int>(T); ++m)
        sum += rosenberg_derivative(m / static_cast<double>(fs), 1.0 / f0, shape) *
               std::polar(1.0, -2.0 * dsp::kPi * k * f0 * m / fs);
      acc += std::norm(sum);
    }
    const double sigma = std::sqrt((cnt ? acc / cnt : 0.0) / T) *
                         std::pow(10.0, vq.aspiration_db / 20.0);
    for (const auto& [b, e] : s.voiced_spans)
      for (long m = b; m < e; ++m) noise[m] = sigma * gauss(rng);
  }
  const auto aspiration = dsp::filter_centered(noise, hp);
  for (std::size_t m = 0; m < n; ++m) source[m] = harmonic[m] + aspiration[m];

  // Vocal tract per voiced segment; fricative noise elsewhere.
  for (std::size_t seg = 0; seg < s.voiced_spans.size(); ++seg) {
    const auto [b, e] = s.voiced_spans[seg];
    const long pad = std::lround(0.02 * fs);
    const long a = std::max(0L, b - pad), z = std::min(static_cast<long>(n), e + pad);
    const auto poly = formant_polynomial(vowels[vowel_of[b]], fs);
    const auto y = dsp::allpole(std::vector<double>(source.begin() + a, source.begin() + z), poly);
    for (long m = a; m < z; ++m) vt_out[m] += y[m - a];
  }
  double voiced_rms = dsp::rms(vt_out);
  std::vector<double> fric(n, 0.0);
  for (auto& v : fric) v = gauss(rng);
  const auto fric_hp = dsp::complementary_highpass(dsp::kaiser_lowpass(2500.0, fs, 400.0, 50.0));
  fric = dsp::filter_centered(fric, fric_hp);
  for (std::size_t m = 0; m < n; ++m)
    if (vowel_of[m] < 0) vt_out[m] += 0.15 * voiced_rms * fric[m];

  double peak = 0.0;
  for (double v : vt_out) peak = std::max(peak, std::abs(v));
  const double g = peak > 0 ? cfg.peak / peak : 1.0;
  for (auto& v : vt_out) v *= g;
  s.audio = AudioBuffer{std::move(vt_out), fs};
  return s;
}

}  // namespace vqt::synth
