#pragma once

// Glottal open-phase features from the maximum-phase component: glottal
// formant Fg, normalized amplitude quotient NAQ and quasi-open quotient QOQ.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/cepstrum.hpp"
#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

struct GlottalCycleFeatures {
  long gci = 0;
  double time_s = 0.0;
  double f0 = 0.0;
  double t0 = 0.0;
  double fg = 0.0;
  double fg_over_f0 = 0.0;
  double naq = 0.0;
  double qoq = 0.0;
};

struct GlottalConfig {
  CepstrumConfig cepstrum{};
  double fg_band_f0 = 4.0;        // Fg searched in (0, fg_band_f0 * F0]
  double window_floor = 0.4;      // lower bound on the window weight undone
  int spectrum_oversample = 16;   // zero-padding factor for the Fg search
};

enum class DropReason { kEdge, kPhaseUnwrap, kNoPeak, kDegenerateFlow, kOutOfRange };

inline const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::kEdge: return "edge";
    case DropReason::kPhaseUnwrap: return "phase_unwrap";
    case DropReason::kNoPeak: return "no_peak";
    case DropReason::kDegenerateFlow: return "degenerate_flow";
    case DropReason::kOutOfRange: return "out_of_range";
  }
  return "unknown";
}

struct DropCounts {
  std::map<std::string, int> by_reason{{"edge", 0},           {"phase_unwrap", 0},
                                       {"no_peak", 0},        {"degenerate_flow", 0},
                                       {"out_of_range", 0}};
  void add(DropReason r) { ++by_reason[to_string(r)]; }
  int total() const {
    int t = 0;
    for (const auto& [k, v] : by_reason) t += v;
    return t;
  }
};

// ---------------------------------------------------------------------------
// Measurements on a sampled flow / flow-derivative cycle

/// Glottal formant: frequency of the strongest interior spectral peak of the
/// derivative in (0, f_max].
inline double glottal_formant(std::span<const double> deriv, double sample_rate, double f_max,
                              int oversample = 16) {
  const std::size_t n = fft::next_pow2(std::max<std::size_t>(
      oversample * deriv.size(), static_cast<std::size_t>(sample_rate / 2)));
  const auto X = fft::rfft(deriv, n);
  const double bin_hz = sample_rate / static_cast<double>(n);
  const std::size_t hi = std::min(X.size() - 1, static_cast<std::size_t>(f_max / bin_hz));
  require(hi >= 2, Errc::kNoPeakFound, "search band below frequency resolution");
  std::size_t best = 1;
  for (std::size_t k = 2; k <= hi; ++k)
    if (std::abs(X[k]) > std::abs(X[best])) best = k;
  require(best < hi && std::abs(X[best]) > std::abs(X[best - 1]) &&
              std::abs(X[best]) > 0.0,
          Errc::kNoPeakFound, "no interior spectral peak below the Fg search limit");
  const double off = dsp::parabolic_offset(std::abs(X[best - 1]), std::abs(X[best]),
                                           std::abs(X[best + 1]));
  return (best + off) * bin_hz;
}

/// NAQ = peak-to-peak flow / (|min derivative| * T0), T0 in samples.
inline double normalized_amplitude_quotient(std::span<const double> flow,
                                            std::span<const double> deriv, double t0_samples) {
  require(!flow.empty() && !deriv.empty() && t0_samples > 0, Errc::kInvalidArgument,
          "empty cycle");
  const double dmin = *std::min_element(deriv.begin(), deriv.end());
  require(dmin < 0.0, Errc::kDegenerateFlow, "flow derivative never negative");
  const auto [lo, hi] = std::minmax_element(flow.begin(), flow.end());
  return (*hi - *lo) / (-dmin * t0_samples);
}

/// QOQ = time the flow spends above min + 50% of its peak-to-peak amplitude,
/// divided by T0 (both in samples). Crossings are linearly interpolated.
/// A flow with no excursion counts as fully open.
inline double quasi_open_quotient(std::span<const double> flow, double t0_samples) {
  require(!flow.empty() && t0_samples > 0, Errc::kInvalidArgument, "empty cycle");
  const auto [lo, hi] = std::minmax_element(flow.begin(), flow.end());
  const double p2p = *hi - *lo;
  if (!(p2p > 0.0)) return std::min(1.0, static_cast<double>(flow.size()) / t0_samples);
  const double thr = *lo + 0.5 * p2p;
  // Piecewise-linear flow; each endpoint sample also owns half an interval.
  double open = 0.5 * ((flow.front() > thr) + (flow.back() > thr));
  for (std::size_t i = 0; i + 1 < flow.size(); ++i) {
    const double a = flow[i], b = flow[i + 1];
    if (a > thr && b > thr) {
      open += 1.0;
    } else if ((a > thr) != (b > thr)) {
      open += (std::max(a, b) - thr) / std::abs(b - a);
    }
  }
  return std::clamp(open / t0_samples, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Decomposition-based cycle analysis

/// Blackman-windowed two-period frame centred on gci, decomposed.
inline CepstralDecomposition decompose_cycle(const AudioBuffer& buf, long gci, double t0_s,
                                             const CepstrumConfig& cfg = {}) {
  const int L = static_cast<int>(std::lround(t0_s * buf.sample_rate));
  require(L >= 2, Errc::kInvalidArgument, "period too short");
  require(gci - L >= 0 && gci + L < static_cast<long>(buf.size()), Errc::kInvalidArgument,
          "cycle window leaves the signal");
  std::vector<double> frame(2 * L + 1);
  for (int i = -L; i <= L; ++i)
    frame[i + L] = buf.samples[gci + i] * dsp::blackman_taper(static_cast<double>(i) / L);
  auto dec = mixed_phase_decompose(frame, cfg);
  dec.gci = gci;
  dec.t0 = t0_s;
  dec.sample_rate = buf.sample_rate;
  dec.windowed = true;
  dec.half_span = L;
  return dec;
}

/// Flow derivative over the cycle ending at the decomposition origin, taken
/// from the maximum-phase part. Its sign is chosen so the dominant
/// (closing) excursion is negative; for windowed frames the analysis window
/// is divided out, floored at cfg.window_floor.
inline std::vector<double> flow_derivative(const CepstralDecomposition& dec,
                                           const GlottalConfig& cfg = {}) {
  const int L = static_cast<int>(std::lround(dec.t0 * dec.sample_rate));
  require(L >= 2, Errc::kInvalidArgument, "period too short");
  std::vector<double> d(L);
  for (int i = 0; i < L; ++i) {
    const long n = i - L + 1;
    double v = dec.max_at(n);
    if (dec.windowed)
      v /= std::max(dsp::blackman_taper(static_cast<double>(n) / L), cfg.window_floor);
    d[i] = v;
  }
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  if (std::abs(*hi) > std::abs(*lo))
    for (auto& v : d) v = -v;
  return d;
}

/// Integrated derivative with the straight line between its endpoints removed.
inline std::vector<double> flow_from_derivative(std::span<const double> d) {
  std::vector<double> flow(d.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) flow[i] = (acc += d[i]);
  if (flow.size() > 1) {
    const double a = flow.front(), b = flow.back();
    const double m = static_cast<double>(flow.size() - 1);
    for (std::size_t i = 0; i < flow.size(); ++i) flow[i] -= a + (b - a) * i / m;
  }
  return flow;
}

inline double estimate_glottal_formant(const CepstralDecomposition& dec,
                                       const GlottalConfig& cfg = {}) {
  const auto d = flow_derivative(dec, cfg);
  return glottal_formant(d, dec.sample_rate, cfg.fg_band_f0 / dec.t0, cfg.spectrum_oversample);
}

inline double compute_naq(const CepstralDecomposition& dec, const GlottalConfig& cfg = {}) {
  const auto d = flow_derivative(dec, cfg);
  const auto flow = flow_from_derivative(d);
  return normalized_amplitude_quotient(flow, d, dec.t0 * dec.sample_rate);
}

inline double compute_qoq(const CepstralDecomposition& dec, const GlottalConfig& cfg = {}) {
  const auto d = flow_derivative(dec, cfg);
  require(*std::min_element(d.begin(), d.end()) < 0.0, Errc::kDegenerateFlow,
          "flow derivative never negative");
  const auto flow = flow_from_derivative(d);
  return quasi_open_quotient(flow, dec.t0 * dec.sample_rate);
}

struct GlottalAnalysis {
  std::vector<GlottalCycleFeatures> cycles;
  DropCounts drops;
};

/// Features for every GCI of track; each GCI yields either a record or one
/// drop-reason count.
inline GlottalAnalysis analyze_glottal_cycles(const AudioBuffer& buf, const AnalysisTrack& track,
                                              const GlottalConfig& cfg = {}) {
  GlottalAnalysis out;
  for (long g : track.gci) {
    const double f0 = track.f0_at(g);
    const double t0 = f0 > 0 ? 1.0 / f0 : track.mean_t0;
    const long L = std::lround(t0 * buf.sample_rate);
    if (!(t0 > 0) || g - L < 0 || g + L >= static_cast<long>(buf.size())) {
      out.drops.add(DropReason::kEdge);
      continue;
    }
    try {
      const auto dec = decompose_cycle(buf, g, t0, cfg.cepstrum);
      const auto d = flow_derivative(dec, cfg);
      const auto flow = flow_from_derivative(d);
      GlottalCycleFeatures f;
      f.gci = g;
      f.time_s = static_cast<double>(g) / buf.sample_rate;
      f.f0 = 1.0 / t0;
      f.t0 = t0;
      f.naq = normalized_amplitude_quotient(flow, d, t0 * buf.sample_rate);
      f.qoq = quasi_open_quotient(flow, t0 * buf.sample_rate);
      f.fg = glottal_formant(d, buf.sample_rate, cfg.fg_band_f0 / t0, cfg.spectrum_oversample);
      f.fg_over_f0 = f.fg * t0;
      if (!(f.fg > 0 && f.naq > 0 && f.naq < 1 && f.qoq > 0 && f.qoq <= 1)) {
        out.drops.add(DropReason::kOutOfRange);
        continue;
      }
      out.cycles.push_back(f);
    } catch (const Error& e) {
      switch (e.code()) {
        case Errc::kPhaseUnwrapFailure:
        case Errc::kZeroFrame: out.drops.add(DropReason::kPhaseUnwrap); break;
        case Errc::kNoPeakFound: out.drops.add(DropReason::kNoPeak); break;
        case Errc::kDegenerateFlow: out.drops.add(DropReason::kDegenerateFlow); break;
        default: throw;
      }
    }
  }
  return out;
}

}  // namespace vqt
