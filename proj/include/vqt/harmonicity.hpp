#pragma once

// Maximum voiced frequency: highest harmonic below which at least 80% of
// the harmonics look sinusoidal.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

struct HarmonicityConfig {
  double window_periods = 4.0;
  int zero_pad = 4;
  double peak_over_valley_db = 10.0;
  double search_band_f0 = 0.25;     // peak searched within +-0.25 f0 of the expected harmonic
  double max_deviation_f0 = 0.125;  // accepted peak offset from the expected harmonic
  double voiced_fraction = 0.8;
  int smoothing = 3;                // median length across frames
  double edge_guard_hops = 1.0;     // window margin from voiced-run edges, in frame hops
};

struct FmFrame {
  double fm = 0.0;
  std::vector<bool> voiced;  // per harmonic k = 1..K
};

/// fm for one raw (unwindowed) frame of at least window_periods pitch periods.
inline FmFrame estimate_max_voiced_frequency(std::span<const double> frame, double f0,
                                             double sample_rate,
                                             const HarmonicityConfig& cfg = {}) {
  require(f0 > 0, Errc::kInvalidArgument, "f0 must be positive");
  const double need = std::floor(cfg.window_periods * sample_rate / f0);
  require(static_cast<double>(frame.size()) >= need, Errc::kFrameTooShort,
          "frame shorter than the harmonicity window");
  const std::size_t L = frame.size();
  const auto w = dsp::hann(L);
  std::vector<double> xw(L);
  for (std::size_t i = 0; i < L; ++i) xw[i] = frame[i] * w[i];
  const std::size_t N = fft::next_pow2(cfg.zero_pad * L);
  const auto X = fft::rfft(xw, N);
  const std::size_t bins = X.size();
  std::vector<double> db(bins);
  for (std::size_t k = 0; k < bins; ++k) db[k] = 20.0 * std::log10(std::abs(X[k]) + 1e-12);
  const double hz = sample_rate / static_cast<double>(N);
  const double nyq = sample_rate / 2.0;
  const int K = static_cast<int>(nyq / f0);

  FmFrame out;
  out.voiced.assign(K, false);
  double last_f = 0.0;
  int last_k = 0;
  std::vector<double> valley;
  for (int k = 1; k <= K; ++k) {
    // Expected position anchored on the last accepted harmonic absorbs small
    // f0 errors that would otherwise accumulate with k.
    const double c = last_f + (k - last_k) * f0;
    if (c > nyq) continue;
    const long lo = static_cast<long>(std::ceil((c - cfg.search_band_f0 * f0) / hz));
    const long hi = std::min<long>(static_cast<long>(std::floor((c + cfg.search_band_f0 * f0) / hz)),
                                   static_cast<long>(bins) - 1);
    if (lo > hi || lo < 0) continue;
    long p = lo;
    for (long b = lo + 1; b <= hi; ++b)
      if (db[b] > db[p]) p = b;
    // Reference level: median over the +-f0 neighbourhood outside every
    // harmonic search band, i.e. the inter-harmonic valleys.
    valley.clear();
    const long nlo = std::max(0L, static_cast<long>(std::ceil((c - f0) / hz)));
    const long nhi = std::min<long>(static_cast<long>(bins) - 1,
                                    static_cast<long>(std::floor((c + f0) / hz)));
    for (long b = nlo; b <= nhi; ++b) {
      const double rel = (b * hz - c) / f0;
      const double dist = std::abs(rel - std::round(rel));
      if (dist > cfg.search_band_f0) valley.push_back(db[b]);
    }
    if (valley.empty()) continue;
    const double ref = dsp::median(valley);
    const bool v = db[p] - ref >= cfg.peak_over_valley_db &&
                   std::abs(p * hz - c) < cfg.max_deviation_f0 * f0;
    out.voiced[k - 1] = v;
    if (v) {
      last_f = p * hz;
      last_k = k;
    }
  }
  int count = 0;
  for (int k = 1; k <= K; ++k) {
    count += out.voiced[k - 1];
    if (out.voiced[k - 1] && count >= cfg.voiced_fraction * k) out.fm = k * f0;
  }
  return out;
}

struct MaxVoicedTrack {
  std::vector<double> time_s;
  std::vector<double> fm;  // smoothed, one entry per analysed voiced frame
  double mean = 0.0;
  double median = 0.0;
};

/// Median filter of odd length applied independently within each run of
/// consecutive frame indices; outputs stay inside the candidate set.
inline std::vector<double> median_smooth_runs(const std::vector<double>& v,
                                              const std::vector<std::size_t>& frame_index,
                                              int length) {
  std::vector<double> out(v);
  const int half = length / 2;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i + 1;
    while (j < v.size() && frame_index[j] == frame_index[j - 1] + 1) ++j;
    for (std::size_t k = i; k < j; ++k) {
      // Window shrinks symmetrically at run edges so it stays odd and centred.
      const std::size_t h = std::min({static_cast<std::size_t>(half), k - i, j - 1 - k});
      std::vector<double> win(v.begin() + (k - h), v.begin() + (k + h + 1));
      out[k] = dsp::median(win);
    }
    i = j;
  }
  return out;
}

/// Frame-wise fm over the voiced frames of track, median-smoothed.
inline MaxVoicedTrack max_voiced_track(const AudioBuffer& buf, const AnalysisTrack& track,
                                       const HarmonicityConfig& cfg = {}) {
  MaxVoicedTrack out;
  std::vector<double> raw;
  std::vector<std::size_t> idx;
  const long n = static_cast<long>(buf.size());
  const double hop = track.frame_hop * buf.sample_rate;
  std::size_t run_begin = 0;
  for (std::size_t i = 0; i < track.frame_count(); ++i) {
    if (!track.voiced[i]) continue;
    if (i == 0 || !track.voiced[i - 1]) run_begin = i;
    std::size_t run_end = i;
    while (run_end + 1 < track.frame_count() && track.voiced[run_end + 1]) ++run_end;
    const double f0 = track.f0[i];
    const long len = static_cast<long>(std::ceil(cfg.window_periods * buf.sample_rate / f0));
    const long c = std::lround(track.frame_time(i) * buf.sample_rate);
    const long a = c - len / 2;
    if (a < 0 || a + len > n) continue;
    // Windows reaching into the first or last hop of a run see the voicing
    // transition.
    const double guard = cfg.edge_guard_hops;
    if (a < (run_begin + guard) * hop || a + len > (run_end - guard) * hop) continue;
    const auto fr = estimate_max_voiced_frequency(
        std::span<const double>(buf.samples).subspan(a, len), f0, buf.sample_rate, cfg);
    if (fr.fm <= 0) continue;  // no harmonic at all: not voiced for this measure
    raw.push_back(fr.fm);
    idx.push_back(i);
    out.time_s.push_back(track.frame_time(i));
  }
  out.fm = median_smooth_runs(raw, idx, cfg.smoothing);
  if (!out.fm.empty()) {
    out.mean = dsp::mean(out.fm);
    out.median = dsp::median(out.fm);
  }
  return out;
}

}  // namespace vqt
