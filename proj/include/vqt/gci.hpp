#pragma once

// Glottal closure instants from the mean-based signal and the LPC residual.
//
// The mean-based signal (a Blackman-weighted moving average spanning about
// 1.75 local periods) oscillates once per cycle; its minima delimit one
// search interval per period. A first pass measures where residual peaks sit
// within those intervals, a second pass re-centres every interval on that
// phase and keeps the residual extremum inside it.

#include <algorithm>
#include <cmath>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/lpc.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

struct GciConfig {
  double window_periods = 1.75;
  LpcConfig lpc{};
};

struct GciResult {
  AnalysisTrack track;
  bool no_voiced_region = false;
};

namespace detail {

struct VoicedRun {
  long begin;  // first sample
  long end;    // one past the last sample
  double period;
};

inline std::vector<VoicedRun> voiced_runs(const AnalysisTrack& tr, long n_samples) {
  std::vector<VoicedRun> runs;
  const double hop = tr.frame_hop * tr.sample_rate;
  std::size_t i = 0;
  while (i < tr.frame_count()) {
    if (!tr.voiced[i]) { ++i; continue; }
    std::size_t j = i;
    std::vector<double> periods;
    while (j < tr.frame_count() && tr.voiced[j]) periods.push_back(tr.sample_rate / tr.f0[j++]);
    const long b = std::max(0L, static_cast<long>(std::ceil((i - 0.5) * hop)));
    const long e = std::min(n_samples, static_cast<long>(std::ceil((j - 0.5) * hop)));
    if (e > b) runs.push_back({b, e, dsp::median(periods)});
    i = j;
  }
  return runs;
}

inline std::vector<double> mean_based_signal(const std::vector<double>& x, long begin, long end,
                                             double period, double window_periods) {
  int len = static_cast<int>(std::lround(window_periods * period));
  if (len % 2 == 0) ++len;
  const auto w = dsp::blackman(static_cast<std::size_t>(len) + 2);
  const int half = len / 2;
  double wsum = 0;
  for (int m = 0; m < len; ++m) wsum += w[m + 1];
  std::vector<double> y(static_cast<std::size_t>(end - begin), 0.0);
  const long n = static_cast<long>(x.size());
  for (long t = begin; t < end; ++t) {
    double acc = 0.0;
    for (int m = -half; m <= half; ++m) {
      const long k = t + m;
      if (k >= 0 && k < n) acc += w[m + half + 1] * x[k];
    }
    y[t - begin] = acc / wsum;
  }
  return y;
}

inline long argmax_in(const std::vector<double>& v, long a, long b) {
  a = std::max(a, 0L);
  b = std::min(b, static_cast<long>(v.size()));
  if (a >= b) return -1;
  long best = a;
  for (long i = a + 1; i < b; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

/// Sign of the dominant residual excursion over voiced samples (skewness).
inline int residual_polarity(const std::vector<double>& residual, const AnalysisTrack& tr) {
  double m1 = 0, m2 = 0, m3 = 0;
  std::size_t n = 0;
  for (long i = 0; i < static_cast<long>(residual.size()); ++i) {
    if (!tr.voiced_at(i)) continue;
    m1 += residual[i];
    ++n;
  }
  if (n == 0) return -1;
  m1 /= n;
  for (long i = 0; i < static_cast<long>(residual.size()); ++i) {
    if (!tr.voiced_at(i)) continue;
    const double d = residual[i] - m1;
    m2 += d * d;
    m3 += d * d * d;
  }
  return m3 > 0 ? 1 : -1;
}

/// Fills track.gci from a precomputed LPC residual.
inline GciResult detect_gci(const AudioBuffer& buf, const AnalysisTrack& track,
                            const std::vector<double>& residual, const GciConfig& cfg = {}) {
  GciResult out{track, false};
  out.track.gci.clear();
  if (track.voiced_count() == 0) {
    out.no_voiced_region = true;
    return out;
  }
  const int pol = residual_polarity(residual, track);
  out.track.residual_polarity = pol;
  std::vector<double> peak(residual.size());
  for (std::size_t i = 0; i < residual.size(); ++i) peak[i] = pol * residual[i];

  std::vector<long> gcis;
  for (const auto& run : detail::voiced_runs(track, static_cast<long>(buf.size()))) {
    const double T = run.period;
    const auto mbs = detail::mean_based_signal(buf.samples, run.begin, run.end, T,
                                               cfg.window_periods);
    // Local minima of the mean-based signal, at most one per half period.
    std::vector<long> minima;
    for (long i = 1; i + 1 < static_cast<long>(mbs.size()); ++i) {
      if (!(mbs[i] < mbs[i - 1] && mbs[i] <= mbs[i + 1])) continue;
      const long t = run.begin + i;
      if (!minima.empty() && t - minima.back() < 0.5 * T) {
        if (mbs[i] < mbs[minima.back() - run.begin]) minima.back() = t;
      } else {
        minima.push_back(t);
      }
    }
    if (minima.size() < 2) continue;

    // Pass 1: typical position of the residual peak within a cycle.
    double cs = 0, sn = 0;
    for (std::size_t k = 0; k + 1 < minima.size(); ++k) {
      const long p = detail::argmax_in(peak, minima[k], minima[k + 1]);
      if (p < 0) continue;
      const double phase = 2.0 * dsp::kPi * (p - minima[k]) / (minima[k + 1] - minima[k]);
      const double wgt = std::abs(peak[p]);
      cs += wgt * std::cos(phase);
      sn += wgt * std::sin(phase);
    }
    double phi = std::atan2(sn, cs) / (2.0 * dsp::kPi);
    if (phi < 0) phi += 1.0;

    // Pass 2: one pick per interval centred on the expected position.
    std::vector<long> picks;
    for (std::size_t k = 0; k < minima.size(); ++k) {
      const double Tk = k + 1 < minima.size() ? static_cast<double>(minima[k + 1] - minima[k])
                                               : T;
      const double local = std::clamp(Tk, 0.5 * T, 1.5 * T);
      const long centre = minima[k] + std::lround(phi * local);
      const long a = std::max(run.begin, centre - std::lround(0.5 * local));
      const long b = std::min(run.end, centre + std::lround(0.5 * local));
      const long p = detail::argmax_in(peak, a, b);
      if (p < 0) continue;
      if (!picks.empty() && p - picks.back() < 0.5 * T) {
        if (peak[p] > peak[picks.back()]) picks.back() = p;
        continue;
      }
      picks.push_back(p);
    }
    for (long p : picks)
      if (track.voiced_at(p) && (gcis.empty() || p > gcis.back())) gcis.push_back(p);
  }
  out.track.gci = std::move(gcis);
  return out;
}

/// Convenience overload computing the residual with the configured LPC.
inline GciResult detect_gci(const AudioBuffer& buf, const AnalysisTrack& track,
                            const GciConfig& cfg = {}) {
  const auto env = lpc_analyze(buf, cfg.lpc);
  const auto res = inverse_filter(buf, env);
  return detect_gci(buf, track, res.samples, cfg);
}

}  // namespace vqt
