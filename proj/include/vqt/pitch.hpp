#pragma once

// Normalized cross-correlation pitch tracker with sub-multiple (octave)
// correction and a periodicity voicing gate.

#include <algorithm>
#include <cmath>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/error.hpp"

namespace vqt {

struct AnalysisTrack {
  int sample_rate = 0;
  double frame_hop = 0.01;     // seconds; frame i is centred at i * frame_hop
  std::vector<double> f0;      // Hz, 0 when unvoiced
  std::vector<bool> voiced;
  std::vector<double> periodicity;  // NCCF peak per frame
  std::vector<long> gci;       // strictly increasing sample indices
  double mean_t0 = 0.0;        // seconds, mean of 1/f0 over voiced frames
  int residual_polarity = -1;  // sign of the residual excursion at GCIs

  std::size_t frame_count() const { return f0.size(); }
  double frame_time(std::size_t i) const { return i * frame_hop; }

  /// Frame whose span [t - hop/2, t + hop/2) contains sample n.
  std::size_t frame_for_sample(long n) const {
    const double t = static_cast<double>(n) / sample_rate;
    const long i = std::lround(t / frame_hop);
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(f0.size()) - 1));
  }

  bool voiced_at(long n) const { return !f0.empty() && voiced[frame_for_sample(n)]; }
  double f0_at(long n) const { return f0.empty() ? 0.0 : f0[frame_for_sample(n)]; }

  /// Local pitch period in samples at n, falling back to the mean period.
  double period_at(long n) const {
    const double f = f0_at(n);
    if (f > 0) return sample_rate / f;
    return mean_t0 * sample_rate;
  }

  std::size_t voiced_count() const {
    return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
  }

  double mean_f0() const {
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < f0.size(); ++i)
      if (voiced[i]) s += f0[i], ++n;
    return n ? s / n : 0.0;
  }

  void update_mean_t0() {
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < f0.size(); ++i)
      if (voiced[i]) s += 1.0 / f0[i], ++n;
    mean_t0 = n ? s / n : 0.0;
  }
};

struct PitchConfig {
  double f_min = 60.0;
  double f_max = 400.0;
  double frame_hop = 0.01;            // seconds
  double window_periods = 2.0;        // correlation window, in periods of f_min
  double voicing_threshold = 0.5;     // minimum NCCF peak
  double octave_ratio = 0.9;          // sub-multiple accepted at this share of the peak
  double silence_db = -50.0;          // frames this far below the loudest are unvoiced
  int min_voiced_run = 3;             // shorter voiced runs are dropped
  double lowpass_hz = 1000.0;         // correlation runs on a low-passed copy; 0 disables
  double max_jump = 0.2;              // relative frame-to-frame f0 change within a run
  int min_split_run = 5;              // pieces of a run split at a jump shorter than this are dropped
};

namespace detail {

/// NCCF of the frame centred on c for every lag in [lag_min, lag_max]; the
/// compared segments straddle c symmetrically for each lag.
inline std::vector<double> nccf(const std::vector<double>& x, long c, int win, int lag_min,
                                int lag_max, double* frame_energy) {
  std::vector<double> r(lag_max + 1, 0.0);
  const long n = static_cast<long>(x.size());
  *frame_energy = 0.0;
  {
    const long a = c - win / 2;
    for (long i = std::max(0L, a); i < std::min(n, a + win); ++i) *frame_energy += x[i] * x[i];
  }
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    const long a = c - (win + lag) / 2;
    if (a < 0 || a + win + lag > n) continue;
    double xy = 0, xx = 0, yy = 0;
    for (long i = a; i < a + win; ++i) {
      xy += x[i] * x[i + lag];
      xx += x[i] * x[i];
      yy += x[i + lag] * x[i + lag];
    }
    if (xx > 0 && yy > 0) r[lag] = xy / std::sqrt(xx * yy);
  }
  return r;
}

}  // namespace detail

inline AnalysisTrack estimate_pitch(const AudioBuffer& buf, const PitchConfig& cfg = {}) {
  require(cfg.f_min >= 50.0 && cfg.f_max > cfg.f_min, Errc::kInvalidArgument,
          "pitch range must satisfy 50 <= f_min < f_max");
  const int fs = buf.sample_rate;
  const int lag_min = std::max(3, static_cast<int>(std::floor(fs / cfg.f_max)));
  const int lag_max = static_cast<int>(std::ceil(fs / cfg.f_min));
  const int win = static_cast<int>(std::lround(cfg.window_periods * fs / cfg.f_min));
  require(buf.samples.size() >= static_cast<std::size_t>(2 * (win + lag_max)),
          Errc::kSignalTooShort, "signal shorter than two analysis windows");

  AnalysisTrack tr;
  tr.sample_rate = fs;
  tr.frame_hop = cfg.frame_hop;
  const std::size_t frames =
      static_cast<std::size_t>(std::floor(buf.duration() / cfg.frame_hop)) + 1;
  tr.f0.assign(frames, 0.0);
  tr.voiced.assign(frames, false);
  tr.periodicity.assign(frames, 0.0);
  std::vector<double> energies(frames, 0.0);
  std::vector<double> x = buf.samples;
  if (cfg.lowpass_hz > 0 && cfg.lowpass_hz < fs / 2.0)
    x = dsp::filter_centered(x, dsp::kaiser_lowpass(cfg.lowpass_hz, fs, 400.0, 50.0));

  for (std::size_t i = 0; i < frames; ++i) {
    const long c = std::lround(i * cfg.frame_hop * fs);
    double e = 0.0;
    // One extra lag on each side so peaks on the range limits are still local maxima.
    const auto r = detail::nccf(x, c, win, lag_min - 1, lag_max + 1, &e);
    energies[i] = e;
    int best = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag)
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && (best < 0 || r[lag] > r[best]))
        best = lag;
    if (best < 0) continue;
    // Sub-multiple correction: prefer the shortest lag whose peak is nearly
    // as strong as the global one.
    for (int lag = lag_min; lag < best; ++lag) {
      if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= cfg.octave_ratio * r[best]) {
        best = lag;
        break;
      }
    }
    tr.periodicity[i] = r[best];
    if (r[best] < cfg.voicing_threshold) continue;
    const double lag = best + dsp::parabolic_offset(r[best - 1], r[best], r[best + 1]);
    tr.f0[i] = std::clamp(fs / lag, cfg.f_min, cfg.f_max);
    tr.voiced[i] = true;
  }

  const double max_e = *std::max_element(energies.begin(), energies.end());
  const double floor_e = max_e * std::pow(10.0, cfg.silence_db / 10.0);
  for (std::size_t i = 0; i < frames; ++i)
    if (energies[i] <= floor_e) tr.voiced[i] = false;

  // Split runs where f0 jumps; short pieces next to a jump are mostly formant
  // ringing after the excitation stopped, or octave slips.
  const auto before = tr.voiced;
  std::size_t i = 0;
  while (i < frames) {
    if (!tr.voiced[i]) { ++i; continue; }
    std::size_t j = i + 1;
    while (j < frames && tr.voiced[j] &&
           std::abs(std::log(tr.f0[j] / tr.f0[j - 1])) <= std::log(1.0 + cfg.max_jump))
      ++j;
    const bool split_before = i > 0 && before[i - 1];
    const bool split_after = j < frames && before[j];
    if ((split_before || split_after) && static_cast<int>(j - i) < cfg.min_split_run)
      for (std::size_t k = i; k < j; ++k) tr.voiced[k] = false;
    i = j;
  }

  // Drop short voiced runs, then median-smooth f0 inside each run.
  i = 0;
  while (i < frames) {
    if (!tr.voiced[i]) { ++i; continue; }
    std::size_t j = i;
    while (j < frames && tr.voiced[j]) ++j;
    if (static_cast<int>(j - i) < cfg.min_voiced_run) {
      for (std::size_t k = i; k < j; ++k) tr.voiced[k] = false;
    } else {
      std::vector<double> smoothed(tr.f0.begin() + i, tr.f0.begin() + j);
      for (std::size_t k = i + 1; k + 1 < j; ++k)
        smoothed[k - i] = dsp::median({tr.f0[k - 1], tr.f0[k], tr.f0[k + 1]});
      std::copy(smoothed.begin(), smoothed.end(), tr.f0.begin() + i);
    }
    i = j;
  }
  for (std::size_t k = 0; k < frames; ++k)
    if (!tr.voiced[k]) tr.f0[k] = 0.0;
  tr.update_mean_t0();
  return tr;
}

}  // namespace vqt
