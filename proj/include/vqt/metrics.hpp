#pragma once

// Objective comparisons between an input and its resynthesis.

#include <algorithm>
#include <cmath>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/error.hpp"
#include "vqt/lpc.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

struct LsdConfig {
  double window_s = 0.025;
  double hop_s = 0.01;
  int order = -1;      // negative selects sample_rate/1000 + 2
  int bins = 512;
  double floor_db = -100.0;
};

/// Per-frame LPC envelope distance in dB (RMS over bins), on frames where
/// `voiced` is true for the frame centre. Envelopes include the gain term.
inline std::vector<double> lsd_frames(const AudioBuffer& a, const AudioBuffer& b,
                                      const AnalysisTrack& voiced, const LsdConfig& cfg = {}) {
  require(a.sample_rate == b.sample_rate, Errc::kInvalidArgument, "sample rates differ");
  LpcConfig lc;
  lc.order = cfg.order;
  lc.window_s = cfg.window_s;
  lc.hop_s = cfg.hop_s;
  const auto ea = lpc_analyze(a, lc);
  const auto eb = lpc_analyze(b, lc);
  std::vector<double> out;
  const std::size_t frames = std::min(ea.frame_count(), eb.frame_count());
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k * ea.hop) / a.sample_rate;
    const auto i = static_cast<std::size_t>(std::lround(t / voiced.frame_hop));
    if (i >= voiced.frame_count() || !voiced.voiced[i]) continue;
    const auto pa = allpole_power_response(ea.coeffs[k], ea.gains[k], cfg.bins);
    const auto pb = allpole_power_response(eb.coeffs[k], eb.gains[k], cfg.bins);
    double acc = 0.0;
    for (int j = 0; j < cfg.bins; ++j) {
      const double da = std::max(10.0 * std::log10(pa[j] + 1e-300), cfg.floor_db);
      const double db = std::max(10.0 * std::log10(pb[j] + 1e-300), cfg.floor_db);
      acc += (da - db) * (da - db);
    }
    out.push_back(std::sqrt(acc / cfg.bins));
  }
  return out;
}

inline double log_spectral_distance(const AudioBuffer& a, const AudioBuffer& b,
                                    const AnalysisTrack& voiced, const LsdConfig& cfg = {}) {
  const auto d = lsd_frames(a, b, voiced, cfg);
  require(!d.empty(), Errc::kNoVoicedRegion, "no voiced frames to compare");
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size());
}

}  // namespace vqt
