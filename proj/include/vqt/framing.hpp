#pragma once

// GCI-centred, pitch- and energy-normalized frames.

#include <cmath>
#include <span>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

enum class SourceKind { kSpeech, kResidual };

struct NormalizedFrameSet {
  int frame_length = 0;
  SourceKind source_kind = SourceKind::kSpeech;
  std::vector<std::vector<double>> frames;
  std::vector<long> gci;        // sample index each frame is centred on
  std::vector<double> periods;  // local period (samples) used for each frame
  int skipped_edge = 0;
  int skipped_degenerate = 0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

struct FramingConfig {
  int normalized_length = 200;
  int kernel_half_width = 16;
  double degenerate_energy = 1e-10;
};

/// Renders the two-period Hann-windowed span around position centre (in
/// samples, may be fractional) onto out_len points; output point i sits at
/// centre + (i - out_len/2) * 2T/out_len.
inline std::vector<double> render_two_period_frame(std::span<const double> x, double centre,
                                                   double period, int out_len,
                                                   int half_width = 16) {
  std::vector<double> y(out_len, 0.0);
  const double step = 2.0 * period / out_len;
  const double cutoff = std::min(1.0, 1.0 / step);
  for (int i = 0; i < out_len; ++i) {
    const double u = (i - out_len / 2) * step;
    const double w = dsp::hann_taper(u / period);
    if (w == 0.0) continue;
    y[i] = w * dsp::bandlimited_sample(x, centre + u, cutoff, half_width);
  }
  return y;
}

/// One frame per usable GCI of track. GCIs whose window or interpolation
/// kernel would leave the signal are skipped and counted in skipped_edge.
inline NormalizedFrameSet extract_gci_frames(const AudioBuffer& buf, const AnalysisTrack& track,
                                             SourceKind kind = SourceKind::kSpeech,
                                             const FramingConfig& cfg = {}) {
  require(cfg.normalized_length >= 32 && cfg.normalized_length % 2 == 0,
          Errc::kInvalidArgument, "normalized_length must be even and >= 32");
  require(!track.gci.empty(), Errc::kNoGci, "track has no GCIs");
  NormalizedFrameSet set;
  set.frame_length = cfg.normalized_length;
  set.source_kind = kind;
  const long n = static_cast<long>(buf.size());
  for (long g : track.gci) {
    const double T = track.period_at(g);
    if (!(T > 0)) {
      ++set.skipped_edge;
      continue;
    }
    const double step = 2.0 * T / cfg.normalized_length;
    const double reach = cfg.kernel_half_width * std::max(1.0, step);
    if (g - T - reach < 0 || g + T + reach > n - 1) {
      ++set.skipped_edge;
      continue;
    }
    auto f = render_two_period_frame(buf.samples, static_cast<double>(g), T,
                                     cfg.normalized_length, cfg.kernel_half_width);
    const double e = dsp::energy(f);
    if (e < cfg.degenerate_energy) {
      ++set.skipped_degenerate;
      continue;
    }
    const double s = 1.0 / std::sqrt(e);
    for (auto& v : f) v *= s;
    set.frames.push_back(std::move(f));
    set.gci.push_back(g);
    set.periods.push_back(T);
  }
  return set;
}

}  // namespace vqt
