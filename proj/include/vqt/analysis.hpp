#pragma once

// Per-utterance analysis front end: pitch, GCIs, LPC envelope and residual,
// glottal cycle features and the maximum voiced frequency track.

#include <vector>

#include "vqt/audio.hpp"
#include "vqt/gci.hpp"
#include "vqt/glottal.hpp"
#include "vqt/harmonicity.hpp"
#include "vqt/lpc.hpp"
#include "vqt/pitch.hpp"

namespace vqt {

struct AnalysisConfig {
  PitchConfig pitch{};
  LpcConfig lpc{};
  GciConfig gci{};
  GlottalConfig glottal{};
  HarmonicityConfig harmonicity{};
};

struct SignalAnalysis {
  AnalysisTrack track;
  LpcEnvelope envelope;
  AudioBuffer residual;
  bool no_voiced_region = false;
};

/// Pitch, LPC and GCIs only.
inline SignalAnalysis analyze_signal(const AudioBuffer& buf, const AnalysisConfig& cfg = {}) {
  validate(buf);
  SignalAnalysis out;
  out.track = estimate_pitch(buf, cfg.pitch);
  out.envelope = lpc_analyze(buf, cfg.lpc);
  out.residual = inverse_filter(buf, out.envelope);
  auto g = detect_gci(buf, out.track, out.residual.samples, cfg.gci);
  out.track = std::move(g.track);
  out.no_voiced_region = g.no_voiced_region;
  return out;
}

struct UtteranceAnalysis {
  SignalAnalysis signal;
  GlottalAnalysis glottal;
  MaxVoicedTrack fm;
};

inline UtteranceAnalysis analyze_utterance(const AudioBuffer& buf, const AnalysisConfig& cfg = {}) {
  UtteranceAnalysis out;
  out.signal = analyze_signal(buf, cfg);
  if (out.signal.no_voiced_region) return out;
  out.glottal = analyze_glottal_cycles(buf, out.signal.track, cfg.glottal);
  out.fm = max_voiced_track(buf, out.signal.track, cfg.harmonicity);
  return out;
}

}  // namespace vqt
