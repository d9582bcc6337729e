#pragma once

// Averaged amplitude spectra of normalized frames, AR fits to them, and the
// AR-ratio filter that moves one averaged spectrum onto another.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"
#include "vqt/framing.hpp"
#include "vqt/lpc.hpp"

namespace vqt {

struct AveragedSpectrum {
  std::vector<double> bins;  // one-sided, frame_length/2 + 1 linear amplitudes
  int frame_count = 0;
  int frame_length = 0;
};

inline AveragedSpectrum averaged_spectrum(const std::vector<std::vector<double>>& frames) {
  require(!frames.empty(), Errc::kEmptyFrameSet, "no frames to average");
  const std::size_t n = frames.front().size();
  AveragedSpectrum out;
  out.frame_length = static_cast<int>(n);
  out.frame_count = static_cast<int>(frames.size());
  out.bins.assign(n / 2 + 1, 0.0);
  for (const auto& f : frames) {
    require(f.size() == n, Errc::kDimensionMismatch, "frames differ in length");
    const auto X = fft::rfft(f);
    for (std::size_t k = 0; k < out.bins.size(); ++k) out.bins[k] += std::abs(X[k]);
  }
  for (auto& b : out.bins) b /= static_cast<double>(frames.size());
  return out;
}

inline AveragedSpectrum averaged_spectrum(const NormalizedFrameSet& set) {
  require(!set.empty(), Errc::kEmptyFrameSet, "no frames to average");
  return averaged_spectrum(set.frames);
}

struct ArModel {
  std::vector<double> a;  // monic
  double gain = 0.0;      // model power spectrum is gain^2 / |A|^2

  int order() const { return static_cast<int>(a.size()) - 1; }
};

/// Autocorrelation lags of the power spectrum |bins|^2 over the full
/// frame_length-point grid.
inline std::vector<double> spectrum_autocorrelation(const AveragedSpectrum& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.frame_length);
  std::vector<fft::cplx> P(n / 2 + 1);
  for (std::size_t k = 0; k < P.size(); ++k) P[k] = spec.bins[k] * spec.bins[k];
  return fft::irfft(P, n);
}

inline ArModel fit_ar_to_spectrum(const AveragedSpectrum& spec, int order) {
  require(order >= 2 && order < spec.frame_length / 2, Errc::kOrderTooHigh,
          "AR order must be in [2, frame_length/2)");
  require(static_cast<int>(spec.bins.size()) == spec.frame_length / 2 + 1,
          Errc::kDimensionMismatch, "bin count does not match frame_length");
  for (double b : spec.bins)
    require(std::isfinite(b) && b >= 0.0, Errc::kNonFiniteSpectrum,
            "spectrum has a negative or non-finite bin");
  const auto r = spectrum_autocorrelation(spec);
  require(r[0] > 0.0, Errc::kNonFiniteSpectrum, "spectrum is identically zero");
  const auto lev = levinson(std::span<const double>(r).first(order + 1), order);
  return {lev.a, std::sqrt(lev.error)};
}

/// Power spectrum gain^2/|A|^2 on the one-sided grid of an n-point frame.
inline std::vector<double> ar_power_on_grid(const ArModel& m, int n) {
  std::vector<double> p(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) {
    const double w = 2.0 * dsp::kPi * k / n;
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < m.a.size(); ++j) acc += m.a[j] * std::polar(1.0, -w * j);
    p[k] = m.gain * m.gain / std::norm(acc);
  }
  return p;
}

struct TiltFilter {
  ArModel source;
  ArModel target;
  int order = 0;
};

struct TiltConfig {
  int order = 20;
  double max_pole_radius = 0.93;
};

/// Clamps pole radii so the ratio filter and its inverse both have short,
/// well-conditioned impulse responses.
inline ArModel stabilize(ArModel m, double max_radius) {
  limit_pole_radius(m.a, max_radius);
  return m;
}

inline TiltFilter build_tilt_filter(const AveragedSpectrum& source, const AveragedSpectrum& target,
                                    const TiltConfig& cfg = {}) {
  require(source.frame_length == target.frame_length && source.bins.size() == target.bins.size(),
          Errc::kGridMismatch, "spectra are on different grids");
  TiltFilter f;
  f.order = cfg.order;
  f.source = stabilize(fit_ar_to_spectrum(source, cfg.order), cfg.max_pole_radius);
  f.target = stabilize(fit_ar_to_spectrum(target, cfg.order), cfg.max_pole_radius);
  return f;
}

inline TiltFilter build_tilt_filter(const ArModel& source, const ArModel& target) {
  require(source.order() == target.order(), Errc::kDimensionMismatch, "AR orders differ");
  return {source, target, source.order()};
}

/// Complex frequency response H = (g_t A_s) / (g_s A_t) on the n-point DFT grid.
inline std::vector<std::complex<double>> tilt_response(const TiltFilter& f, std::size_t n) {
  std::vector<std::complex<double>> H(n);
  const double g = f.source.gain > 0 ? f.target.gain / f.source.gain : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * dsp::kPi * k / n;
    std::complex<double> as = 0.0, at = 0.0;
    for (std::size_t j = 0; j < f.source.a.size(); ++j) as += f.source.a[j] * std::polar(1.0, -w * j);
    for (std::size_t j = 0; j < f.target.a.size(); ++j) at += f.target.a[j] * std::polar(1.0, -w * j);
    H[k] = g * as / at;
  }
  return H;
}

/// Impulse response of the ratio filter, n samples (direct recursion).
inline std::vector<double> tilt_impulse_response(const TiltFilter& f, std::size_t n) {
  std::vector<double> delta(n, 0.0);
  if (n) delta[0] = 1.0;
  auto y = dsp::allpole(dsp::fir(delta, f.source.a), f.target.a);
  const double g = f.source.gain > 0 ? f.target.gain / f.source.gain : 1.0;
  for (auto& v : y) v *= g;
  return y;
}

/// Filters a normalized-domain frame through the ratio (circularly, since
/// frames are one pitch-normalized cycle pair) and restores unit energy.
inline std::vector<double> apply_tilt(std::span<const double> frame, const TiltFilter& f) {
  const std::size_t n = frame.size();
  std::vector<fft::cplx> x(frame.begin(), frame.end());
  auto X = fft::forward(x);
  const auto H = tilt_response(f, n);
  for (std::size_t k = 0; k < n; ++k) X[k] *= H[k];
  const auto y = fft::inverse(X);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
  const double e = dsp::energy(out);
  if (e > 0) {
    const double s = std::sqrt(dsp::energy(frame) / e);
    for (auto& v : out) v *= s;
  }
  return out;
}

}  // namespace vqt
