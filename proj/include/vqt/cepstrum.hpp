#pragma once

// Complex cepstrum and mixed-phase (maximum/minimum-phase) decomposition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/fft.hpp"

namespace vqt {

struct ComplexCepstrum {
  std::vector<double> coeffs;  // length fft_size, circular quefrency index
  int fft_size = 0;
  int delay = 0;  // linear-phase term removed, in samples
  int sign = 1;   // -1 when the frame was negated to make its DC gain positive

  /// Coefficient at signed quefrency q in (-fft_size/2, fft_size/2].
  double at(long q) const {
    const long n = fft_size;
    return coeffs[static_cast<std::size_t>(((q % n) + n) % n)];
  }
};

struct CepstrumConfig {
  int min_fft_size = 4096;
  int max_fft_size = 65536;
  double max_phase_step = dsp::kPi / 2;  // larger bin-to-bin jumps force a finer grid
  double max_reconstruction_db = -30.0;  // decompositions that do not rebuild the frame are unwrap failures
};

namespace detail {

inline bool unwrap_phase(const std::vector<fft::cplx>& X, std::vector<double>& phase,
                         double max_step) {
  const std::size_t n = X.size();
  phase.assign(n, 0.0);
  phase[0] = std::arg(X[0]);
  double worst = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double d = std::arg(X[k]) - std::arg(X[k - 1]);
    d -= 2.0 * dsp::kPi * std::round(d / (2.0 * dsp::kPi));
    worst = std::max(worst, std::abs(d));
    phase[k] = phase[k - 1] + d;
  }
  return worst <= max_step;
}

}  // namespace detail

/// Complex cepstrum of frame (frame[0] is time origin). Zero-padding starts
/// at cfg.min_fft_size and doubles while the phase is too coarsely sampled
/// to unwrap reliably.
inline ComplexCepstrum complex_cepstrum(std::span<const double> frame,
                                        const CepstrumConfig& cfg = {}) {
  require(dsp::energy(frame) > 0.0, Errc::kZeroFrame, "frame is all zeros");
  std::size_t n = fft::next_pow2(std::max<std::size_t>(
      {static_cast<std::size_t>(cfg.min_fft_size), 2 * frame.size(), 64}));
  while (true) {
    std::vector<fft::cplx> buf(n, 0.0);
    for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
    auto X = fft::forward(buf);
    int sign = 1;
    if (X[0].real() < 0) {
      sign = -1;
      for (auto& v : X) v = -v;
    }
    std::vector<double> phase;
    if (!detail::unwrap_phase(X, phase, cfg.max_phase_step)) {
      if (n * 2 > static_cast<std::size_t>(cfg.max_fft_size))
        throw Error(Errc::kPhaseUnwrapFailure, "phase unwrapping did not converge");
      n *= 2;
      continue;
    }
    const std::size_t half = n / 2;
    const int delay = -static_cast<int>(std::lround(phase[half] / dsp::kPi));
    double peak = 0.0;
    for (const auto& v : X) peak = std::max(peak, std::abs(v));
    std::vector<fft::cplx> logX(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double ph = phase[k] + dsp::kPi * delay * static_cast<double>(k) / half;
      logX[k] = {std::log(std::max(std::abs(X[k]), peak * 1e-15)), ph};
    }
    // Enforce Hermitian symmetry so the cepstrum is real.
    for (std::size_t k = 1; k < half; ++k) {
      const auto avg = 0.5 * (logX[k] + std::conj(logX[n - k]));
      logX[k] = avg;
      logX[n - k] = std::conj(avg);
    }
    const auto c = fft::inverse(logX);
    ComplexCepstrum out;
    out.coeffs.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.coeffs[i] = c[i].real();
    out.fft_size = static_cast<int>(n);
    out.delay = delay;
    out.sign = sign;
    return out;
  }
}

/// Time sequence (circular, fft_size long) whose complex cepstrum is c.
inline std::vector<double> cepstrum_to_sequence(std::span<const double> c) {
  std::vector<fft::cplx> buf(c.begin(), c.end());
  auto C = fft::forward(buf);
  for (auto& v : C) v = std::exp(v);
  const auto x = fft::inverse(C);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

/// Inverts complex_cepstrum, restoring the delay and sign; returns
/// frame_length samples.
inline std::vector<double> inverse_cepstrum(const ComplexCepstrum& cc, std::size_t frame_length) {
  const auto x = cepstrum_to_sequence(cc.coeffs);
  const long n = cc.fft_size;
  std::vector<double> out(frame_length);
  for (std::size_t i = 0; i < frame_length; ++i) {
    const long src = ((static_cast<long>(i) - cc.delay) % n + n) % n;
    out[i] = cc.sign * x[static_cast<std::size_t>(src)];
  }
  return out;
}

struct CepstralDecomposition {
  // Circular sequences of length fft_size; index 0 is the time origin and
  // negative times wrap to the end.
  std::vector<double> max_phase;
  std::vector<double> min_phase;
  ComplexCepstrum cepstrum;
  long gci = -1;           // sample index in the source signal
  double t0 = 0.0;         // local period, seconds
  int sample_rate = 0;
  bool windowed = false;   // frame was Blackman-windowed around the GCI
  int half_span = 0;       // frame covers gci - half_span .. gci + half_span

  int fft_size() const { return cepstrum.fft_size; }
  double max_at(long n) const { return circular(max_phase, n); }
  double min_at(long n) const { return circular(min_phase, n); }

  static double circular(const std::vector<double>& v, long n) {
    const long m = static_cast<long>(v.size());
    return v[static_cast<std::size_t>(((n % m) + m) % m)];
  }
};

inline std::vector<double> reconstruct(const CepstralDecomposition& dec, std::size_t frame_length);

/// Splits frame by quefrency sign: negative quefrencies form the maximum
/// phase part, quefrency zero and above the minimum phase part.
inline CepstralDecomposition mixed_phase_decompose(std::span<const double> frame,
                                                   const CepstrumConfig& cfg = {}) {
  CepstralDecomposition dec;
  dec.cepstrum = complex_cepstrum(frame, cfg);
  const std::size_t n = dec.cepstrum.coeffs.size();
  std::vector<double> cmax(n, 0.0), cmin(n, 0.0);
  for (std::size_t i = 0; i <= n / 2; ++i) cmin[i] = dec.cepstrum.coeffs[i];
  for (std::size_t i = n / 2 + 1; i < n; ++i) cmax[i] = dec.cepstrum.coeffs[i];
  dec.max_phase = cepstrum_to_sequence(cmax);
  dec.min_phase = cepstrum_to_sequence(cmin);
  const auto y = reconstruct(dec, frame.size());
  const bool finite = std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
  if (!finite || dsp::relative_error_db(y, frame) > cfg.max_reconstruction_db)
    throw Error(Errc::kPhaseUnwrapFailure, "decomposition does not reconstruct the frame");
  return dec;
}

/// max_phase * min_phase with the delay and sign restored, frame_length long.
inline std::vector<double> reconstruct(const CepstralDecomposition& dec,
                                       std::size_t frame_length) {
  const std::size_t n = dec.max_phase.size();
  std::vector<fft::cplx> a(dec.max_phase.begin(), dec.max_phase.end());
  std::vector<fft::cplx> b(dec.min_phase.begin(), dec.min_phase.end());
  auto A = fft::forward(a);
  const auto B = fft::forward(b);
  for (std::size_t k = 0; k < n; ++k) A[k] *= B[k];
  const auto y = fft::inverse(A);
  std::vector<double> out(frame_length);
  const long m = static_cast<long>(n);
  for (std::size_t i = 0; i < frame_length; ++i) {
    const long src = ((static_cast<long>(i) - dec.cepstrum.delay) % m + m) % m;
    out[i] = dec.cepstrum.sign * y[static_cast<std::size_t>(src)].real();
  }
  return out;
}

}  // namespace vqt
