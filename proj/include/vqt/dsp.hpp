#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "vqt/error.hpp"

namespace vqt::dsp {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Windows

/// Symmetric Hann window with zero endpoints.
inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / (n - 1));
  return w;
}

/// Symmetric Blackman window.
inline std::vector<double> blackman(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * kPi * i / (n - 1);
    w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
  }
  return w;
}

/// Continuous Hann taper on [-1, 1]; 1 at 0, 0 at the ends.
inline double hann_taper(double v) {
  if (v <= -1.0 || v >= 1.0) return 0.0;
  return 0.5 + 0.5 * std::cos(kPi * v);
}

/// Continuous Blackman taper on [-1, 1].
inline double blackman_taper(double v) {
  if (v <= -1.0 || v >= 1.0) return 0.0;
  return 0.42 + 0.5 * std::cos(kPi * v) + 0.08 * std::cos(2.0 * kPi * v);
}

// ---------------------------------------------------------------------------
// Small numeric helpers

inline double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

inline double rms(std::span<const double> x) {
  return x.empty() ? 0.0 : std::sqrt(energy(x) / static_cast<double>(x.size()));
}

inline double mean(std::span<const double> x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / x.size();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

/// Pearson correlation of two equal-length sequences.
inline double correlation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  const double ma = mean(a.first(n)), mb = mean(b.first(n));
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0 || sbb <= 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

/// Relative error ||a-b||^2/||b||^2 in dB.
inline double relative_error_db(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (num == 0.0) return -400.0;
  return 10.0 * std::log10(num / den);
}

/// Vertex offset in (-0.5, 0.5) of the parabola through three samples.
inline double parabolic_offset(double ym1, double y0, double yp1) {
  const double den = ym1 - 2.0 * y0 + yp1;
  if (den == 0.0) return 0.0;
  return std::clamp(0.5 * (ym1 - yp1) / den, -0.5, 0.5);
}

// ---------------------------------------------------------------------------
// Band-limited interpolation

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

/// Value of x at fractional index pos by windowed-sinc interpolation.
/// cutoff (<= 1, relative to the input Nyquist) low-passes the kernel for
/// decimation; half_width counts taps at the input rate for cutoff 1 and is
/// stretched by 1/cutoff. Samples outside x are treated as zero.
inline double bandlimited_sample(std::span<const double> x, double pos,
                                 double cutoff = 1.0, int half_width = 16) {
  cutoff = std::clamp(cutoff, 1e-3, 1.0);
  const double reach = half_width / cutoff;
  const long lo = static_cast<long>(std::ceil(pos - reach));
  const long hi = static_cast<long>(std::floor(pos + reach));
  double acc = 0.0;
  for (long n = std::max(lo, 0L); n <= hi && n < static_cast<long>(x.size()); ++n) {
    const double d = pos - static_cast<double>(n);
    acc += x[n] * cutoff * sinc(cutoff * d) * hann_taper(d / reach);
  }
  return acc;
}

/// Resample x onto out_len points spanning the same support, used for
/// periodic frames (point i maps to input position i * x.size() / out_len).
inline std::vector<double> resample_frame(std::span<const double> x, std::size_t out_len,
                                          int half_width = 16) {
  std::vector<double> y(out_len, 0.0);
  if (x.empty() || out_len == 0) return y;
  const double step = static_cast<double>(x.size()) / out_len;
  const double cutoff = std::min(1.0, 1.0 / step);
  for (std::size_t i = 0; i < out_len; ++i)
    y[i] = bandlimited_sample(x, i * step, cutoff, half_width);
  return y;
}

// ---------------------------------------------------------------------------
// Filters

inline double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

/// Linear-phase Kaiser-windowed low-pass FIR. Odd length, unit DC gain.
/// transition_hz is the full transition width; attenuation_db the stopband.
inline std::vector<double> kaiser_lowpass(double cutoff_hz, double sample_rate,
                                          double transition_hz = 200.0,
                                          double attenuation_db = 60.0) {
  require(cutoff_hz > 0 && cutoff_hz < sample_rate / 2, Errc::kInvalidArgument,
          "low-pass cutoff outside (0, nyquist)");
  const double beta = attenuation_db > 50
                          ? 0.1102 * (attenuation_db - 8.7)
                          : 0.5842 * std::pow(attenuation_db - 21, 0.4) +
                                0.07886 * (attenuation_db - 21);
  const double dw = 2.0 * kPi * transition_hz / sample_rate;
  std::size_t taps = static_cast<std::size_t>(std::ceil((attenuation_db - 7.95) / (2.285 * dw))) + 1;
  if (taps % 2 == 0) ++taps;
  const double fc = cutoff_hz / sample_rate;  // cycles/sample
  const double mid = (taps - 1) / 2.0;
  const double i0b = bessel_i0(beta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t n = 0; n < taps; ++n) {
    const double m = n - mid;
    const double r = m / mid;
    const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[n] = 2.0 * fc * sinc(2.0 * fc * m) * w;
    sum += h[n];
  }
  for (auto& v : h) v /= sum;
  return h;
}

/// Complementary high-pass: delta minus the low-pass (same length/delay).
inline std::vector<double> complementary_highpass(std::span<const double> lowpass) {
  std::vector<double> h(lowpass.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = -lowpass[i];
  h[h.size() / 2] += 1.0;
  return h;
}

/// Zero-delay convolution with an odd-length linear-phase FIR; output has
/// the input length.
inline std::vector<double> filter_centered(std::span<const double> x, std::span<const double> h) {
  const long n = static_cast<long>(x.size());
  const long m = static_cast<long>(h.size());
  const long half = m / 2;
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    const long kmin = std::max(0L, i + half - (n - 1));
    const long kmax = std::min(m - 1, i + half);
    for (long k = kmin; k <= kmax; ++k) acc += h[k] * x[i + half - k];
    y[i] = acc;
  }
  return y;
}

/// Direct-form all-pole filter 1/A(z), a[0] == 1.
inline std::vector<double> allpole(std::span<const double> x, std::span<const double> a) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t j = 1; j < a.size() && j <= n; ++j) acc -= a[j] * y[n - j];
    y[n] = acc / a[0];
  }
  return y;
}

/// Direct-form FIR A(z).
inline std::vector<double> fir(std::span<const double> x, std::span<const double> b) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b.size() && j <= n; ++j) acc += b[j] * x[n - j];
    y[n] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Counter-based Gaussian noise: sample n of stream `seed` is a pure function
// of (seed, n), so any subrange can be rendered independently.

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ splitmix64(counter * 2 + 1));
  return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double counter_gaussian(std::uint64_t seed, std::uint64_t counter) {
  const double u1 = counter_uniform(seed, 2 * counter);
  const double u2 = counter_uniform(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace vqt::dsp
