#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "vqt/audio.hpp"

namespace testutil {

inline constexpr double kPi = 3.14159265358979323846;

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

// y[n] = x[n] - sum_{j>=1} a[j] y[n-j], written out independently of the library.
inline std::vector<double> ar_filter(const std::vector<double>& x, const std::vector<double>& a) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t j = 1; j < a.size() && j <= n; ++j) acc -= a[j] * y[n - j];
    y[n] = acc;
  }
  return y;
}

// Monic polynomial from conjugate pole pairs (radius, angle).
inline std::vector<double> poly_from_pole_pairs(const std::vector<std::pair<double, double>>& poles) {
  std::vector<double> a{1.0};
  for (auto [r, w] : poles) {
    const std::vector<double> q{1.0, -2.0 * r * std::cos(w), r * r};
    std::vector<double> next(a.size() + 2, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < 3; ++j) next[i + j] += a[i] * q[j];
    a = next;
  }
  return a;
}

inline double rel_error_db(const std::vector<double>& ref, const std::vector<double>& est) {
  double e = 0, s = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    e += (ref[i] - est[i]) * (ref[i] - est[i]);
    s += ref[i] * ref[i];
  }
  return 10.0 * std::log10(e / s + 1e-300);
}

inline double corr(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i], aa += a[i] * a[i], bb += b[i] * b[i];
  return ab / std::sqrt(aa * bb);
}

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> X(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const long double ang = -2.0L * 3.14159265358979323846264338327950288L * ((k * t) % n) / n;
      acc += std::complex<long double>(x[t] * std::cos(ang), x[t] * std::sin(ang));
    }
    X[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return X;
}

inline vqt::AudioBuffer buffer(std::vector<double> x, int fs = 16000) { return {std::move(x), fs}; }

}  // namespace testutil
