#pragma once

// Autocorrelation-method linear prediction: Levinson recursion, per-frame
// envelopes, inverse (residual) and forward (synthesis) filtering.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "vqt/audio.hpp"
#include "vqt/dsp.hpp"
#include "vqt/error.hpp"

namespace vqt {

struct LevinsonResult {
  std::vector<double> a;           // monic predictor polynomial, a[0] = 1
  std::vector<double> reflection;  // k_1..k_p
  double error = 0.0;              // final prediction error power
};

/// Levinson-Durbin on autocorrelation lags r[0..order].
inline LevinsonResult levinson(std::span<const double> r, int order) {
  require(order >= 0 && static_cast<std::size_t>(order) < r.size(), Errc::kOrderTooHigh,
          "order exceeds available autocorrelation lags");
  LevinsonResult res;
  res.a.assign(order + 1, 0.0);
  res.a[0] = 1.0;
  res.reflection.assign(order, 0.0);
  double err = r[0];
  std::vector<double> prev(order + 1, 0.0);
  for (int i = 1; i <= order; ++i) {
    if (err <= 0.0) break;
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += res.a[j] * r[i - j];
    const double k = -acc / err;
    res.reflection[i - 1] = k;
    prev = res.a;
    for (int j = 1; j < i; ++j) res.a[j] = prev[j] + k * prev[i - j];
    res.a[i] = k;
    err *= (1.0 - k * k);
  }
  res.error = std::max(err, 0.0);
  return res;
}

/// Biased autocorrelation lags 0..max_lag.
inline std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t n = k; n < x.size(); ++n) acc += x[n] * x[n - k];
    r[k] = acc;
  }
  return r;
}

/// Step-down test: true when every reflection coefficient has |k| < 1.
inline bool is_minimum_phase(std::span<const double> a) {
  std::vector<double> cur(a.begin(), a.end());
  if (cur.empty() || cur[0] == 0.0) return false;
  for (auto& v : cur) v /= a[0];
  for (std::size_t p = cur.size() - 1; p >= 1; --p) {
    const double k = cur[p];
    if (!(std::abs(k) < 1.0)) return false;
    std::vector<double> next(p);
    const double den = 1.0 - k * k;
    for (std::size_t j = 0; j < p; ++j) next[j] = (cur[j] - k * cur[p - j]) / den;
    cur = std::move(next);
  }
  return true;
}

/// Roots of the monic polynomial a[0] + a[1] z^-1 + ... (in the z plane).
inline std::vector<std::complex<double>> polynomial_roots(std::span<const double> a) {
  const int p = static_cast<int>(a.size()) - 1;
  std::vector<std::complex<double>> roots;
  if (p < 1) return roots;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -a[j + 1] / a[0];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  for (int i = 0; i < p; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

inline std::vector<double> polynomial_from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] += c[j];
      next[j + 1] -= r * c[j];
    }
    c = std::move(next);
  }
  std::vector<double> a(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) a[j] = c[j].real();
  return a;
}

/// Maps every root with |z| > max_radius onto radius min(1/|z|, max_radius)
/// (reflection inside the unit circle, then clamping). Returns true when
/// the polynomial changed.
inline bool limit_pole_radius(std::vector<double>& a, double max_radius) {
  auto roots = polynomial_roots(a);
  bool changed = false;
  for (auto& r : roots) {
    double mag = std::abs(r);
    if (mag > max_radius) {
      double target = mag >= 1.0 ? 1.0 / mag : mag;
      target = std::min(target, max_radius);
      r = r / mag * target;
      changed = true;
    }
  }
  if (changed) {
    const double lead = a[0];
    a = polynomial_from_roots(roots);
    for (auto& v : a) v *= lead;
  }
  return changed;
}

/// Reflects unstable poles inside the unit circle. Returns true if repaired.
inline bool repair_stability(std::vector<double>& a) {
  if (is_minimum_phase(a)) return false;
  limit_pole_radius(a, 1.0 - 1e-9);
  return true;
}

struct LpcConfig {
  int order = -1;             // negative selects sample_rate/1000 + 2
  double window_s = 0.025;    // Hann analysis window
  double hop_s = 0.005;
  double silence_energy = 1e-10;

  int effective_order(int sample_rate) const {
    return order >= 0 ? order : sample_rate / 1000 + 2;
  }
};

struct LpcEnvelope {
  int order = 0;
  int sample_rate = 0;
  int hop = 0;     // samples; frame k is centred on sample k*hop
  int window = 0;  // samples
  std::vector<std::vector<double>> coeffs;  // monic, order+1 each
  std::vector<double> gains;                // RMS prediction error per frame
  int repaired = 0;                         // frames whose poles were reflected

  std::size_t frame_count() const { return coeffs.size(); }

  std::size_t frame_for_sample(std::size_t n) const {
    const std::size_t k = (n + hop / 2) / hop;
    return std::min(k, coeffs.size() - 1);
  }
};

/// Per-frame envelope for one windowed frame.
inline std::pair<std::vector<double>, double> lpc_frame(std::span<const double> windowed,
                                                       int order, double silence_energy,
                                                       double window_power) {
  require(order >= 1 && static_cast<std::size_t>(order) < windowed.size(),
          Errc::kOrderTooHigh, "LPC order must be in [1, window length)");
  auto r = autocorrelation(windowed, order);
  std::vector<double> ident(order + 1, 0.0);
  ident[0] = 1.0;
  if (r[0] < silence_energy) return {ident, 0.0};
  r[0] *= 1.0 + 1e-9;
  auto lev = levinson(r, order);
  return {lev.a, std::sqrt(lev.error / window_power)};
}

inline LpcEnvelope lpc_analyze(const AudioBuffer& buf, const LpcConfig& cfg = {}) {
  const int order = cfg.effective_order(buf.sample_rate);
  const int win = static_cast<int>(std::lround(cfg.window_s * buf.sample_rate));
  const int hop = std::max(1, static_cast<int>(std::lround(cfg.hop_s * buf.sample_rate)));
  require(order >= 2, Errc::kOrderTooHigh, "LPC order must be at least 2");
  require(order < win, Errc::kOrderTooHigh, "LPC order must be below the window length");

  LpcEnvelope env;
  env.order = order;
  env.sample_rate = buf.sample_rate;
  env.hop = hop;
  env.window = win;
  const auto w = dsp::hann(static_cast<std::size_t>(win) + 2);  // drop zero endpoints
  const double wpow = dsp::energy(std::span<const double>(w).subspan(1, win));
  const std::size_t frames = buf.samples.empty() ? 1 : (buf.samples.size() - 1) / hop + 1;
  std::vector<double> seg(win);
  for (std::size_t k = 0; k < frames; ++k) {
    const long start = static_cast<long>(k) * hop - win / 2;
    for (int i = 0; i < win; ++i) {
      const long n = start + i;
      const double s = (n >= 0 && n < static_cast<long>(buf.samples.size())) ? buf.samples[n] : 0.0;
      seg[i] = s * w[i + 1];
    }
    auto [a, g] = lpc_frame(seg, order, cfg.silence_energy, wpow);
    if (repair_stability(a)) ++env.repaired;
    env.coeffs.push_back(std::move(a));
    env.gains.push_back(g);
  }
  return env;
}

/// Prediction residual e[n] = sum_j a_j x[n-j] with the frame active at n.
inline AudioBuffer inverse_filter(const AudioBuffer& buf, const LpcEnvelope& env) {
  require(!env.coeffs.empty(), Errc::kInvalidArgument, "empty envelope");
  AudioBuffer res{std::vector<double>(buf.samples.size(), 0.0), buf.sample_rate};
  const auto& x = buf.samples;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto& a = env.coeffs[env.frame_for_sample(n)];
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size() && j <= n; ++j) acc += a[j] * x[n - j];
    res.samples[n] = acc;
  }
  return res;
}

/// Exact inverse of inverse_filter: x[n] = e[n] - sum_{j>=1} a_j x[n-j].
/// Returns unnormalized samples (may exceed [-1, 1]).
inline std::vector<double> synthesis_filter(std::span<const double> excitation,
                                            const LpcEnvelope& env) {
  require(!env.coeffs.empty(), Errc::kInvalidArgument, "empty envelope");
  std::vector<double> y(excitation.size(), 0.0);
  for (std::size_t n = 0; n < excitation.size(); ++n) {
    const auto& a = env.coeffs[env.frame_for_sample(n)];
    double acc = excitation[n];
    for (std::size_t j = 1; j < a.size() && j <= n; ++j) acc -= a[j] * y[n - j];
    y[n] = acc;
  }
  return y;
}

/// Step-down recursion: reflection coefficients of a monic polynomial.
inline std::vector<double> to_reflection(std::span<const double> a) {
  const int p = static_cast<int>(a.size()) - 1;
  std::vector<double> cur(a.begin(), a.end()), k(p, 0.0);
  for (int m = p; m >= 1; --m) {
    const double km = cur[m];
    k[m - 1] = km;
    const double den = 1.0 - km * km;
    if (std::abs(den) < 1e-12) break;
    std::vector<double> next(m);
    next[0] = 1.0;
    for (int j = 1; j < m; ++j) next[j] = (cur[j] - km * cur[m - j]) / den;
    cur = std::move(next);
  }
  return k;
}

/// Step-up recursion, inverse of to_reflection.
inline std::vector<double> from_reflection(std::span<const double> k) {
  std::vector<double> a{1.0};
  for (std::size_t m = 1; m <= k.size(); ++m) {
    std::vector<double> next(m + 1, 0.0);
    next[0] = 1.0;
    for (std::size_t j = 1; j < m; ++j) next[j] = a[j] + k[m - 1] * a[m - j];
    next[m] = k[m - 1];
    a = std::move(next);
  }
  return a;
}

/// Synthesis with the envelope interpolated between frame centres in the
/// reflection domain, which keeps every intermediate filter stable.
inline std::vector<double> synthesis_filter_smooth(std::span<const double> excitation,
                                                   const LpcEnvelope& env, int update = 16) {
  require(!env.coeffs.empty(), Errc::kInvalidArgument, "empty envelope");
  std::vector<std::vector<double>> refl;
  refl.reserve(env.frame_count());
  for (const auto& a : env.coeffs) refl.push_back(to_reflection(a));
  std::vector<double> y(excitation.size(), 0.0), k(refl[0].size()), a;
  for (std::size_t n = 0; n < excitation.size(); ++n) {
    if (n % update == 0) {
      const double t = static_cast<double>(n + update / 2) / env.hop;
      const std::size_t i = std::min(static_cast<std::size_t>(t), refl.size() - 1);
      const std::size_t j = std::min(i + 1, refl.size() - 1);
      const double w = std::clamp(t - static_cast<double>(i), 0.0, 1.0);
      for (std::size_t m = 0; m < k.size(); ++m) k[m] = (1.0 - w) * refl[i][m] + w * refl[j][m];
      a = from_reflection(k);
    }
    double acc = excitation[n];
    for (std::size_t j = 1; j < a.size() && j <= n; ++j) acc -= a[j] * y[n - j];
    y[n] = acc;
  }
  return y;
}

/// Power response g^2/|A(e^jw)|^2 sampled at bins points over [0, pi].
inline std::vector<double> allpole_power_response(std::span<const double> a, double gain,
                                                  std::size_t bins) {
  std::vector<double> p(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double w = bins > 1 ? dsp::kPi * k / (bins - 1) : 0.0;
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * std::polar(1.0, -w * j);
    p[k] = gain * gain / std::max(std::norm(acc), 1e-300);
  }
  return p;
}

}  // namespace vqt
