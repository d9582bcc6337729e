#pragma once

// Orthonormal basis of aligned, normalized residual frames. The leading
// eigenvector is the eigenresidual.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "vqt/dsp.hpp"
#include "vqt/error.hpp"
#include "vqt/framing.hpp"

namespace vqt {

struct EigenBasis {
  int frame_length = 0;
  int frame_count_used = 0;
  bool centered = false;
  std::vector<double> mean_frame;
  std::vector<std::vector<double>> eigenvectors;
  std::vector<double> eigenvalues;
  double total_variance = 0.0;  // trace of the decomposed matrix

  const std::vector<double>& eigenresidual() const { return eigenvectors.front(); }
  double eigenvalue_share(std::size_t i = 0) const {
    return total_variance > 0 ? eigenvalues[i] / total_variance : 0.0;
  }
};

struct EigenConfig {
  int components = 1;
  int max_shift = 5;      // circular alignment search, samples
  bool center = false;    // decompose mean-removed frames
  int min_frames = 10;
};

/// Circularly shifts each frame by up to max_shift samples to best match
/// the plain mean of all frames (an order-independent reference).
inline std::vector<std::vector<double>> align_frames(const std::vector<std::vector<double>>& frames,
                                                     int max_shift) {
  if (frames.empty() || max_shift <= 0) return frames;
  const std::size_t n = frames.front().size();
  std::vector<double> ref(n, 0.0);
  for (const auto& f : frames)
    for (std::size_t i = 0; i < n; ++i) ref[i] += f[i];
  std::vector<std::vector<double>> out;
  out.reserve(frames.size());
  const long ln = static_cast<long>(n);
  for (const auto& f : frames) {
    int best = 0;
    double best_c = -1e300;
    for (int s = -max_shift; s <= max_shift; ++s) {
      double c = 0.0;
      for (long i = 0; i < ln; ++i) c += ref[i] * f[((i - s) % ln + ln) % ln];
      // Ties resolve to the smallest |s|, then the negative shift.
      if (c > best_c + 1e-12 * std::abs(best_c) ||
          (std::abs(c - best_c) <= 1e-12 * std::abs(best_c) && std::abs(s) < std::abs(best))) {
        best_c = c;
        best = s;
      }
    }
    std::vector<double> g(n);
    for (long i = 0; i < ln; ++i) g[i] = f[((i - best) % ln + ln) % ln];
    out.push_back(std::move(g));
  }
  return out;
}

/// Flips v so its largest-magnitude sample is negative.
inline void canonical_sign(std::vector<double>& v) {
  const auto it = std::max_element(v.begin(), v.end(),
                                   [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (it != v.end() && *it > 0)
    for (auto& x : v) x = -x;
}

inline EigenBasis compute_eigen_basis(const std::vector<std::vector<double>>& frames,
                                      const EigenConfig& cfg = {}) {
  require(cfg.components >= 1, Errc::kInvalidArgument, "need at least one component");
  require(static_cast<int>(frames.size()) >= std::max(cfg.components, cfg.min_frames),
          Errc::kTooFewFrames, "not enough frames for the requested basis");
  const std::size_t n = frames.front().size();
  for (const auto& f : frames)
    require(f.size() == n, Errc::kDimensionMismatch, "frames differ in length");
  require(static_cast<std::size_t>(cfg.components) <= n, Errc::kInvalidArgument,
          "more components than dimensions");

  const auto aligned = align_frames(frames, cfg.max_shift);
  EigenBasis b;
  b.frame_length = static_cast<int>(n);
  b.frame_count_used = static_cast<int>(aligned.size());
  b.centered = cfg.center;
  b.mean_frame.assign(n, 0.0);
  for (const auto& f : aligned)
    for (std::size_t i = 0; i < n; ++i) b.mean_frame[i] += f[i];
  for (auto& v : b.mean_frame) v /= static_cast<double>(aligned.size());

  Eigen::MatrixXd X(aligned.size(), n);
  for (std::size_t r = 0; r < aligned.size(); ++r)
    for (std::size_t i = 0; i < n; ++i)
      X(r, i) = aligned[r][i] - (cfg.center ? b.mean_frame[i] : 0.0);
  const Eigen::MatrixXd C = (X.transpose() * X) / static_cast<double>(aligned.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  b.total_variance = C.trace();
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  for (int c = 0; c < cfg.components; ++c) {
    const int col = static_cast<int>(n) - 1 - c;  // ascending order from the solver
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = vecs(i, col);
    canonical_sign(v);
    b.eigenvectors.push_back(std::move(v));
    b.eigenvalues.push_back(std::max(0.0, vals(col)));
  }
  return b;
}

inline EigenBasis compute_eigen_basis(const NormalizedFrameSet& set, const EigenConfig& cfg = {}) {
  require(static_cast<int>(set.size()) >= std::max(cfg.components, cfg.min_frames),
          Errc::kTooFewFrames, "not enough frames for the requested basis");
  return compute_eigen_basis(set.frames, cfg);
}

/// mean + sum_{i<k} <frame - mean, v_i> v_i
inline std::vector<double> project_and_reconstruct(std::span<const double> frame,
                                                   const EigenBasis& b, int k) {
  require(static_cast<int>(frame.size()) == b.frame_length, Errc::kDimensionMismatch,
          "frame length differs from the basis");
  require(k >= 0 && k <= static_cast<int>(b.eigenvectors.size()), Errc::kInvalidArgument,
          "k exceeds the available eigenvectors");
  auto out = b.mean_frame;
  std::vector<double> d(frame.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = frame[i] - out[i];
  for (int c = 0; c < k; ++c) {
    const auto& v = b.eigenvectors[c];
    double coef = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) coef += d[i] * v[i];
    for (std::size_t i = 0; i < d.size(); ++i) out[i] += coef * v[i];
  }
  return out;
}

/// Mean squared projection of the (aligned, optionally centred) frames onto
/// unit direction v.
inline double explained_variance(const std::vector<std::vector<double>>& frames,
                                 std::span<const double> v, std::span<const double> origin) {
  double acc = 0.0;
  for (const auto& f : frames) {
    double c = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) c += (f[i] - origin[i]) * v[i];
    acc += c * c;
  }
  return frames.empty() ? 0.0 : acc / frames.size();
}

}  // namespace vqt
