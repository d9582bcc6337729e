#pragma once

// Thin FFTW wrapper. Plans are cached per (size, kind) behind a mutex since
// the FFTW planner is not thread safe; execution through the new-array
// interface is.

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace vqt::fft {

using cplx = std::complex<double>;

namespace detail {

enum class Kind { kForward, kBackward, kR2C, kC2R };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(Kind kind, int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(static_cast<int>(kind), n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    const int half = n / 2 + 1;
    switch (kind) {
      case Kind::kForward:
      case Kind::kBackward: {
        auto* in = fftw_alloc_complex(n);
        auto* out = fftw_alloc_complex(n);
        plan = fftw_plan_dft_1d(n, in, out,
                                kind == Kind::kForward ? FFTW_FORWARD : FFTW_BACKWARD,
                                flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
      case Kind::kR2C: {
        auto* in = fftw_alloc_real(n);
        auto* out = fftw_alloc_complex(half);
        plan = fftw_plan_dft_r2c_1d(n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
      case Kind::kC2R: {
        auto* in = fftw_alloc_complex(half);
        auto* out = fftw_alloc_real(n);
        plan = fftw_plan_dft_c2r_1d(n, in, out, flags);
        fftw_free(in);
        fftw_free(out);
        break;
      }
    }
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Forward complex DFT, unnormalized.
inline std::vector<cplx> forward(std::span<const cplx> x) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (n == 0) return out;
  auto plan = detail::PlanCache::instance().get(detail::Kind::kForward, n);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  return out;
}

/// Inverse complex DFT, normalized by 1/n.
inline std::vector<cplx> inverse(std::span<const cplx> x) {
  const int n = static_cast<int>(x.size());
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (n == 0) return out;
  auto plan = detail::PlanCache::instance().get(detail::Kind::kBackward, n);
  fftw_execute_dft(plan, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
  const double scale = 1.0 / n;
  for (auto& v : out) v *= scale;
  return out;
}

/// Real-input DFT of x zero-padded (or truncated) to n points; n/2+1 bins.
inline std::vector<cplx> rfft(std::span<const double> x, std::size_t n) {
  std::vector<double> in(n, 0.0);
  std::copy_n(x.begin(), std::min(n, x.size()), in.begin());
  std::vector<cplx> out(n / 2 + 1);
  if (n == 0) return out;
  auto plan = detail::PlanCache::instance().get(detail::Kind::kR2C, static_cast<int>(n));
  fftw_execute_dft_r2c(plan, in.data(), detail::as_fftw(out.data()));
  return out;
}

inline std::vector<cplx> rfft(std::span<const double> x) { return rfft(x, x.size()); }

/// Inverse of rfft for an n-point real signal, normalized by 1/n.
inline std::vector<double> irfft(std::span<const cplx> bins, std::size_t n) {
  std::vector<cplx> in(n / 2 + 1, cplx{});
  std::copy_n(bins.begin(), std::min(in.size(), bins.size()), in.begin());
  std::vector<double> out(n);
  if (n == 0) return out;
  auto plan = detail::PlanCache::instance().get(detail::Kind::kC2R, static_cast<int>(n));
  fftw_execute_dft_c2r(plan, detail::as_fftw(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace vqt::fft
