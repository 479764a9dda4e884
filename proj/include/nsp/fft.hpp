#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "nsp/field.hpp"

namespace nsp::fft {

namespace detail {

/// Cached r2c/c2r plan pair for one grid shape. FFTW planning is not
/// thread-safe, so plan creation goes through a global mutex; execution with
/// the new-array interface is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(const Grid& grid) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(grid.dim(), grid.n());
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<int> dims(grid.dim(), grid.n());
    std::vector<double> real(grid.size());
    std::vector<Complex> spec(grid.spectral_size());
    auto* out = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft_r2c(grid.dim(), dims.data(), real.data(), out, flags);
    p.backward = fftw_plan_dft_c2r(grid.dim(), dims.data(), out, real.data(), flags);
    plans_.emplace(key, p);
    return p;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

}  // namespace detail

/// Forward transform; rejects non-finite samples.
inline Spectrum forward(const Field& f) {
  if (!f.all_finite()) throw DomainError("non-finite field values");
  const Grid& g = f.grid();
  Spectrum s(g);
  auto plans = detail::PlanCache::instance().get(g);
  // r2c does not modify its input with FFTW_ESTIMATE, but the API is non-const
  std::vector<double> in(f.values().begin(), f.values().end());
  fftw_execute_dft_r2c(plans.forward, in.data(),
                       reinterpret_cast<fftw_complex*>(s.coefficients().data()));
  s *= Complex(1.0 / static_cast<double>(g.size()), 0.0);
  return s;
}

inline Field inverse(const Spectrum& s) {
  const Grid& g = s.grid();
  auto plans = detail::PlanCache::instance().get(g);
  std::vector<Complex> work(s.coefficients().begin(), s.coefficients().end());
  Field out(g);
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(work.data()),
                       out.values().data());
  return out;
}

}  // namespace nsp::fft
