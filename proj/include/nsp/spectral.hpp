#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "nsp/fft.hpp"

namespace nsp {

/// Transform of a real field into its half-complex spectrum.
inline Spectrum transform(const Field& f) { return fft::forward(f); }
inline Field inverse_transform(const Spectrum& s) { return fft::inverse(s); }

/// Relative size below which a zero mode counts as vanished.
inline constexpr double kMeanZeroTolerance = 1e-12;

/// How a multiplier that is singular at k = 0 treats the zero mode.
enum class ZeroMode {
  regular,   ///< symbol is finite at k = 0 and is applied there
  require,   ///< zero mode must already vanish, else MeanZeroError
  project,   ///< zero mode is dropped before applying the symbol
};

namespace detail {

inline double rms_scale(const Spectrum& s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += s.grid().multiplicity(i) * std::norm(s[i]);
  return std::sqrt(sum);
}

}  // namespace detail

inline bool has_zero_mean(const Spectrum& s) {
  return std::abs(s.zero_mode()) <= kMeanZeroTolerance * std::max(detail::rms_scale(s), 1e-300);
}

/// Multiply every mode by symbol(k); `symbol` receives the wavevector of the
/// signed representative mode (Nyquist reported as -n/2).
template <class Symbol>
Spectrum apply_multiplier(Spectrum s, Symbol&& symbol, ZeroMode zero = ZeroMode::regular) {
  const Grid& g = s.grid();
  if (zero == ZeroMode::require && !has_zero_mean(s)) throw MeanZeroError();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i == 0 && zero != ZeroMode::regular) {
      s[0] = 0.0;
      continue;
    }
    s[i] *= Complex(symbol(g.wavevector(i)));
  }
  return s;
}

template <class Symbol>
Field apply_multiplier(const Field& f, Symbol&& symbol, ZeroMode zero = ZeroMode::regular) {
  return inverse_transform(apply_multiplier(transform(f), std::forward<Symbol>(symbol), zero));
}

/// Common symbols. Odd symbols vanish on Nyquist modes so that real fields stay real.
namespace symbols {

inline auto partial(const Grid& g, int axis) {
  const double nyq = g.wavenumber_unit() * (-g.n() / 2);
  return [axis, nyq](const Wavevector& k) {
    return k[axis] == nyq ? Complex(0.0) : Complex(0.0, k[axis]);
  };
}

inline auto laplacian() {
  return [](const Wavevector& k) { return -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); };
}

inline auto inverse_laplacian() {
  return [](const Wavevector& k) { return -1.0 / (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]); };
}

/// |k|^order; at k = 0 it is 1 for order 0 and 0 for order > 0.
inline auto fractional(double order) {
  return [order](const Wavevector& k) {
    const double m = magnitude(k);
    if (m == 0.0) return order == 0.0 ? 1.0 : 0.0;
    return std::pow(m, order);
  };
}

/// 1 / (a |k|^2 + 1)
inline auto helmholtz_inverse(double a) {
  return [a](const Wavevector& k) { return 1.0 / (a * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) + 1.0); };
}

/// Inverse of (I - a div grad) for the discrete gradient, whose Nyquist
/// components vanish; consistent with divergence(gradient(.)).
inline auto helmholtz_inverse(const Grid& g, double a) {
  const double nyq = g.wavenumber_unit() * (-g.n() / 2);
  return [a, nyq](const Wavevector& k) {
    double k2 = 0.0;
    for (double c : k)
      if (c != nyq) k2 += c * c;
    return 1.0 / (a * k2 + 1.0);
  };
}

}  // namespace symbols

inline Spectrum partial(const Spectrum& s, int axis) {
  return apply_multiplier(s, symbols::partial(s.grid(), axis));
}

inline Field partial(const Field& f, int axis) { return inverse_transform(partial(transform(f), axis)); }

inline VectorField gradient(const Spectrum& s) {
  VectorField out;
  for (int a = 0; a < s.grid().dim(); ++a) out.push_back(inverse_transform(partial(s, a)));
  return out;
}

inline VectorField gradient(const Field& f) { return gradient(transform(f)); }

inline Spectrum divergence_spectrum(const VectorField& v) {
  Spectrum acc(v.at(0).grid());
  for (std::size_t a = 0; a < v.size(); ++a) acc += partial(transform(v[a]), static_cast<int>(a));
  return acc;
}

inline Field divergence(const VectorField& v) { return inverse_transform(divergence_spectrum(v)); }

inline Field laplacian(const Field& f) { return apply_multiplier(f, symbols::laplacian()); }

/// Mean-zero solution of Delta g = f; f must have zero mean.
inline Field inverse_laplacian(const Field& f) {
  return apply_multiplier(f, symbols::inverse_laplacian(), ZeroMode::require);
}

/// |k|^order multiplier; negative orders require a mean-zero field.
inline Field fractional_derivative(const Field& f, double order) {
  return apply_multiplier(f, symbols::fractional(order),
                          order < 0.0 ? ZeroMode::require : ZeroMode::regular);
}

/// True when the mode survives the 2/3 dealiasing rule (|m_a| <= n/3 on every axis).
inline bool inside_dealias_band(const Grid& g, const ModeIndex& m) noexcept {
  const int cut = g.n() / 3;
  for (int a = 0; a < g.dim(); ++a)
    if (std::abs(m[a]) > cut) return false;
  return true;
}

inline Spectrum dealias(Spectrum s) {
  const Grid& g = s.grid();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!inside_dealias_band(g, g.mode(i))) s[i] = 0.0;
  return s;
}

inline Field dealias(const Field& f) { return inverse_transform(dealias(transform(f))); }

/// Pointwise product followed by 2/3-rule truncation.
inline Field product(const Field& a, const Field& b) { return dealias(a * b); }

}  // namespace nsp
