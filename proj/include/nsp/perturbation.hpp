#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nsp/norms.hpp"

namespace nsp {

/// Perturbation (varrho, u, Phi) of the steady state at time t, with
/// Delta Phi = varrho and all three mean-zero in varrho / Phi.
struct PerturbationState {
  Field rho;
  VectorField u;
  Field phi;
  double t = 0.0;

  const Grid& grid() const { return rho.grid(); }

  /// Recompute Phi from varrho (the zero mode of varrho is dropped).
  void refresh_potential() { phi = apply_multiplier(rho, symbols::inverse_laplacian(), ZeroMode::project); }

  static PerturbationState zero(const Grid& g) {
    PerturbationState s{Field(g), zero_vector_field(g), Field(g), 0.0};
    return s;
  }

  static PerturbationState from(Field rho, VectorField u, double t = 0.0) {
    if (static_cast<int>(u.size()) != rho.grid().dim()) throw DomainError("velocity needs dim components");
    PerturbationState s{std::move(rho), std::move(u), Field(), t};
    s.refresh_potential();
    return s;
  }
};

/// varrho = amplitude cos(2 pi m.x / L), u = 0.
inline PerturbationState mode_data(const Grid& g, const ModeIndex& m, double amplitude) {
  const double k0 = g.wavenumber_unit();
  Field rho = Field::from_function(g, [&](const Point& x) {
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += k0 * m[a] * x[a];
    return amplitude * std::cos(phase);
  });
  return PerturbationState::from(std::move(rho), zero_vector_field(g));
}

namespace detail {

/// Uniform double in [-1, 1) from the raw 64-bit engine output; independent
/// of the standard library's distribution implementation.
inline double signed_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

inline Field random_band_field(const Grid& g, std::mt19937_64& rng, int band, bool zero_mean) {
  Spectrum s(g);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const ModeIndex m = g.mode(i);
    bool inside = true;
    for (int a = 0; a < g.dim(); ++a) inside = inside && std::abs(m[a]) <= band;
    const double re = signed_unit(rng), im = signed_unit(rng);
    if (inside && !g.is_nyquist(m)) s[i] = Complex(re, im);
  }
  if (zero_mean) s[0] = 0.0;
  return inverse_transform(s);
}

}  // namespace detail

/// Band-limited random data (|m_a| <= band on every axis), mean-zero density,
/// scaled so that (||varrho||_{H^k}^2 + ||u||_{H^k}^2)^{1/2} = amplitude.
inline PerturbationState random_smooth_data(const Grid& g, std::uint64_t seed, double amplitude, int band,
                                            double sobolev_k = 4.0) {
  if (band < 1 || band > g.n() / 3) throw DomainError("random band must lie in [1, n/3]");
  std::mt19937_64 rng(seed);
  Field rho = detail::random_band_field(g, rng, band, true);
  VectorField u;
  for (int a = 0; a < g.dim(); ++a) u.push_back(detail::random_band_field(g, rng, band, false));
  const double size = std::hypot(sobolev_norm(rho, sobolev_k), norm(u, {.sobolev = sobolev_k}));
  const double scale = size > 0.0 ? amplitude / size : 0.0;
  rho *= scale;
  for (Field& c : u) c *= scale;
  return PerturbationState::from(std::move(rho), std::move(u));
}

}  // namespace nsp
