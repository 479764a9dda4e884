#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "nsp/thermo.hpp"

namespace nsp {

/// Constant coefficients of the system linearized at rho_bar.
struct LinearCoefficients {
  double rho_ref = 1.0;
  double h_prime = 1.0;  ///< h'(rho_bar)
  double mu = 1.0;
  double mu_prime = 0.0;

  double nu() const noexcept { return (2.0 * mu + mu_prime) / rho_ref; }

  static LinearCoefficients from(const FluidParams& p) {
    return {p.rho_ref, p.law.enthalpy_prime(p.rho_ref), p.mu, p.mu_prime};
  }
};

/// Real 2x2 matrix, row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
            x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
  }

  template <class T>
  std::array<T, 2> apply(const T& x, const T& y) const {
    return {a11 * x + a12 * y, a21 * x + a22 * y};
  }

  double max_abs() const noexcept {
    return std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
  }
};

/// Fourier symbol of the linearized operator at one wavenumber magnitude xi,
/// after splitting the velocity into its longitudinal part d = Lambda^{-1} div u
/// and its divergence-free part.
///
/// The longitudinal pair (rho, d) obeys d/dt (rho, d) = G (rho, d) with
///   G = [[0, -rho_bar xi], [h'(rho_bar) xi + 1/xi, -nu xi^2]],
/// where 1/xi comes from the Poisson force; the divergence-free velocity
/// decays at rate mu xi^2 / rho_bar.
class ModeSymbol {
public:
  ModeSymbol(double xi, const LinearCoefficients& c) : xi_(xi), c_(c) {
    if (!(xi > 0.0)) throw DomainError("mode symbol needs xi > 0");
  }

  double xi() const noexcept { return xi_; }
  const LinearCoefficients& coefficients() const noexcept { return c_; }

  Mat2 generator() const noexcept {
    return {0.0, -c_.rho_ref * xi_, c_.h_prime * xi_ + 1.0 / xi_, -c_.nu() * xi_ * xi_};
  }

  double incompressible_rate() const noexcept { return c_.mu * xi_ * xi_ / c_.rho_ref; }

  double trace() const noexcept { return -c_.nu() * xi_ * xi_; }
  double determinant() const noexcept { return c_.rho_ref * (c_.h_prime * xi_ * xi_ + 1.0); }

  /// Roots of lambda^2 + nu xi^2 lambda + rho_bar (1 + h' xi^2); the first
  /// has the larger real part.
  std::array<std::complex<double>, 2> eigenvalues() const noexcept {
    const double s = 0.5 * trace(), det = determinant();
    const double disc = s * s - det;
    if (disc < 0.0) {
      const double w = std::sqrt(-disc);
      return {std::complex<double>(s, w), std::complex<double>(s, -w)};
    }
    const double low = s - std::sqrt(disc);  // no cancellation: s < 0
    return {std::complex<double>(det / low, 0.0), std::complex<double>(low, 0.0)};
  }

private:
  double xi_;
  LinearCoefficients c_;
};

/// exp(t G) for the longitudinal block and exp(-t mu xi^2 / rho_bar) for the
/// divergence-free part.
struct ModePropagator {
  Mat2 compressible;
  double incompressible = 1.0;
};

/// True when the two eigenvalues nearly coincide (defective direction).
inline bool eigenvalues_collide(const ModeSymbol& sym) {
  const auto ev = sym.eigenvalues();
  return std::abs(ev[0] - ev[1]) < 1e-8 * std::abs(ev[0]) + 1e-12;
}

/// Exact exponential through the spectral (Cayley-Hamilton) form
///   exp(tG) = e^{ts} [C I + t S (G - s I)],  s = tr G / 2,
/// with C = cosh(t Delta), S = sinh(t Delta)/(t Delta), Delta^2 = s^2 - det G.
/// Near an eigenvalue collision C and S are summed as Taylor series in
/// (t Delta)^2; far apart and real, the two exponentials are formed
/// separately so nothing overflows.
inline ModePropagator mode_exponential(const ModeSymbol& sym, double t) {
  if (!(t >= 0.0)) throw DomainError("mode exponential needs t >= 0");
  ModePropagator out;
  out.incompressible = std::exp(-t * sym.incompressible_rate());
  const Mat2 G = sym.generator();
  const double s = 0.5 * sym.trace(), det = sym.determinant();
  const double disc = s * s - det;
  const Mat2 M{G.a11 - s, G.a12, G.a21, G.a22 - s};

  double c_coef = 0.0;  // multiplies I
  double m_coef = 0.0;  // multiplies M
  const double y = t * t * disc;
  if (eigenvalues_collide(sym) || std::abs(y) < 1e-6) {
    // C = sum y^j/(2j)!, S = sum y^j/(2j+1)!
    double c = 0.0, sh = 0.0, term_c = 1.0, term_s = 1.0;
    for (int j = 0; j < 30; ++j) {
      c += term_c;
      sh += term_s;
      term_c *= y / ((2.0 * j + 1.0) * (2.0 * j + 2.0));
      term_s *= y / ((2.0 * j + 2.0) * (2.0 * j + 3.0));
      if (std::abs(term_c) < 1e-18 && std::abs(term_s) < 1e-18) break;
    }
    const double e = std::exp(t * s);
    c_coef = e * c;
    m_coef = e * t * sh;
  } else if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    const double e = std::exp(t * s);
    c_coef = e * std::cos(t * w);
    m_coef = e * std::sin(t * w) / w;
  } else {
    const double delta = std::sqrt(disc);
    if (t * delta < 1.0) {
      const double e = std::exp(t * s);
      c_coef = e * std::cosh(t * delta);
      m_coef = e * std::sinh(t * delta) / delta;
    } else {
      const double low = s - delta;
      const double high = det / low;
      const double e_high = std::exp(t * high), e_low = std::exp(t * low);
      const double half_gap = 0.5 * (high - low);
      c_coef = 0.5 * (e_high + e_low);
      m_coef = 0.5 * (e_high - e_low) / half_gap;
    }
  }
  out.compressible = {c_coef + m_coef * M.a11, m_coef * M.a12, m_coef * M.a21, c_coef + m_coef * M.a22};
  return out;
}

}  // namespace nsp
