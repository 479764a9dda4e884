#pragma once

// Reference computations used to cross-check the fast paths. They are
// written for clarity, not speed, and share no code with the propagators
// they check.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nsp/grid.hpp"
#include "nsp/mode_symbol.hpp"

namespace nsp::oracle {

template <class T>
using Dense = std::vector<std::vector<T>>;

template <class T>
Dense<T> identity(std::size_t n) {
  Dense<T> I(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = T(1);
  return I;
}

template <class T>
Dense<T> multiply(const Dense<T>& a, const Dense<T>& b) {
  const std::size_t n = a.size();
  Dense<T> c(n, std::vector<T>(n, T(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

template <class T>
double norm1(const Dense<T>& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i][j]);
    best = std::max(best, s);
  }
  return best;
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
template <class T>
Dense<T> expm(Dense<T> a) {
  const std::size_t n = a.size();
  const double nrm = norm1(a);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : a)
    for (auto& v : row) v *= scale;
  Dense<T> result = identity<T>(n), term = identity<T>(n);
  for (int j = 1; j <= 30; ++j) {
    term = multiply(term, a);
    for (auto& row : term)
      for (auto& v : row) v /= static_cast<double>(j);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) result[r][c] += term[r][c];
    if (norm1(term) < 1e-18 * norm1(result)) break;
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);
  return result;
}

/// The 2x2 compressible block as a dense matrix. Extended precision by
/// default: at small xi the 1/xi entry forces many squarings, which costs a
/// double-precision oracle about 1e-10 of accuracy.
template <class T = long double>
Dense<T> compressible_block(double xi, const LinearCoefficients& c) {
  const T x = xi;
  return {{T(0), -T(c.rho_ref) * x}, {T(c.h_prime) * x + T(1) / x, -T(c.nu()) * x * x}};
}

/// Fourier symbol of the linearized system acting on (rho_hat, u_hat_1..u_hat_d)
/// for the wavevector k, assembled without any Hodge splitting:
///   rho_t = -rho_bar i k.u
///   u_t   = -i k (h' + 1/|k|^2) rho - (mu |k|^2 u + (mu + mu') k (k.u)) / rho_bar
inline Dense<std::complex<double>> full_symbol(const Wavevector& k, int dim, const LinearCoefficients& c) {
  using C = std::complex<double>;
  const std::size_t n = static_cast<std::size_t>(dim) + 1;
  Dense<C> m(n, std::vector<C>(n, C(0.0)));
  double k2 = 0.0;
  for (int a = 0; a < dim; ++a) k2 += k[a] * k[a];
  const C I(0.0, 1.0);
  for (int a = 0; a < dim; ++a) {
    m[0][a + 1] = -c.rho_ref * I * k[a];
    m[a + 1][0] = -I * k[a] * (c.h_prime + 1.0 / k2);
    for (int b = 0; b < dim; ++b) {
      double v = -(c.mu + c.mu_prime) * k[a] * k[b] / c.rho_ref;
      if (a == b) v -= c.mu * k2 / c.rho_ref;
      m[a + 1][b + 1] = v;
    }
  }
  return m;
}

/// Roots of the characteristic polynomial lambda^2 + nu xi^2 lambda + rho_bar (1 + h' xi^2)
/// by the textbook quadratic formula.
inline std::array<std::complex<double>, 2> characteristic_roots(double xi, const LinearCoefficients& c) {
  const double b = c.nu() * xi * xi, q = c.rho_ref * (1.0 + c.h_prime * xi * xi);
  const std::complex<double> root = std::sqrt(std::complex<double>(b * b - 4.0 * q, 0.0));
  return {0.5 * (-b + root), 0.5 * (-b - root)};
}

}  // namespace nsp::oracle
