#pragma once

#include <cmath>
#include <string>

#include "nsp/linear_decay.hpp"

namespace nsp {

/// Decay scale zeta = 3/2 (1/max{p, r} - 1/2).
inline double zeta(double p, double r) { return 1.5 * (1.0 / std::max(p, r) - 0.5); }

/// Exponent of the linear semigroup decay of ||grad^ell component||_{L^q}
/// for data (grad^{-1} rho_0, u_0) in L^p:
///   velocity: -3/2 (1/p - 1/q) - ell/2,   density: one further -1/2.
inline double lemma_exponent(Component comp, double ell, double p, double q) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("linear decay needs 1 <= p <= 2");
  if (!(q >= 2.0)) throw DomainError("linear decay needs q >= 2");
  if (!(ell >= 0.0)) throw DomainError("linear decay needs ell >= 0");
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double base = -1.5 * (1.0 / p - inv_q) - ell / 2.0;
  return comp == Component::density ? base - 0.5 : base;
}

enum class TheoremNorm { density, velocity, sup };

inline std::string to_string(TheoremNorm n) {
  switch (n) {
    case TheoremNorm::density: return "density";
    case TheoremNorm::velocity: return "velocity";
    case TheoremNorm::sup: return "linf";
  }
  return "?";
}

/// r slightly above 1, standing for the limit r -> 1+.
inline const double kDopingIndexLimitOne = std::nextafter(1.0, 2.0);

/// Exponents of the nonlinear decay toward the steady state, under the
/// hypotheses 1 <= p < 3/2 (data) and 1 < r < 3/2 (doping deviation):
///   density  ||grad^ell (rho - rho_s)||_{H^{k-ell}}, 0 <= ell <= 1/2:  -zeta - ell/2 - 1/2
///   velocity ||grad^ell u||_{H^{k-ell}},            0 <= ell <= 3/2:  -zeta - ell/2
///   sup      ||(rho - rho_s, u)||_{L^inf}:                              -zeta - 3/4
inline double theorem_exponent(TheoremNorm which, double ell, double p, double r) {
  if (!(p >= 1.0 && p < 1.5)) throw DomainError("hypothesis violated: need 1 <= p < 3/2");
  if (!(r > 1.0 && r < 1.5)) throw DomainError("hypothesis violated: need 1 < r < 3/2");
  const double z = zeta(p, r);
  switch (which) {
    case TheoremNorm::density:
      if (!(ell >= 0.0 && ell <= 0.5)) throw DomainError("hypothesis violated: density needs 0 <= ell <= 1/2");
      return -z - ell / 2.0 - 0.5;
    case TheoremNorm::velocity:
      if (!(ell >= 0.0 && ell <= 1.5)) throw DomainError("hypothesis violated: velocity needs 0 <= ell <= 3/2");
      return -z - ell / 2.0;
    case TheoremNorm::sup:
      return -z - 0.75;
  }
  return 0.0;
}

}  // namespace nsp
