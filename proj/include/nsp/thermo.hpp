#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nsp/field.hpp"
#include "nsp/quadrature.hpp"

namespace nsp {

/// Barotropic pressure law p(rho) with the enthalpy h(z) = int_1^z p'(s)/s ds.
///
/// Three flavours: the gamma law p = kappa rho^gamma (closed forms for h and
/// for the Taylor remainder), polynomial laws p = sum_j c_j rho^j (closed
/// form h, quadrature remainder) and arbitrary smooth laws given through p'
/// and p'' (quadrature for both).
class PressureLaw {
public:
  enum class Kind { gamma, polynomial, custom };

  static PressureLaw gamma_law(double gamma, double kappa = 1.0) {
    if (!(gamma >= 1.0)) throw DomainError("gamma-law exponent must be >= 1");
    if (!(kappa > 0.0)) throw DomainError("gamma-law coefficient must be positive");
    PressureLaw law(Kind::gamma);
    law.gamma_ = gamma;
    law.kappa_ = kappa;
    law.dp_ = [gamma, kappa](double r) { return kappa * gamma * std::pow(r, gamma - 1.0); };
    law.d2p_ = [gamma, kappa](double r) {
      return kappa * gamma * (gamma - 1.0) * std::pow(r, gamma - 2.0);
    };
    return law;
  }

  /// p(rho) = sum_j coeffs[j] rho^j; coeffs[0] is irrelevant to the dynamics.
  static PressureLaw polynomial(std::vector<double> coeffs) {
    PressureLaw law(Kind::polynomial);
    law.coeffs_ = coeffs;
    law.dp_ = [coeffs](double r) {
      double s = 0.0;
      for (std::size_t j = 1; j < coeffs.size(); ++j) s += j * coeffs[j] * std::pow(r, j - 1.0);
      return s;
    };
    law.d2p_ = [coeffs](double r) {
      double s = 0.0;
      for (std::size_t j = 2; j < coeffs.size(); ++j)
        s += j * (j - 1.0) * coeffs[j] * std::pow(r, j - 2.0);
      return s;
    };
    return law;
  }

  static PressureLaw custom(std::function<double(double)> dp, std::function<double(double)> d2p,
                            std::string name = "custom") {
    PressureLaw law(Kind::custom);
    law.dp_ = std::move(dp);
    law.d2p_ = std::move(d2p);
    law.name_ = std::move(name);
    return law;
  }

  Kind kind() const noexcept { return kind_; }
  std::optional<double> gamma() const {
    return kind_ == Kind::gamma ? std::optional<double>(gamma_) : std::nullopt;
  }
  double kappa() const noexcept { return kappa_; }
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  double dp(double rho) const { return dp_(rho); }
  double d2p(double rho) const { return d2p_(rho); }

  double enthalpy(double z) const {
    check_density(z);
    switch (kind_) {
      case Kind::gamma:
        if (gamma_ == 1.0) return kappa_ * std::log(z);
        return kappa_ * gamma_ / (gamma_ - 1.0) * std::expm1((gamma_ - 1.0) * std::log(z));
      case Kind::polynomial: {
        double h = 0.0;
        for (std::size_t j = 1; j < coeffs_.size(); ++j) {
          if (j == 1)
            h += coeffs_[1] * std::log(z);
          else
            h += j * coeffs_[j] / (j - 1.0) * std::expm1((j - 1.0) * std::log(z));
        }
        return h;
      }
      case Kind::custom:
        break;
    }
    const auto res = quad::integrate_adaptive([this](double s) { return dp_(s) / s; }, {std::min(1.0, z), std::max(1.0, z)},
                                              {.order = 16, .rtol = 1e-15, .atol = 1e-300});
    return z < 1.0 ? -res.value : res.value;
  }

  double enthalpy_prime(double z) const {
    check_density(z);
    return dp_(z) / z;
  }

  double enthalpy_second(double z) const {
    check_density(z);
    return (d2p_(z) * z - dp_(z)) / (z * z);
  }

  /// R = int_{rho_s}^{rho_s + rho} h''(s) (rho_s + rho - s) ds, i.e. the
  /// second-order Taylor remainder of h around rho_s.
  double remainder(double perturbation, double rho_s) const {
    check_density(rho_s);
    check_density(rho_s + perturbation);
    if (perturbation == 0.0) return 0.0;
    if (kind_ == Kind::gamma) {
      const double x = perturbation / rho_s;
      if (gamma_ == 1.0) return kappa_ * log1p_minus_x(x);
      const double a = gamma_ - 1.0;
      return kappa_ * gamma_ / a * std::pow(rho_s, a) * binomial_remainder(a, x);
    }
    // integrate over the ordered interval; reversing the limits flips the sign
    const double top = rho_s + perturbation;
    const auto res = quad::integrate_adaptive([&](double s) { return enthalpy_second(s) * (top - s); },
                                              {std::min(rho_s, top), std::max(rho_s, top)},
                                              {.order = 16, .rtol = 1e-15, .atol = 1e-300});
    return perturbation > 0.0 ? res.value : -res.value;
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case Kind::gamma:
        os << "gamma:" << gamma_;
        if (kappa_ != 1.0) os << "," << kappa_;
        break;
      case Kind::polynomial:
        os << "poly:";
        for (std::size_t j = 0; j < coeffs_.size(); ++j) os << (j ? "," : "") << coeffs_[j];
        break;
      case Kind::custom:
        os << name_;
        break;
    }
    return os.str();
  }

private:
  explicit PressureLaw(Kind k) : kind_(k) {}

  static void check_density(double z) {
    if (!(z > 0.0)) throw DomainError("density must be positive");
  }

  /// (1+x)^a - 1 - a x without cancellation for small x.
  static double binomial_remainder(double a, double x) {
    if (a == 1.0) return 0.0;
    if (std::abs(x) < 1e-2) {
      double term = a * (a - 1.0) / 2.0 * x * x, sum = 0.0;
      for (int j = 2; j < 60 && term != 0.0; ++j) {
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        term *= (a - j) / (j + 1.0) * x;
      }
      return sum;
    }
    return std::expm1(a * std::log1p(x)) - a * x;
  }

  static double log1p_minus_x(double x) {
    if (std::abs(x) < 1e-2) {
      double sum = 0.0, power = x * x;
      for (int j = 2; j < 60; ++j) {
        const double term = (j % 2 == 0 ? -1.0 : 1.0) * power / j;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        power *= x;
      }
      return sum;
    }
    return std::log1p(x) - x;
  }

  Kind kind_;
  double gamma_ = 0.0;
  double kappa_ = 1.0;
  std::vector<double> coeffs_;
  std::string name_;
  std::function<double(double)> dp_;
  std::function<double(double)> d2p_;
};

/// Parse "gamma:<g>[,<kappa>]" or "poly:<c0>,<c1>,...".
inline PressureLaw parse_pressure_law(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("pressure law needs a kind prefix: " + text);
  const std::string kind = text.substr(0, colon);
  std::vector<double> nums;
  std::stringstream ss(text.substr(colon + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw DomainError("malformed number '" + item + "' in pressure law: " + text);
    nums.push_back(v);
  }
  if (kind == "gamma" && (nums.size() == 1 || nums.size() == 2))
    return PressureLaw::gamma_law(nums[0], nums.size() == 2 ? nums[1] : 1.0);
  if (kind == "poly" && nums.size() >= 2) return PressureLaw::polynomial(nums);
  throw DomainError("unknown pressure law: " + text);
}

/// Fluid parameters: pressure law, shear viscosity mu, second viscosity
/// coefficient mu' (the momentum equation carries (mu + mu') grad div u) and
/// the reference density rho_bar (the doping mean).
struct FluidParams {
  PressureLaw law = PressureLaw::gamma_law(2.0);
  double mu = 1.0;
  double mu_prime = 0.0;
  double rho_ref = 1.0;

  /// (2 mu + mu') / rho_bar, the longitudinal diffusivity.
  double nu() const noexcept { return (2.0 * mu + mu_prime) / rho_ref; }

  /// Throws unless mu > 0, mu' + 2/3 mu >= 0 and p' > 0 on [rho_min, rho_max].
  void validate(double rho_min, double rho_max) const {
    if (!(mu > 0.0)) throw DomainError("viscosity mu must be positive");
    if (!(mu_prime + 2.0 / 3.0 * mu >= 0.0)) throw DomainError("need mu' + 2/3 mu >= 0");
    if (!(rho_ref > 0.0)) throw DomainError("reference density must be positive");
    if (!(rho_min > 0.0) || rho_max < rho_min) throw DomainError("bad density range");
    for (int i = 0; i <= 64; ++i) {
      const double r = rho_min + (rho_max - rho_min) * i / 64.0;
      if (!(law.dp(r) > 0.0)) throw DomainError("pressure law must satisfy p'(rho) > 0");
    }
  }
};

inline double enthalpy(const PressureLaw& law, double z) { return law.enthalpy(z); }
inline double enthalpy_prime(const PressureLaw& law, double z) { return law.enthalpy_prime(z); }

/// Pointwise Taylor remainder of h around rho_s for the perturbation field.
inline Field remainder(const PressureLaw& law, const Field& perturbation, const Field& rho_s) {
  Field out(perturbation.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double total = perturbation[i] + rho_s[i];
    if (!(total > 0.0) || !(rho_s[i] > 0.0))
      throw PositivityError("nonpositive total density at grid index " + std::to_string(i), i, total);
    out[i] = law.remainder(perturbation[i], rho_s[i]);
  }
  return out;
}

}  // namespace nsp
