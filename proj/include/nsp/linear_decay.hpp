#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nsp/mode_symbol.hpp"
#include "nsp/quadrature.hpp"

namespace nsp {

enum class Component { density, velocity, velocity_compressible, velocity_incompressible };

inline std::string to_string(Component c) {
  switch (c) {
    case Component::density: return "density";
    case Component::velocity: return "velocity";
    case Component::velocity_compressible: return "velocity-compressible";
    case Component::velocity_incompressible: return "velocity-incompressible";
  }
  return "?";
}

inline Component parse_component(const std::string& s) {
  if (s == "density") return Component::density;
  if (s == "velocity") return Component::velocity;
  if (s == "velocity-compressible") return Component::velocity_compressible;
  if (s == "velocity-incompressible") return Component::velocity_incompressible;
  throw DomainError("unknown component: " + s);
}

/// Radial spectral model of L^p initial data on R^3.
///
/// The data (grad^{-1} rho_0, u_0) is modelled by the amplitude
///   P(xi) = xi^{-3(1 - 1/p)} exp(-xi^2),
/// the critical low-frequency size of an L^p function's transform: bounded
/// for p = 1, and square integrable against xi^2 dxi for p < 2. Density
/// carries one extra factor xi (rho_0 = div of an L^p field). `shape`
/// selects which of density, longitudinal and divergence-free velocity are
/// nonzero: "gaussian" (all), "density", "compressible" or "incompressible".
struct SpectralProfile {
  double p = 1.0;
  std::string shape = "gaussian";

  double amplitude(double xi) const {
    const double a = 3.0 * (1.0 - 1.0 / p);
    return (a == 0.0 ? 1.0 : std::pow(xi, -a)) * std::exp(-xi * xi);
  }
  bool has_density() const { return shape == "gaussian" || shape == "density"; }
  bool has_compressible() const { return shape == "gaussian" || shape == "compressible"; }
  bool has_incompressible() const { return shape == "gaussian" || shape == "incompressible"; }

  void validate() const {
    if (!(p >= 1.0 && p < 2.0)) throw DomainError("spectral profile needs 1 <= p < 2");
    if (shape != "gaussian" && shape != "density" && shape != "compressible" && shape != "incompressible")
      throw DomainError("unknown spectral profile: " + shape);
  }
};

struct LinearDecayQuery {
  double ell = 0.0;           ///< derivative order
  double q = 2.0;             ///< 2 or infinity
  Component component = Component::density;
  SpectralProfile profile{};  ///< carries the data index p
};

struct DecayPoint {
  double t = 0.0;
  double norm = 0.0;
};

struct QuadratureOptions {
  int order = 8;
  double rtol = 1e-10;
  int max_panels = 600;
  double failure_rtol = 1e-6;  ///< error estimates above this abort
};

/// Squared magnitude of the requested component of one mode at time t.
inline double mode_energy(const LinearCoefficients& c, const SpectralProfile& prof, Component comp, double xi,
                          double t) {
  const double amp = prof.amplitude(xi);
  const double rho0 = prof.has_density() ? xi * amp : 0.0;
  const double d0 = prof.has_compressible() ? amp : 0.0;
  const double w0 = prof.has_incompressible() ? amp : 0.0;
  const ModePropagator e = mode_exponential(ModeSymbol(xi, c), t);
  const auto [rho, d] = e.compressible.apply(rho0, d0);
  const double w = e.incompressible * w0;
  switch (comp) {
    case Component::density: return rho * rho;
    case Component::velocity: return d * d + w * w;
    case Component::velocity_compressible: return d * d;
    case Component::velocity_incompressible: return w * w;
  }
  return 0.0;
}

/// ||grad^ell component(t)||_{L^2(R^3)} by adaptive radial quadrature of
///   int_0^inf xi^{2 ell} |mode(xi, t)|^2 4 pi xi^2 dxi.
inline double radial_l2_norm(const LinearCoefficients& c, const SpectralProfile& prof, Component comp, double ell,
                             double t, const QuadratureOptions& opt = {}) {
  // heat scale of the slowest low-frequency damping
  const double rate = std::min(0.5 * c.nu(), c.mu / c.rho_ref);
  const double knee = std::min(1.0, 1.0 / std::sqrt(std::max(rate * t, 1e-300)));
  std::vector<double> breaks;
  const int grading = prof.p > 1.0 ? 48 : 16;
  for (int j = grading; j >= 1; --j) breaks.push_back(knee * std::ldexp(1.0, -j));
  for (double x = knee; x < 1.0; x *= 2.0) breaks.push_back(x);
  for (double x : {1.0, 2.0, 4.0, 7.0}) breaks.push_back(x);
  breaks.insert(breaks.begin(), 0.0);

  auto integrand = [&](double xi) {
    if (xi <= 0.0) return 0.0;
    return std::pow(xi, 2.0 * ell) * mode_energy(c, prof, comp, xi, t) * 4.0 * std::numbers::pi * xi * xi;
  };
  const auto res = quad::integrate_adaptive(
      integrand, breaks, {.order = opt.order, .rtol = opt.rtol, .atol = 1e-300, .max_panels = opt.max_panels});
  if (!res.converged && res.error > opt.failure_rtol * std::abs(res.value))
    throw ConvergenceError("radial quadrature did not converge at t = " + std::to_string(t) + " (error " +
                               std::to_string(res.error) + ", value " + std::to_string(res.value) + ")",
                           {res.value, res.error, static_cast<double>(res.panels)});
  return std::sqrt(std::max(res.value, 0.0));
}

/// Norm of the linear evolution of the profile at each time. For q = infinity
/// the value is the interpolation bound ||grad^{ell+1} f||^{1/2} ||grad^{ell+2} f||^{1/2}.
inline std::vector<DecayPoint> decay_curve(const LinearCoefficients& c, const LinearDecayQuery& query,
                                           const std::vector<double>& times, const QuadratureOptions& opt = {}) {
  query.profile.validate();
  if (query.ell < 0.0) throw DomainError("derivative order must be nonnegative");
  if (query.q != 2.0 && !std::isinf(query.q)) throw DomainError("target index q must be 2 or infinity");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
      throw DomainError("decay times must be positive and increasing");
  std::vector<DecayPoint> out;
  out.reserve(times.size());
  for (double t : times) {
    double value = 0.0;
    if (query.q == 2.0) {
      value = radial_l2_norm(c, query.profile, query.component, query.ell, t, opt);
    } else {
      const double a = radial_l2_norm(c, query.profile, query.component, query.ell + 1.0, t, opt);
      const double b = radial_l2_norm(c, query.profile, query.component, query.ell + 2.0, t, opt);
      value = std::sqrt(a * b);
    }
    out.push_back({t, value});
  }
  return out;
}

/// `samples` times spaced evenly in log t over [t_min, t_max].
inline std::vector<double> log_times(double t_min, double t_max, int samples) {
  if (!(t_min > 0.0) || !(t_max > t_min) || samples < 2) throw DomainError("bad time range");
  std::vector<double> t(samples);
  const double a = std::log(t_min), b = std::log(t_max);
  for (int i = 0; i < samples; ++i) t[i] = std::exp(a + (b - a) * i / (samples - 1));
  t.front() = t_min;
  t.back() = t_max;
  return t;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double uncertainty = 0.0;   ///< standard error of the slope
  double rms_residual = 0.0;  ///< in log units
  int samples = 0;
  bool power_law = false;     ///< rms_residual below the threshold
};

/// Least-squares slope of log(norm) against log(t) over t in [t_begin, t_end].
inline ExponentFit fit_exponent(const std::vector<DecayPoint>& curve, double t_begin, double t_end,
                                double power_law_threshold = 0.05) {
  std::vector<double> x, y;
  for (const DecayPoint& p : curve) {
    if (p.t < t_begin || p.t > t_end) continue;
    if (!(p.norm > 0.0) || !(p.t > 0.0)) throw DomainError("fit needs positive times and norms");
    x.push_back(std::log(p.t));
    y.push_back(std::log(p.norm));
  }
  const int n = static_cast<int>(x.size());
  if (n < 10) throw DomainError("fit window holds fewer than 10 samples");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("degenerate fit window");
  ExponentFit fit;
  fit.samples = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.uncertainty = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  fit.power_law = fit.rms_residual < power_law_threshold;
  return fit;
}

}  // namespace nsp
