#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsp/linear_decay.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/steady_state.hpp"
#include "nsp/targets.hpp"

namespace nsp {

/// Which algebraic arrangement of the perturbation equations to evaluate.
///
/// variable:  d_t rho + div(rho_s u) = -div(rho u)
///            d_t u + grad(h'(rho_s) rho) - (1/rho_s) V u - grad Phi
///                = -u.grad u - grad R + (1/(rho + rho_s) - 1/rho_s) V u
/// constant:  d_t rho + rho_bar div u = N1
///            d_t u + h'(rho_bar) grad rho - (1/rho_bar) V u - grad Phi = N2
/// with V u = mu Delta u + (mu + mu') grad div u, Delta Phi = rho and
///   N1 = -div((rho + rho_s - rho_bar) u)
///   N2 = -u.grad u - grad R - grad((h'(rho_s) - h'(rho_bar)) rho) + (1/(rho + rho_s) - 1/rho_bar) V u.
enum class RhsForm { variable, constant };

enum class TimeScheme {
  exponential_midpoint,  ///< exact linear part per mode, explicit midpoint on N1, N2
  explicit_midpoint,     ///< explicit midpoint on the full right-hand side
};

/// Perturbation state in spectral form, as the stepper carries it.
struct SpectralState {
  Spectrum rho;
  std::vector<Spectrum> u;
  double t = 0.0;

  static SpectralState from(const PerturbationState& s) {
    SpectralState out{transform(s.rho), {}, s.t};
    for (const Field& c : s.u) out.u.push_back(transform(c));
    return out;
  }

  PerturbationState physical() const {
    VectorField v;
    for (const Spectrum& c : u) v.push_back(inverse_transform(c));
    PerturbationState s = PerturbationState::from(inverse_transform(rho), std::move(v), t);
    return s;
  }

  SpectralState& axpy(double a, const SpectralState& x) {
    rho.axpy(a, x.rho);
    for (std::size_t c = 0; c < u.size(); ++c) u[c].axpy(a, x.u[c]);
    return *this;
  }
};

/// Spectral time derivative (d_t rho, d_t u).
using Derivative = SpectralState;

/// Perturbation dynamics around one steady state.
class PerturbationModel {
public:
  PerturbationModel(const SteadyState& ss, const FluidParams& params)
      : params_(params), grid_(ss.rho.grid()), rho_s_(ss.rho), rho_ref_(ss.rho_ref) {
    params_.rho_ref = rho_ref_;
    lin_ = LinearCoefficients::from(params_);
    hp_s_ = rho_s_.map([&](double r) { return params_.law.enthalpy_prime(r); });
    hp_dev_ = hp_s_.map([&](double v) { return v - lin_.h_prime; });
    inv_rho_s_ = rho_s_.map([](double r) { return 1.0 / r; });
    rho_dev_ = rho_s_.map([&](double r) { return r - rho_ref_; });
    flat_ = rho_dev_.max_abs() == 0.0;
  }

  const Grid& grid() const noexcept { return grid_; }
  const FluidParams& params() const noexcept { return params_; }
  const LinearCoefficients& linear_coefficients() const noexcept { return lin_; }
  const Field& background() const noexcept { return rho_s_; }
  double rho_ref() const noexcept { return rho_ref_; }

  /// Full right-hand side in the chosen arrangement. Every pointwise product
  /// is truncated by the 2/3 rule; constant-coefficient terms are exact.
  Derivative rhs(const SpectralState& s, RhsForm form) const {
    const Pieces p = evaluate(s);
    const int dim = grid_.dim();
    Derivative d{Spectrum(grid_), std::vector<Spectrum>(dim, Spectrum(grid_)), s.t};
    if (form == RhsForm::constant) {
      d = linear_part(s, p);
      const Derivative n = nonlinear_part(p);
      d.axpy(1.0, n);
      return d;
    }
    // variable: -div((rho_s + rho) u)
    VectorField flux(dim, Field(grid_));
    for (int a = 0; a < dim; ++a)
      for (std::size_t i = 0; i < grid_.size(); ++i) flux[a][i] = (rho_s_[i] + p.rho[i]) * p.u[a][i];
    d.rho = masked_divergence(flux) ;
    d.rho *= -1.0;
    const Spectrum pressure = masked(hp_s_ * p.rho);
    const Spectrum rem = masked(remainder(params_.law, p.rho, rho_s_));
    for (int a = 0; a < dim; ++a) {
      Field visc_s(grid_), visc_corr(grid_), adv(grid_);
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        visc_s[i] = inv_rho_s_[i] * p.visc[a][i];
        visc_corr[i] = (1.0 / (p.rho[i] + rho_s_[i]) - inv_rho_s_[i]) * p.visc[a][i];
        double conv = 0.0;
        for (int b = 0; b < dim; ++b) conv += p.u[b][i] * p.grad_u[a][b][i];
        adv[i] = conv;
      }
      Spectrum du = partial(pressure, a);
      du *= -1.0;
      du.axpy(1.0, masked(visc_s));
      du.axpy(1.0, p.grad_phi[a]);
      du.axpy(-1.0, masked(adv));
      du.axpy(-1.0, partial(rem, a));
      du.axpy(1.0, masked(visc_corr));
      d.u[a] = std::move(du);
    }
    return d;
  }

  /// Constant-coefficient linear part: (-rho_bar div u, -h' grad rho + V u / rho_bar + grad Phi).
  Derivative linear(const SpectralState& s) const { return linear_part(s, evaluate(s)); }

  /// N1, N2.
  Derivative nonlinear(const SpectralState& s) const { return nonlinear_part(evaluate(s)); }

  /// Apply the exact linear evolution over time t to every mode. Nyquist
  /// modes are removed; the zero mode of rho stays 0 and the mean velocity is
  /// unchanged.
  void propagate(SpectralState& s, double t) const {
    const std::vector<ModePropagator>& table = propagators(t);
    const int dim = grid_.dim();
    for (std::size_t i = 1; i < s.rho.size(); ++i) {
      if (grid_.is_nyquist(grid_.mode(i))) {
        s.rho[i] = 0.0;
        for (auto& c : s.u) c[i] = 0.0;
        continue;
      }
      const Wavevector k = grid_.wavevector(i);
      const double xi = magnitude(k);
      Complex along = 0.0;
      for (int a = 0; a < dim; ++a) along += k[a] / xi * s.u[a][i];
      const Complex d = Complex(0.0, 1.0) * along;
      const ModePropagator& e = table[i];
      const auto [rho_new, d_new] = e.compressible.apply(s.rho[i], d);
      const Complex along_new = Complex(0.0, -1.0) * d_new;
      for (int a = 0; a < dim; ++a) {
        const Complex transverse = s.u[a][i] - k[a] / xi * along;
        s.u[a][i] = e.incompressible * transverse + k[a] / xi * along_new;
      }
      s.rho[i] = rho_new;
    }
    s.rho[0] = 0.0;
    s.t += t;
  }

  /// Throws PositivityError if rho + rho_s <= 0 somewhere or a value is not finite.
  void check_admissible(const Field& rho) const {
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double total = rho[i] + rho_s_[i];
      if (!std::isfinite(total))
        throw PositivityError("non-finite density at grid index " + std::to_string(i), i, total);
      if (!(total > 0.0))
        throw PositivityError("total density lost positivity at grid index " + std::to_string(i), i, total);
    }
  }

  double min_total_density(const Field& rho) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rho.size(); ++i) m = std::min(m, rho[i] + rho_s_[i]);
    return m;
  }

  bool flat_background() const noexcept { return flat_; }

  /// Max(|h'(rho_s) - h'(rho_bar)|), max(|1/rho_s - 1/rho_bar|), max(|rho_s - rho_bar|).
  std::array<double, 3> background_deviation() const {
    double a = hp_dev_.max_abs(), b = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) b = std::max(b, std::abs(inv_rho_s_[i] - 1.0 / rho_ref_));
    return {a, b, rho_dev_.max_abs()};
  }

private:
  struct Pieces {
    Field rho;
    VectorField u;
    std::vector<VectorField> grad_u;   ///< grad_u[a][b] = d_b u_a
    VectorField visc;                  ///< mu Delta u + (mu + mu') grad div u
    std::vector<Spectrum> visc_hat;
    std::vector<Spectrum> grad_phi;
    Spectrum div_u;
  };

  Pieces evaluate(const SpectralState& s) const {
    const int dim = grid_.dim();
    Pieces p;
    p.rho = inverse_transform(s.rho);
    check_admissible(p.rho);
    p.div_u = Spectrum(grid_);
    for (int a = 0; a < dim; ++a) p.div_u += partial(s.u[a], a);
    for (int a = 0; a < dim; ++a) {
      p.u.push_back(inverse_transform(s.u[a]));
      VectorField row;
      for (int b = 0; b < dim; ++b) row.push_back(inverse_transform(partial(s.u[a], b)));
      p.grad_u.push_back(std::move(row));
      Spectrum v = apply_multiplier(s.u[a], symbols::laplacian());
      v *= Complex(params_.mu);
      v.axpy(params_.mu + params_.mu_prime, partial(p.div_u, a));
      p.visc.push_back(inverse_transform(v));
      p.visc_hat.push_back(std::move(v));
    }
    const Spectrum phi = apply_multiplier(s.rho, symbols::inverse_laplacian(), ZeroMode::project);
    for (int a = 0; a < dim; ++a) p.grad_phi.push_back(partial(phi, a));
    return p;
  }

  Derivative linear_part(const SpectralState& s, const Pieces& p) const {
    const int dim = grid_.dim();
    Derivative d{p.div_u, {}, s.t};
    d.rho *= Complex(-rho_ref_);
    for (int a = 0; a < dim; ++a) {
      Spectrum du = partial(s.rho, a);
      du *= Complex(-lin_.h_prime);
      du.axpy(1.0 / rho_ref_, p.visc_hat[a]);
      du.axpy(1.0, p.grad_phi[a]);
      d.u.push_back(std::move(du));
    }
    return d;
  }

  Derivative nonlinear_part(const Pieces& p) const {
    const int dim = grid_.dim();
    VectorField flux(dim, Field(grid_));
    for (int a = 0; a < dim; ++a)
      for (std::size_t i = 0; i < grid_.size(); ++i) flux[a][i] = (p.rho[i] + rho_dev_[i]) * p.u[a][i];
    Derivative d{masked_divergence(flux), {}, 0.0};
    d.rho *= -1.0;
    const Spectrum rem = masked(remainder(params_.law, p.rho, rho_s_));
    const Spectrum pressure = masked(hp_dev_ * p.rho);
    for (int a = 0; a < dim; ++a) {
      Field adv(grid_), visc_corr(grid_);
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        double conv = 0.0;
        for (int b = 0; b < dim; ++b) conv += p.u[b][i] * p.grad_u[a][b][i];
        adv[i] = conv;
        visc_corr[i] = (1.0 / (p.rho[i] + rho_s_[i]) - 1.0 / rho_ref_) * p.visc[a][i];
      }
      Spectrum n2 = masked(adv);
      n2 *= -1.0;
      n2.axpy(-1.0, partial(rem, a));
      n2.axpy(-1.0, partial(pressure, a));
      n2.axpy(1.0, masked(visc_corr));
      d.u.push_back(std::move(n2));
    }
    return d;
  }

  static Spectrum masked(const Field& f) { return dealias(transform(f)); }

  Spectrum masked_divergence(const VectorField& flux) const {
    Spectrum acc(grid_);
    for (std::size_t a = 0; a < flux.size(); ++a) acc += partial(masked(flux[a]), static_cast<int>(a));
    return acc;
  }

  const std::vector<ModePropagator>& propagators(double t) const {
    auto it = tables_.find(t);
    if (it != tables_.end()) return it->second;
    if (tables_.size() > 8) tables_.clear();
    std::vector<ModePropagator> table(grid_.spectral_size());
    for (std::size_t i = 1; i < table.size(); ++i) {
      const double xi = magnitude(grid_.wavevector(i));
      table[i] = mode_exponential(ModeSymbol(xi, lin_), t);
    }
    return tables_.emplace(t, std::move(table)).first->second;
  }

  FluidParams params_;
  Grid grid_;
  Field rho_s_;
  double rho_ref_;
  LinearCoefficients lin_;
  Field hp_s_, hp_dev_, inv_rho_s_, rho_dev_;
  bool flat_ = false;
  mutable std::map<double, std::vector<ModePropagator>> tables_;
};

/// Physical-space time derivative of the perturbation.
struct Rhs {
  Field rho;
  VectorField u;
};

inline Rhs rhs_nonlinear(const PerturbationState& state, const SteadyState& ss, const FluidParams& params,
                         RhsForm form) {
  const PerturbationModel model(ss, params);
  const Derivative d = model.rhs(SpectralState::from(state), form);
  Rhs out{inverse_transform(d.rho), {}};
  for (const Spectrum& c : d.u) out.u.push_back(inverse_transform(c));
  return out;
}

/// Advance a spectral state by one step of size dt.
///
/// exponential_midpoint (constant form, Lawson midpoint):
///   U* = E(dt/2) (U + dt/2 N(U)),  U+ = E(dt) U + dt E(dt/2) N(U*)
/// explicit_midpoint (either form):
///   U* = U + dt/2 F(U),            U+ = U + dt F(U*)
inline SpectralState step(const PerturbationModel& model, const SpectralState& s, double dt, TimeScheme scheme,
                          RhsForm form = RhsForm::constant) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  SpectralState out = s;
  if (scheme == TimeScheme::exponential_midpoint) {
    const Derivative n0 = model.nonlinear(s);
    SpectralState mid = s;
    mid.axpy(0.5 * dt, n0);
    model.propagate(mid, 0.5 * dt);
    SpectralState n1 = model.nonlinear(mid);
    model.propagate(n1, 0.5 * dt);
    model.propagate(out, dt);
    out.axpy(dt, n1);
    out.t = s.t + dt;
  } else {
    SpectralState mid = s;
    mid.axpy(0.5 * dt, model.rhs(s, form));
    out.axpy(dt, model.rhs(mid, form));
    out.t = s.t + dt;
  }
  out.rho[0] = 0.0;
  for (std::size_t i = 0; i < out.rho.size(); ++i) {
    bool ok = std::isfinite(out.rho[i].real()) && std::isfinite(out.rho[i].imag());
    for (const Spectrum& c : out.u) ok = ok && std::isfinite(c[i].real()) && std::isfinite(c[i].imag());
    if (!ok) throw PositivityError("non-finite spectrum after step at t = " + std::to_string(out.t), i, 0.0);
  }
  return out;
}

/// Physical-state convenience wrapper around one step.
inline PerturbationState step(const PerturbationState& state, const SteadyState& ss, const FluidParams& params,
                              double dt, TimeScheme scheme = TimeScheme::exponential_midpoint,
                              RhsForm form = RhsForm::constant) {
  const PerturbationModel model(ss, params);
  return step(model, SpectralState::from(state), dt, scheme, form).physical();
}

/// Time step from the stability heuristics. For the exponential scheme only
/// the explicitly treated terms (background deviations and the flow itself)
/// limit the step; for the explicit scheme the full wave and viscous limits do.
inline double suggest_dt(const PerturbationModel& model, const PerturbationState& s, double cfl, TimeScheme scheme,
                         double dt_max = 0.1) {
  const Grid& g = model.grid();
  const FluidParams& p = model.params();
  const double dx = g.spacing();
  const double visc = 2.0 * p.mu + p.mu_prime;
  const LinearCoefficients& c = model.linear_coefficients();
  if (scheme == TimeScheme::explicit_midpoint) {
    const double speed = std::sqrt(c.h_prime * model.rho_ref() + 1.0);
    return cfl * std::min(dx / speed, dx * dx * model.rho_ref() / visc);
  }
  const auto dev = model.background_deviation();
  double umax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m2 = 0.0;
    for (const Field& comp : s.u) m2 += comp[i] * comp[i];
    umax = std::max(umax, std::sqrt(m2));
  }
  const double rho_amp = s.rho.max_abs() + dev[2];
  const double speed = umax + std::sqrt(model.rho_ref() * dev[0] + c.h_prime * rho_amp);
  const double diff = visc * (dev[1] + rho_amp / (model.rho_ref() * (model.rho_ref() - rho_amp)));
  double dt = dt_max;
  if (speed > 0.0) dt = std::min(dt, cfl * dx / speed);
  if (diff > 0.0) dt = std::min(dt, cfl * dx * dx / diff);
  return dt;
}

/// Online diagnostics at one report time.
struct EnergyReport {
  double t = 0.0;
  double rho_hk = 0.0;           ///< ||varrho||_{H^k}
  double u_hk = 0.0;             ///< ||u||_{H^k}
  double grad_phi_l2 = 0.0;      ///< ||grad Phi||_{L^2}
  double dissipation = 0.0;      ///< int_0^t (||varrho||_{H^k}^2 + ||grad u||_{H^k}^2)
  double energy_lhs = 0.0;       ///< ||(varrho,u)||_{H^k}^2 + ||grad Phi||^2 + dissipation
  double energy_ratio = 0.0;     ///< energy_lhs / (||(varrho_0,u_0)||_{H^k}^2 + ||grad^{-1} varrho_0||^2)
  double weighted_energy = 0.0;  ///< h'(rho_bar)||varrho||_{H^k}^2 + rho_bar||u||_{H^k}^2 + ||grad Phi||_{H^k}^2
  double functional_half = 0.0;  ///< ||grad^{1/2}(varrho,u,grad Phi)||_{H^{k-1/2}}^2
  double functional_three_halves = 0.0;  ///< same with ell = 3/2
  double bootstrap_L = 0.0, bootstrap_M = 0.0, bootstrap_N = 0.0;
  double bootstrap_H = 0.0, bootstrap_J = 0.0, bootstrap_K = 0.0;
  double mass = 0.0;             ///< mean(varrho)
  double poisson_residual = 0.0; ///< ||Delta Phi - varrho||_{L^2}
  double min_total_density = 0.0;
};

struct EvolveOptions {
  double t_end = 1.0;
  double dt = 0.0;               ///< 0 selects suggest_dt at the start
  double cfl = 0.4;
  double dt_max = 0.1;
  double report_interval = 0.1;
  TimeScheme scheme = TimeScheme::exponential_midpoint;
  RhsForm form = RhsForm::constant;
  double sobolev_k = 4.0;
  double zeta_p = 1.0;           ///< data index p in zeta
  double zeta_r = 1.25;          ///< doping index r in zeta
  bool keep_snapshots = false;
};

struct EvolveResult {
  std::vector<EnergyReport> reports;
  std::vector<PerturbationState> snapshots;
  double dt = 0.0;
  int steps = 0;
  bool completed = false;
  std::string failure;
  double k0 = 0.0;               ///< ||(grad^{-1} varrho_0, u_0)||_{L^p} + ||(varrho_0,u_0)||_{H^k} + ||grad Phi_0||
  double zeta = 0.0;
  double max_weighted_increase = 0.0;  ///< largest relative one-step growth of the weighted energy
};

namespace detail {

inline double spectral_h(const Spectrum& s, double order, double sobolev) {
  return norm(s, {.order = order, .sobolev = sobolev});
}

inline double vec_h(const std::vector<Spectrum>& v, double order, double sobolev) {
  double sum = 0.0;
  for (const Spectrum& c : v) {
    const double n = spectral_h(c, order, sobolev);
    sum += n * n;
  }
  return std::sqrt(sum);
}

inline Spectrum potential(const Spectrum& rho) {
  return apply_multiplier(rho, symbols::inverse_laplacian(), ZeroMode::project);
}

/// ||varrho||_{H^k}^2 + ||grad u||_{H^k}^2
inline double dissipation_rate(const SpectralState& s, double k) {
  const double a = spectral_h(s.rho, 0.0, k), b = vec_h(s.u, 1.0, k);
  return a * a + b * b;
}

inline double weighted_energy(const SpectralState& s, const LinearCoefficients& c, double k) {
  const double r = spectral_h(s.rho, 0.0, k), u = vec_h(s.u, 0.0, k);
  const double gp = spectral_h(potential(s.rho), 1.0, k);
  return c.h_prime * r * r + c.rho_ref * u * u + gp * gp;
}

}  // namespace detail

/// Integrates the perturbation from `initial` to t_end and records an
/// EnergyReport at t = 0 and every report_interval. Failures (positivity,
/// blow-up) end the run early with `completed == false`.
inline EvolveResult evolve(const PerturbationState& initial, const SteadyState& ss, const FluidParams& params,
                           const EvolveOptions& opt) {
  if (!(opt.t_end > 0.0) || !(opt.report_interval > 0.0)) throw DomainError("t_end and report interval must be positive");
  const double reports_f = opt.t_end / opt.report_interval;
  const int n_reports = static_cast<int>(std::llround(reports_f));
  if (n_reports < 1 || std::abs(reports_f - n_reports) > 1e-9 * reports_f)
    throw DomainError("t_end must be a whole multiple of the report interval");

  const PerturbationModel model(ss, params);
  const LinearCoefficients& lin = model.linear_coefficients();
  const double k = opt.sobolev_k;
  EvolveResult res;
  res.zeta = zeta(opt.zeta_p, opt.zeta_r);

  double dt = opt.dt > 0.0 ? opt.dt : suggest_dt(model, initial, opt.cfl, opt.scheme, opt.dt_max);
  dt = std::min(dt, opt.report_interval);
  const int steps_per_report = static_cast<int>(std::ceil(opt.report_interval / dt - 1e-9));
  dt = opt.report_interval / steps_per_report;
  res.dt = dt;

  SpectralState s = SpectralState::from(initial);
  s.rho[0] = 0.0;

  // data bound of the energy inequality and the size K0
  const double rho0_hk = detail::spectral_h(s.rho, 0.0, k), u0_hk = detail::vec_h(s.u, 0.0, k);
  const Spectrum phi0 = detail::potential(s.rho);
  const double inv_grad_rho0 = detail::spectral_h(s.rho, -1.0, 0.0);
  const double data_bound = rho0_hk * rho0_hk + u0_hk * u0_hk + inv_grad_rho0 * inv_grad_rho0;
  {
    VectorField grad_inv = gradient(phi0);
    const double lp = opt.zeta_p;
    res.k0 = norm(grad_inv, {.lebesgue = lp}) + norm(initial.u, {.lebesgue = lp}) + rho0_hk + u0_hk +
             detail::spectral_h(phi0, 1.0, 0.0);
  }

  double dissipation = 0.0;
  double prev_rate = detail::dissipation_rate(s, k);
  double prev_weighted = detail::weighted_energy(s, lin, k);
  double sup_N = 0.0, sup_K = 0.0;

  auto report = [&](const SpectralState& st) {
    EnergyReport r;
    r.t = st.t;
    const PerturbationState phys = st.physical();
    const Spectrum phi = detail::potential(st.rho);
    r.rho_hk = detail::spectral_h(st.rho, 0.0, k);
    r.u_hk = detail::vec_h(st.u, 0.0, k);
    r.grad_phi_l2 = detail::spectral_h(phi, 1.0, 0.0);
    r.dissipation = dissipation;
    r.energy_lhs = r.rho_hk * r.rho_hk + r.u_hk * r.u_hk + r.grad_phi_l2 * r.grad_phi_l2 + dissipation;
    r.energy_ratio = data_bound > 0.0 ? r.energy_lhs / data_bound : 0.0;
    r.weighted_energy = detail::weighted_energy(st, lin, k);
    for (double ell : {0.5, 1.5}) {
      const double a = detail::spectral_h(st.rho, ell, k - ell), b = detail::vec_h(st.u, ell, k - ell),
                   c = detail::spectral_h(phi, ell + 1.0, k - ell);
      (ell == 0.5 ? r.functional_half : r.functional_three_halves) = a * a + b * b + c * c;
    }
    double u_sup = 0.0;
    for (std::size_t i = 0; i < phys.rho.size(); ++i) {
      double m2 = 0.0;
      for (const Field& comp : phys.u) m2 += comp[i] * comp[i];
      u_sup = std::max(u_sup, std::sqrt(m2));
    }
    const double rho_sup = phys.rho.max_abs();
    const double rho_l2 = detail::spectral_h(st.rho, 0.0, 0.0), u_l2 = detail::vec_h(st.u, 0.0, 0.0);
    r.bootstrap_L = detail::spectral_h(st.rho, 0.5, 0.0) + detail::vec_h(st.u, 1.5, 0.0) + rho_sup + u_sup;
    r.bootstrap_M = detail::spectral_h(st.rho, 0.5, k - 0.5) + detail::vec_h(st.u, 1.5, k - 1.5);
    const double w = 1.0 + st.t;
    sup_N = std::max(sup_N, std::pow(w, res.zeta + 0.75) * (r.bootstrap_L + r.bootstrap_M) +
                                std::pow(w, res.zeta + 0.5) * rho_l2 + std::pow(w, res.zeta) * u_l2);
    r.bootstrap_N = sup_N;
    r.bootstrap_H = rho_l2 + detail::vec_h(st.u, 1.0, 0.0) + rho_sup + u_sup;
    r.bootstrap_J = detail::spectral_h(st.rho, 0.0, k) + detail::vec_h(st.u, 1.0, k - 1.0);
    sup_K = std::max(sup_K, std::pow(w, res.zeta + 0.5) * (r.bootstrap_H + r.bootstrap_J));
    r.bootstrap_K = sup_K;
    r.mass = phys.rho.mean();
    r.poisson_residual = l2_norm(laplacian(phys.phi) - phys.rho);
    r.min_total_density = model.min_total_density(phys.rho);
    res.reports.push_back(r);
    if (opt.keep_snapshots) res.snapshots.push_back(phys);
  };

  try {
    report(s);
    for (int rep = 1; rep <= n_reports; ++rep) {
      for (int j = 0; j < steps_per_report; ++j) {
        s = step(model, s, dt, opt.scheme, opt.form);
        ++res.steps;
        const double rate = detail::dissipation_rate(s, k);
        dissipation += 0.5 * dt * (rate + prev_rate);
        prev_rate = rate;
        const double weighted = detail::weighted_energy(s, lin, k);
        if (prev_weighted > 0.0)
          res.max_weighted_increase = std::max(res.max_weighted_increase, (weighted - prev_weighted) / prev_weighted);
        prev_weighted = weighted;
      }
      s.t = rep * opt.report_interval;
      report(s);
    }
    res.completed = true;
  } catch (const Error& e) {
    res.failure = e.what();
  }
  return res;
}

}  // namespace nsp
