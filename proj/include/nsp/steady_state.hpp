#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nsp/doping.hpp"
#include "nsp/norms.hpp"
#include "nsp/thermo.hpp"

namespace nsp {

struct SteadyOptions {
  double tol = 1e-12;          ///< H^2 size of the update at convergence
  int max_iter = 200;
  double relaxation = 1.0;     ///< initial damping, halved whenever the residual grows
  double min_relaxation = 1.0 / 1024.0;
  bool newton = false;
  double range_margin = 0.1;   ///< iterates must stay in [inf b - m, sup b + m], m = margin*(sup b - inf b)
  std::optional<Field> initial_deviation;  ///< starting f; zero when absent
};

/// Stationary solution with zero velocity: grad h(rho_s) = grad phi_s and
/// Delta phi_s = rho_s - b, with the mean-zero gauge for phi_s.
struct SteadyState {
  Field rho;
  Field phi;
  Field deviation;  ///< f = rho_s - rho_bar
  double rho_ref = 0.0;
  double residual_l2 = 0.0;
  int iterations = 0;
  std::vector<double> update_history;
  std::vector<double> residual_history;
  double final_relaxation = 1.0;
};

namespace detail {

/// div(h'(rho_bar + f) grad f) - f + (b - b_bar)
inline Field steady_residual(const PressureLaw& law, double rho_ref, const Field& f, const Field& b_dev) {
  const Spectrum fs = transform(f);
  VectorField flux = gradient(fs);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double hp = law.enthalpy_prime(rho_ref + f[i]);
    for (Field& c : flux) c[i] *= hp;
  }
  Field r = divergence(flux);
  r -= f;
  r += b_dev;
  return r;
}

/// Right-preconditioned restarted GMRES for A x = b on fields.
template <class Op, class Prec>
Field gmres(Op&& apply, Prec&& precondition, const Field& rhs, double rtol, int restart, int max_iter) {
  auto dot = [](const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  Field x(rhs.grid());
  if (rhs_norm == 0.0) return x;
  int total = 0;
  while (total < max_iter) {
    Field r = rhs - apply(precondition(x));
    double beta = std::sqrt(dot(r, r));
    if (beta <= rtol * rhs_norm) break;
    std::vector<Field> V{r * (1.0 / beta)};
    std::vector<std::vector<double>> H(restart + 1, std::vector<double>(restart, 0.0));
    std::vector<double> cs(restart), sn(restart), g(restart + 1, 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      Field w = apply(precondition(V[k]));
      for (int j = 0; j <= k; ++j) {
        H[j][k] = dot(w, V[j]);
        w.axpy(-H[j][k], V[j]);
      }
      H[k + 1][k] = std::sqrt(dot(w, w));
      V.push_back(H[k + 1][k] > 0.0 ? w * (1.0 / H[k + 1][k]) : w);
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -sn[j] * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const double denom = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = H[k][k] / denom;
      sn[k] = H[k + 1][k] / denom;
      H[k][k] = denom;
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= rtol * rhs_norm) {
        ++k;
        break;
      }
    }
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < k; ++i) x.axpy(y[i], V[i]);
    if (std::abs(g[k]) <= rtol * rhs_norm) break;
  }
  return precondition(x);
}

}  // namespace detail

/// Solves div(h'(rho_s) grad rho_s) = rho_s - b for rho_s = rho_bar + f.
///
/// Picard mode sweeps the constant-coefficient splitting
///   (-h'(rho_bar) Delta + I) f_new = div((h'(rho_s) - h'(rho_bar)) grad f) + b - b_bar
/// with one multiplier inversion per sweep; Newton mode linearizes the full
/// residual and solves each step with preconditioned GMRES. Both damp the
/// update and halve the damping when the residual grows.
inline SteadyState solve_steady(const FluidParams& params, const DopingProfile& doping,
                                const SteadyOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw DomainError("steady tolerance must be positive");
  const Grid& g = doping.grid();
  const PressureLaw& law = params.law;
  const double rho_ref = doping.mean();
  const double hp_ref = law.enthalpy_prime(rho_ref);
  const Field b_dev = doping.deviation();
  // absolute slack covers the rounding of the mean when the doping is flat
  const double spread = doping.sup() - doping.inf();
  const double slack = opt.range_margin * spread + 1e-12 * doping.sup();
  const double lo = doping.inf() - slack;
  const double hi = doping.sup() + slack;

  auto check_range = [&](const Field& f, int iteration) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double rho = rho_ref + f[i];
      if (!std::isfinite(rho) || rho < lo || rho > hi || rho <= 0.0)
        throw PositivityError("steady iterate " + std::to_string(iteration) +
                                  " left the admissible density range at grid index " + std::to_string(i),
                              i, rho);
    }
  };

  SteadyState ss;
  ss.rho_ref = rho_ref;
  if (doping.sup() == doping.inf()) {
    // constant doping is its own steady state; skip the round-off of b - mean(b)
    ss.rho_ref = doping.sup();
    ss.rho = Field(g, ss.rho_ref);
    ss.phi = Field(g);
    ss.deviation = Field(g);
    ss.residual_history.push_back(0.0);
    return ss;
  }
  Field f = opt.initial_deviation ? *opt.initial_deviation : Field(g);
  check_range(f, 0);
  Field res = detail::steady_residual(law, rho_ref, f, b_dev);
  double res_norm = l2_norm(res);
  ss.residual_history.push_back(res_norm);
  double omega = opt.relaxation;

  bool converged = res_norm < opt.tol;
  int it = 0;
  while (!converged) {
    if (it >= opt.max_iter) {
      throw ConvergenceError("steady solver did not converge in " + std::to_string(opt.max_iter) +
                                 " iterations (residual " + std::to_string(res_norm) + ")",
                             ss.residual_history);
    }
    ++it;
    Field direction(g);
    if (opt.newton) {
      const VectorField grad_f = gradient(f);
      Field hp(g), hpp(g);
      for (std::size_t i = 0; i < f.size(); ++i) {
        hp[i] = law.enthalpy_prime(rho_ref + f[i]);
        hpp[i] = law.enthalpy_second(rho_ref + f[i]);
      }
      auto jacobian = [&](const Field& d) {
        VectorField flux = gradient(d);
        for (std::size_t i = 0; i < d.size(); ++i)
          for (std::size_t a = 0; a < flux.size(); ++a) flux[a][i] = hp[i] * flux[a][i] + hpp[i] * d[i] * grad_f[a][i];
        Field out = divergence(flux);
        out -= d;
        return out;
      };
      auto precondition = [&](const Field& v) {
        return apply_multiplier(v, symbols::helmholtz_inverse(g, hp_ref)) * -1.0;
      };
      direction = detail::gmres(jacobian, precondition, res * -1.0, 1e-13, 60, 600);
    } else {
      VectorField flux = gradient(f);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double dh = law.enthalpy_prime(rho_ref + f[i]) - hp_ref;
        for (Field& c : flux) c[i] *= dh;
      }
      Field rhs = divergence(flux);
      rhs += b_dev;
      direction = apply_multiplier(rhs, symbols::helmholtz_inverse(g, hp_ref)) - f;
    }

    // damped update; halve the damping while the residual grows
    for (;;) {
      Field trial = f;
      trial.axpy(omega, direction);
      bool in_range = true;
      try {
        check_range(trial, it);
      } catch (const PositivityError&) {
        if (omega <= opt.min_relaxation) throw;
        in_range = false;
      }
      if (in_range) {
        Field trial_res = detail::steady_residual(law, rho_ref, trial, b_dev);
        const double trial_norm = l2_norm(trial_res);
        if (trial_norm <= std::max(res_norm * (1.0 + 1e-8), 10.0 * opt.tol) || omega <= opt.min_relaxation) {
          Field update = trial - f;
          const double step = sobolev_norm(update, 2.0);
          f = std::move(trial);
          res = std::move(trial_res);
          res_norm = trial_norm;
          ss.update_history.push_back(step);
          ss.residual_history.push_back(res_norm);
          converged = step < opt.tol;
          break;
        }
      }
      omega *= 0.5;
    }
  }

  ss.iterations = it;
  ss.final_relaxation = omega;
  ss.deviation = f;
  ss.rho = f;
  ss.rho += rho_ref;
  Field h = ss.rho.map([&](double r) { return law.enthalpy(r); });
  h += -h.mean();
  ss.phi = std::move(h);
  ss.residual_l2 = res_norm;
  return ss;
}

/// Diagnostics of a computed steady state.
struct SteadyReport {
  double inf_b = 0.0, sup_b = 0.0;
  double min_rho = 0.0, max_rho = 0.0;
  bool bounds_hold = false;          ///< inf b <= rho_s <= sup b up to 1e-8
  double grad_rho_hk = 0.0;          ///< ||grad rho_s||_{H^k}
  int sobolev_index = 2;
  double lebesgue_r = 2.0;
  double deviation_w2r = 0.0;        ///< ||rho_s - rho_bar||_{W^{2,r}}
  double doping_lr = 0.0;            ///< ||b - b_bar||_{L^r}
  double w2r_ratio = 0.0;
  double residual_l2 = 0.0;          ///< div(h'(rho_s) grad rho_s) - (rho_s - b)
  double potential_residual_l2 = 0.0;  ///< Delta phi_s - (rho_s - b)
  double mean_gap = 0.0;             ///< |mean rho_s - mean b|
};

inline SteadyReport verify_steady(const SteadyState& ss, const DopingProfile& doping, const FluidParams& params,
                                  int sobolev_index = 2, double lebesgue_r = 2.0) {
  SteadyReport rep;
  rep.inf_b = doping.inf();
  rep.sup_b = doping.sup();
  rep.min_rho = ss.rho.min();
  rep.max_rho = ss.rho.max();
  rep.bounds_hold = rep.min_rho >= rep.inf_b - 1e-8 && rep.max_rho <= rep.sup_b + 1e-8;
  rep.sobolev_index = sobolev_index;
  rep.lebesgue_r = lebesgue_r;
  rep.grad_rho_hk = norm(ss.rho, {.order = 1.0, .sobolev = static_cast<double>(sobolev_index)});
  rep.deviation_w2r = norm(ss.deviation, {.sobolev = 2.0, .lebesgue = lebesgue_r});
  rep.doping_lr = norm(doping.deviation(), {.lebesgue = lebesgue_r});
  rep.w2r_ratio = rep.doping_lr == 0.0 ? 0.0 : rep.deviation_w2r / rep.doping_lr;
  rep.residual_l2 = l2_norm(detail::steady_residual(params.law, ss.rho_ref, ss.deviation, doping.deviation()));
  Field pot = laplacian(ss.phi) - (ss.rho - doping.values());
  rep.potential_residual_l2 = l2_norm(pot);
  rep.mean_gap = std::abs(ss.rho.mean() - doping.values().mean());
  return rep;
}

}  // namespace nsp
