#pragma once

// The acceptance suite: six criteria, each a list of measured checks with
// pinned thresholds. Shared by the `verify` subcommand and the acceptance
// test binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "nsp/doping.hpp"
#include "nsp/evolution.hpp"
#include "nsp/linear_decay.hpp"
#include "nsp/norms.hpp"
#include "nsp/oracles.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/steady_state.hpp"
#include "nsp/targets.hpp"

namespace nsp::acceptance {

struct Check {
  std::string name;
  double value = 0.0;
  std::string bound;  ///< human-readable threshold, e.g. "< 1e-12"
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  std::string error;  ///< set when the criterion threw before finishing

  bool pass() const {
    if (!error.empty() || checks.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  /// One line: status, id, title, every measured value with its bound.
  std::string line() const {
    std::string s = std::string(pass() ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " (" + title + "):";
    char buf[160];
    for (const auto& c : checks) {
      std::snprintf(buf, sizeof buf, " %s%s=%.6g [%s];", c.pass ? "" : "!", c.name.c_str(), c.value, c.bound.c_str());
      s += buf;
    }
    if (!error.empty()) s += " error: " + error + ";";
    std::snprintf(buf, sizeof buf, " %.1fs", seconds);
    return s + buf;
  }
};

namespace detail {

inline Check below(std::string name, double value, double limit, const char* fmt = "< %g") {
  char b[64];
  std::snprintf(b, sizeof b, fmt, limit);
  return {std::move(name), value, b, value < limit};
}

inline Check within(std::string name, double value, double target, double tol) {
  char b[96];
  std::snprintf(b, sizeof b, "%.6g +- %g", target, tol);
  return {std::move(name), value, b, std::abs(value - target) <= tol};
}

inline Check truth(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, "== 1", ok}; }

template <class Body>
CriterionResult run(int id, std::string title, Body&& body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r.checks);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Linear coefficients of the decay experiments: rho_bar = 1, h' = 2, mu = 1, mu' = 0.
inline LinearCoefficients decay_coefficients() { return {1.0, 2.0, 1.0, 0.0}; }

inline FluidParams evolution_params() {
  FluidParams p;
  p.law = PressureLaw::gamma_law(5.0 / 3.0);
  p.mu = 0.5;
  p.mu_prime = 0.0;
  return p;
}

inline Point box_center(const Grid& g) {
  Point c{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) c[a] = 0.5 * g.length();
  return c;
}

}  // namespace detail

/// 1. Linear decay exponents of the p = 1, q = 2 surrogate over t in [1e2, 1e4].
inline CriterionResult linear_decay_rates() {
  return detail::run(1, "linear decay rates", [](std::vector<Check>& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const LinearCoefficients c = detail::decay_coefficients();
    const std::vector<double> times = log_times(1e2, 1e4, 60);
    struct Row {
      const char* name;
      Component comp;
      double ell;
      double target;
    };
    const Row rows[] = {{"velocity", Component::velocity, 0.0, -0.75},
                        {"density", Component::density, 0.0, -1.25},
                        {"grad^1/2 density", Component::density, 0.5, -1.50},
                        {"grad^3/2 velocity", Component::velocity, 1.5, -1.50}};
    for (const Row& row : rows) {
      const LinearDecayQuery q{row.ell, 2.0, row.comp, SpectralProfile{1.0, "gaussian"}};
      const ExponentFit fit = fit_exponent(decay_curve(c, q, times), 1e2, 1e4);
      out.push_back(detail::within(std::string(row.name) + " slope", fit.slope, row.target, 0.05));
    }
    out.push_back(detail::below("runtime_s", detail::elapsed(t0), 60.0));
  });
}

/// 2. Exponent table of the nonlinear decay theorem, exact formula match.
inline CriterionResult exponent_table() {
  return detail::run(2, "nonlinear exponent table", [](std::vector<Check>& out) {
    const double r1 = kDopingIndexLimitOne;
    out.push_back(detail::within("density p=1 r->1+", theorem_exponent(TheoremNorm::density, 0.0, 1.0, r1), -1.25, 1e-12));
    out.push_back(detail::within("velocity p=1 r->1+", theorem_exponent(TheoremNorm::velocity, 0.0, 1.0, r1), -0.75, 1e-12));
    out.push_back(detail::within("linf p=1 r->1+", theorem_exponent(TheoremNorm::sup, 0.0, 1.0, r1), -1.5, 1e-12));
    const double expected = -1.5 * (1.0 / 1.4 - 0.5) - 0.5;
    out.push_back(detail::within("density p=r=1.4", theorem_exponent(TheoremNorm::density, 0.0, 1.4, 1.4), expected, 1e-12));
  });
}

/// 3. Steady state for Gaussian-bump doping, gamma = 2.
inline CriterionResult steady_state(int n = 64, int dim = 3) {
  return detail::run(3, "steady state", [=](std::vector<Check>& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g(dim, n, 2.0 * std::numbers::pi);
    FluidParams p;
    p.law = PressureLaw::gamma_law(2.0);
    const double r = 1.25;
    std::vector<double> grads, ratios;
    double worst_res = 0.0;
    bool bounds = true;
    for (double amp : {0.1, 0.05, 0.025}) {
      const DopingProfile b = DopingProfile::gaussian_bump(g, 1.0, amp, detail::box_center(g), 1.0);
      const SteadyState ss = solve_steady(p, b);
      const SteadyReport rep = verify_steady(ss, b, p, 2, r);
      worst_res = std::max(worst_res, rep.residual_l2);
      bounds = bounds && rep.bounds_hold;
      grads.push_back(rep.grad_rho_hk);
      ratios.push_back(rep.w2r_ratio);
    }
    out.push_back(detail::below("max residual_l2", worst_res, 1e-10));
    out.push_back(detail::truth("pointwise bounds", bounds));
    out.push_back(detail::within("H2 halving 0.05/0.1", grads[1] / grads[0], 0.5, 0.05));
    out.push_back(detail::within("H2 halving 0.025/0.05", grads[2] / grads[1], 0.5, 0.05));
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    out.push_back(detail::below("W2r/Lr spread max/min-1", hi / lo - 1.0, 0.2, "<= %g"));
    out.push_back(detail::below("runtime_s", detail::elapsed(t0), 120.0));
  });
}

/// 4. Fast paths against independent oracles.
inline CriterionResult oracle_equivalences() {
  return detail::run(4, "oracle equivalences", [](std::vector<Check>& out) {
    // 2x2 mode exponential on a 50 x 50 (xi, t) sample
    const LinearCoefficients c{1.0, 2.0, 1.0, 0.0};
    double err2 = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double xi = std::pow(10.0, -2.0 + 4.0 * i / 49.0);
      for (int j = 0; j < 50; ++j) {
        const double t = std::pow(10.0, -2.0 + 4.0 * j / 49.0);
        auto a = oracle::compressible_block(xi, c);
        for (auto& row : a)
          for (auto& v : row) v *= t;
        const auto ref = oracle::expm(a);
        const Mat2 e = mode_exponential(ModeSymbol(xi, c), t).compressible;
        const double got[2][2] = {{e.a11, e.a12}, {e.a21, e.a22}};
        for (int r = 0; r < 2; ++r)
          for (int q = 0; q < 2; ++q) err2 = std::max(err2, std::abs(got[r][q] - static_cast<double>(ref[r][q])));
      }
    }
    out.push_back(detail::below("mode_exponential vs expm", err2, 1e-10));

    // Hodge-split propagation vs the full (1+d)x(1+d) symbol
    const Grid g(3, 16, 2.0 * std::numbers::pi);
    FluidParams params;
    params.law = PressureLaw::gamma_law(5.0 / 3.0);
    params.mu = 0.7;
    params.mu_prime = 0.3;
    const SteadyState flat = solve_steady(params, DopingProfile::flat(g, 1.0));
    const PerturbationModel model(flat, params);
    SpectralState s = SpectralState::from(random_smooth_data(g, 3, 1.0, 5));
    const SpectralState s0 = s;
    const double t = 0.7;
    model.propagate(s, t);
    const LinearCoefficients lc = model.linear_coefficients();
    double errd = 0.0, scale = 0.0;
    for (std::size_t i = 1; i < s.rho.size(); ++i) {
      if (g.is_nyquist(g.mode(i))) continue;
      auto m = oracle::full_symbol(g.wavevector(i), 3, lc);
      for (auto& row : m)
        for (auto& v : row) v *= t;
      const auto e = oracle::expm(m);
      std::vector<Complex> x{s0.rho[i], s0.u[0][i], s0.u[1][i], s0.u[2][i]};
      std::vector<Complex> y{s.rho[i], s.u[0][i], s.u[1][i], s.u[2][i]};
      for (int r = 0; r < 4; ++r) {
        Complex acc = 0.0;
        for (int q = 0; q < 4; ++q) acc += e[r][q] * x[q];
        errd = std::max(errd, std::abs(acc - y[r]));
        scale = std::max(scale, std::abs(x[r]));
      }
    }
    out.push_back(detail::below("hodge split vs full symbol (rel)", errd / scale, 1e-10));

    // Taylor identity of the remainder and its vanishing for gamma = 2
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pert(-0.4, 0.4), base(0.6, 1.6);
    double taylor = 0.0, gamma2 = 0.0;
    const PressureLaw laws[] = {PressureLaw::gamma_law(5.0 / 3.0), PressureLaw::gamma_law(1.4),
                                PressureLaw::polynomial({0.0, 0.5, 0.25, 0.1})};
    const PressureLaw two = PressureLaw::gamma_law(2.0);
    for (int k = 0; k < 2000; ++k) {
      const double x = pert(rng), rs = base(rng);
      for (const PressureLaw& law : laws) {
        const double lhs = law.enthalpy(x + rs) - law.enthalpy(rs) - law.enthalpy_prime(rs) * x;
        taylor = std::max(taylor, std::abs(lhs - law.remainder(x, rs)));
      }
      gamma2 = std::max(gamma2, std::abs(two.remainder(x, rs)));
    }
    out.push_back(detail::below("remainder taylor identity", taylor, 1e-12));
    out.push_back(detail::below("gamma=2 remainder", gamma2, 1e-15, "<= %g"));
  });
}

/// 5. Nonlinear evolution properties on a 32^3 grid.
inline CriterionResult nonlinear_properties(int n = 32, double t_end = 50.0) {
  return detail::run(5, "nonlinear evolution", [=](std::vector<Check>& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g(3, n, 2.0 * std::numbers::pi);
    const FluidParams p = detail::evolution_params();
    const SteadyState flat = solve_steady(p, DopingProfile::flat(g, 1.0));
    const SteadyState bump =
        solve_steady(p, DopingProfile::gaussian_bump(g, 1.0, 0.1, detail::box_center(g), 1.0));

    // long small-data run: mass, Poisson, energy inequality, bootstrap growth
    EvolveOptions opt;
    opt.t_end = t_end;
    opt.report_interval = 1.0;
    const EvolveResult res = evolve(random_smooth_data(g, 11, 1e-3, 4), bump, p, opt);
    double mass = 0.0, poisson = 0.0, ratio = 0.0;
    for (const auto& r : res.reports) {
      mass = std::max(mass, std::abs(r.mass));
      poisson = std::max(poisson, r.poisson_residual);
      ratio = std::max(ratio, r.energy_ratio);
    }
    out.push_back(detail::truth("completed", res.completed));
    out.push_back(detail::below("max |mean rho|", mass, 1e-12));
    out.push_back(detail::below("max poisson residual", poisson, 1e-10));
    out.push_back(detail::below("energy ratio (calibrated)", ratio, 50.0, "<= %g"));
    const double growth = res.reports.back().bootstrap_N / res.reports.front().bootstrap_N;
    out.push_back(detail::below("bootstrap N final/initial", std::isfinite(growth) ? growth : 1e300, 10.0));

    // linear consistency: discrepancy to the exact linear flow scales like eps^2
    const PerturbationModel mf(flat, p);
    std::vector<double> le, ld;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      SpectralState s = SpectralState::from(mode_data(g, {1, 0, 0}, eps));
      SpectralState lin = s;
      for (int i = 0; i < 100; ++i) s = step(mf, s, 0.01, TimeScheme::exponential_midpoint);
      mf.propagate(lin, 1.0);
      const PerturbationState a = s.physical(), b = lin.physical();
      double d2 = std::pow(l2_norm(a.rho - b.rho), 2);
      for (int k = 0; k < 3; ++k) d2 += std::pow(l2_norm(a.u[k] - b.u[k]), 2);
      le.push_back(std::log(eps));
      ld.push_back(0.5 * std::log(d2));
    }
    const double slope = (3 * (le[0] * ld[0] + le[1] * ld[1] + le[2] * ld[2]) -
                          (le[0] + le[1] + le[2]) * (ld[0] + ld[1] + ld[2])) /
                         (3 * (le[0] * le[0] + le[1] * le[1] + le[2] * le[2]) - std::pow(le[0] + le[1] + le[2], 2));
    out.push_back(detail::within("linear consistency order", slope, 2.0, 0.1));

    // dt halving: Richardson self-comparison over t = 0.5
    const PerturbationModel mb(bump, p);
    const SpectralState data = SpectralState::from(random_smooth_data(g, 7, 1e-1, 4));
    auto run = [&](double dt) {
      SpectralState s = data;
      const int steps = static_cast<int>(std::lround(0.5 / dt));
      for (int i = 0; i < steps; ++i) s = step(mb, s, dt, TimeScheme::exponential_midpoint);
      return s.physical();
    };
    const PerturbationState c1 = run(0.025), c2 = run(0.0125), c3 = run(0.00625);
    auto diff = [](const PerturbationState& a, const PerturbationState& b) {
      double d2 = std::pow(l2_norm(a.rho - b.rho), 2);
      for (std::size_t k = 0; k < a.u.size(); ++k) d2 += std::pow(l2_norm(a.u[k] - b.u[k]), 2);
      return std::sqrt(d2);
    };
    out.push_back(detail::within("dt halving error ratio", diff(c1, c2) / diff(c2, c3), 4.0, 0.8));
    out.push_back(detail::below("runtime_s", detail::elapsed(t0), 600.0));
  });
}

/// 6. Spectral-core identities.
inline CriterionResult spectral_properties() {
  return detail::run(6, "spectral core", [](std::vector<Check>& out) {
    const Grid g(3, 16, 2.0 * std::numbers::pi);
    std::mt19937_64 rng(17);
    double parseval = 0.0, composition = 0.0, gn = 0.0;
    std::uniform_real_distribution<double> order(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
      const Field f = nsp::detail::random_band_field(g, rng, 5, true);
      // Parseval: grid quadrature against the mode sum
      double grid_sum = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) grid_sum += f[i] * f[i];
      grid_sum *= g.cell_volume();
      const Spectrum s = transform(f);
      double mode_sum = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) mode_sum += g.multiplicity(i) * std::norm(s[i]);
      mode_sum *= g.volume();
      parseval = std::max(parseval, std::abs(grid_sum - mode_sum) / grid_sum);
      // composition of multipliers
      const double a = order(rng), b = order(rng);
      const Spectrum two = apply_multiplier(apply_multiplier(s, symbols::fractional(a)), symbols::fractional(b));
      const Spectrum one = apply_multiplier(s, [&](const Wavevector& w) {
        return symbols::fractional(a)(w) * symbols::fractional(b)(w);
      });
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        num = std::max(num, std::abs(two[i] - one[i]));
        den = std::max(den, std::abs(one[i]));
      }
      composition = std::max(composition, num / den);
      // interpolation inequality with random orders beta < alpha < gamma
      double lo = order(rng), hi = order(rng);
      if (lo > hi) std::swap(lo, hi);
      hi += 0.25;
      const double mid = lo + (hi - lo) * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      gn = std::max(gn, gn_interpolation_check(f, mid, lo, hi).ratio);
    }
    out.push_back(detail::below("parseval rel err", parseval, 1e-12));
    out.push_back(detail::below("multiplier composition rel err", composition, 1e-14));
    out.push_back(detail::below("GN p=2 max ratio", gn, 1.0 + 1e-12, "<= 1+1e-12"));
  });
}

/// Runs the selected criteria (all when `only` is empty) and streams one line each.
inline std::vector<CriterionResult> run_all(std::ostream* log = nullptr, const std::vector<int>& only = {}) {
  const std::vector<std::function<CriterionResult()>> all{
      linear_decay_rates, exponent_table, [] { return steady_state(); }, oracle_equivalences,
      [] { return nonlinear_properties(); }, spectral_properties};
  std::vector<CriterionResult> results;
  for (int id = 1; id <= static_cast<int>(all.size()); ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    results.push_back(all[id - 1]());
    if (log) *log << results.back().line() << std::endl;
  }
  return results;
}

}  // namespace nsp::acceptance
