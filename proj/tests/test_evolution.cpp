#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "nsp/evolution.hpp"
#include "nsp/oracles.hpp"

using namespace nsp;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

FluidParams params_with(double gamma, double mu = 0.5) {
  FluidParams p;
  p.law = PressureLaw::gamma_law(gamma);
  p.mu = mu;
  return p;
}

Point center(const Grid& g) {
  Point c{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) c[a] = 0.5 * g.length();
  return c;
}

SteadyState flat_steady(const Grid& g, const FluidParams& p) { return solve_steady(p, DopingProfile::flat(g, 1.0)); }

SteadyState bump_steady(const Grid& g, const FluidParams& p, double amp = 0.1) {
  return solve_steady(p, DopingProfile::gaussian_bump(g, 1.0, amp, center(g), 1.0));
}

/// Largest modulus over all spectral coefficients of a state.
double sup(const SpectralState& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    m = std::max(m, std::abs(s.rho[i]));
    for (const Spectrum& c : s.u) m = std::max(m, std::abs(c[i]));
  }
  return m;
}

SpectralState difference(SpectralState a, const SpectralState& b) {
  a.axpy(-1.0, b);
  return a;
}

double l2(const SpectralState& s) {
  const PerturbationState p = s.physical();
  double sum = std::pow(l2_norm(p.rho), 2);
  for (const Field& c : p.u) sum += std::pow(l2_norm(c), 2);
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("zero perturbation is an equilibrium", "[evolution]") {
  const Grid g(2, 32, 2.0 * kPi);
  const FluidParams p = params_with(5.0 / 3.0);
  const PerturbationModel model(bump_steady(g, p), p);
  SpectralState s = SpectralState::from(PerturbationState::zero(g));
  for (int i = 0; i < 1000; ++i) s = step(model, s, 0.01, TimeScheme::exponential_midpoint);
  CHECK(sup(s) == 0.0);
  CHECK_THAT(s.t, WithinAbs(10.0, 1e-9));
}

TEST_CASE("the two arrangements of the equations agree", "[evolution][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  const FluidParams p = params_with(5.0 / 3.0);
  const PerturbationState data = random_smooth_data(g, 3, 1e-2, 4);
  {
    const PerturbationModel model(flat_steady(g, p), p);
    const SpectralState s = SpectralState::from(data);
    const SpectralState a = model.rhs(s, RhsForm::variable), b = model.rhs(s, RhsForm::constant);
    CHECK(sup(difference(a, b)) < 1e-12 * std::max(1.0, sup(a)));
  }
  {
    const PerturbationModel model(bump_steady(g, p), p);
    const SpectralState s = SpectralState::from(data);
    const SpectralState a = model.rhs(s, RhsForm::variable), b = model.rhs(s, RhsForm::constant);
    CHECK(sup(difference(a, b)) < 1e-10 * std::max(1.0, sup(a)));
  }
}

TEST_CASE("linear part matches the full symbol on a single mode", "[evolution][oracle]") {
  const Grid g(3, 16, 2.0 * kPi);
  const FluidParams p = params_with(2.0);
  const PerturbationModel model(flat_steady(g, p), p);
  const LinearCoefficients c = model.linear_coefficients();
  // density and velocity both excited on the mode (1, 2, 0)
  const ModeIndex m{1, 2, 0};
  const double eps = 1e-6;
  Field rho = Field::from_function(g, [&](const Point& x) { return eps * std::cos(x[0] + 2.0 * x[1]); });
  VectorField u(3, Field(g));
  u[0] = Field::from_function(g, [&](const Point& x) { return eps * std::sin(x[0] + 2.0 * x[1]); });
  u[2] = Field::from_function(g, [&](const Point& x) { return eps * std::cos(x[0] + 2.0 * x[1]); });
  const SpectralState s = SpectralState::from(PerturbationState::from(rho, u));

  bool conj = false;
  const std::size_t idx = g.spectral_index(m, conj);
  REQUIRE_FALSE(conj);
  const auto sym = oracle::full_symbol(g.wavevector(idx), 3, c);
  std::vector<Complex> v{s.rho[idx], s.u[0][idx], s.u[1][idx], s.u[2][idx]};
  std::vector<Complex> expect(4, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int q = 0; q < 4; ++q) expect[r] += sym[r][q] * v[q];

  const SpectralState lin = model.linear(s);
  CHECK(std::abs(lin.rho[idx] - expect[0]) < 1e-12 * std::abs(expect[0]) + 1e-20);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(lin.u[a][idx] - expect[a + 1]) < 1e-12 * eps * 10.0);

  // the full right-hand side differs from the linear action only quadratically
  const SpectralState full = model.rhs(s, RhsForm::constant);
  CHECK(sup(difference(full, lin)) < 10.0 * eps * eps * g.size());
}

TEST_CASE("nonlinear terms scale quadratically", "[evolution][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  const FluidParams p = params_with(5.0 / 3.0);
  const PerturbationModel model(flat_steady(g, p), p);
  const PerturbationState shape = random_smooth_data(g, 5, 1.0, 3);
  std::vector<double> sizes;
  for (double eps : {1e-3, 5e-4}) {
    PerturbationState d = shape;
    d.rho *= eps;
    for (Field& c : d.u) c *= eps;
    sizes.push_back(l2(model.nonlinear(SpectralState::from(d))));
  }
  CHECK_THAT(sizes[0] / sizes[1], WithinAbs(4.0, 1.2));
}

TEST_CASE("steps converge at second order", "[evolution]") {
  const Grid g(2, 32, 2.0 * kPi);
  const FluidParams p = params_with(5.0 / 3.0);
  const PerturbationModel model(bump_steady(g, p), p);
  const SpectralState s0 = SpectralState::from(random_smooth_data(g, 7, 0.1, 4));
  auto run = [&](double dt) {
    SpectralState s = s0;
    const int n = static_cast<int>(std::llround(0.5 / dt));
    for (int i = 0; i < n; ++i) s = step(model, s, dt, TimeScheme::exponential_midpoint);
    return s;
  };
  const SpectralState ref = run(0.5 / 512), a = run(0.5 / 32), b = run(0.5 / 64);
  const double ratio = l2(difference(a, ref)) / l2(difference(b, ref));
  CHECK_THAT(ratio, WithinAbs(4.0, 0.8));
}

TEST_CASE("explicit and exponential schemes agree on a short run", "[evolution]") {
  const Grid g(2, 16, 2.0 * kPi);
  const FluidParams p = params_with(2.0);
  const PerturbationModel model(bump_steady(g, p), p);
  SpectralState a = SpectralState::from(random_smooth_data(g, 9, 1e-2, 3)), b = a;
  for (int i = 0; i < 200; ++i) {
    a = step(model, a, 1e-3, TimeScheme::exponential_midpoint);
    b = step(model, b, 1e-3, TimeScheme::explicit_midpoint, RhsForm::variable);
  }
  CHECK(l2(difference(a, b)) < 1e-5 * l2(a));
}

TEST_CASE("zero data evolves to all-zero reports", "[evolve]") {
  const Grid g(2, 16, 2.0 * kPi);
  const FluidParams p = params_with(2.0);
  EvolveOptions o;
  o.t_end = 0.5;
  const EvolveResult r = evolve(PerturbationState::zero(g), bump_steady(g, p), p, o);
  REQUIRE(r.completed);
  REQUIRE(r.reports.size() == 6);
  for (const EnergyReport& e : r.reports) {
    CHECK(e.rho_hk == 0.0);
    CHECK(e.u_hk == 0.0);
    CHECK(e.dissipation == 0.0);
    CHECK(e.energy_ratio == 0.0);
    CHECK(e.bootstrap_N == 0.0);
  }
}

TEST_CASE("mass, Poisson relation and dissipation are tracked", "[evolve][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  const FluidParams p = params_with(5.0 / 3.0);
  EvolveOptions o;
  o.t_end = 1.0;
  const EvolveResult r = evolve(random_smooth_data(g, 11, 1e-3, 4), bump_steady(g, p), p, o);
  REQUIRE(r.completed);
  REQUIRE(r.reports.size() == 11);
  double prev = -1.0;
  for (const EnergyReport& e : r.reports) {
    CHECK(std::abs(e.mass) < 1e-12);
    CHECK(e.poisson_residual < 1e-10);
    CHECK(e.dissipation >= prev);
    CHECK(e.energy_ratio <= 50.0);
    CHECK(e.min_total_density > 0.0);
    prev = e.dissipation;
  }
  CHECK(r.reports.back().rho_hk < r.reports.front().rho_hk);
}

TEST_CASE("weighted energy does not grow for tiny data on a flat background", "[evolve][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  const FluidParams p = params_with(2.0);
  EvolveOptions o;
  o.t_end = 1.0;
  const EvolveResult r = evolve(random_smooth_data(g, 13, 1e-9, 4), flat_steady(g, p), p, o);
  REQUIRE(r.completed);
  CHECK(r.max_weighted_increase < 1e-8);
  CHECK(r.reports.back().weighted_energy < r.reports.front().weighted_energy);
}

TEST_CASE("loss of positivity ends the run with a diagnosis", "[evolve]") {
  const Grid g(2, 16, 2.0 * kPi);
  const FluidParams p = params_with(1.4);
  EvolveOptions o;
  o.t_end = 1.0;
  const EvolveResult r = evolve(mode_data(g, {1, 0, 0}, 1.5), flat_steady(g, p), p, o);
  CHECK_FALSE(r.completed);
  CHECK(r.reports.size() == 1);
  CHECK_THAT(r.failure, ContainsSubstring("positivity"));
}

TEST_CASE("report times must divide the horizon", "[evolve]") {
  const Grid g(2, 16, 2.0 * kPi);
  const FluidParams p = params_with(2.0);
  EvolveOptions o;
  o.t_end = 1.0;
  o.report_interval = 0.3;
  CHECK_THROWS_AS(evolve(PerturbationState::zero(g), flat_steady(g, p), p, o), DomainError);
  CHECK_THROWS_AS(step(PerturbationState::zero(g), flat_steady(g, p), p, 0.0), DomainError);
}
