#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nsp/thermo.hpp"

using namespace nsp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Composite Simpson rule: the independent quadrature oracle.
template <class F>
double simpson(F&& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("gamma = 2 enthalpy is linear", "[enthalpy]") {
  const PressureLaw law = PressureLaw::gamma_law(2.0);
  for (double z : {0.3, 1.0, 1.7, 4.0}) {
    CHECK_THAT(law.enthalpy(z), WithinAbs(2.0 * (z - 1.0), 1e-14));
    CHECK_THAT(law.enthalpy_prime(z), WithinAbs(2.0, 1e-14));
    CHECK_THAT(law.enthalpy_second(z), WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("enthalpy vanishes at one for every law", "[enthalpy]") {
  const PressureLaw laws[] = {PressureLaw::gamma_law(1.0), PressureLaw::gamma_law(1.4), PressureLaw::gamma_law(3.0, 2.5),
                              PressureLaw::polynomial({1.0, 0.5, 0.25, 0.125}),
                              PressureLaw::custom([](double s) { return 1.0 + s * s; }, [](double s) { return 2.0 * s; })};
  for (const auto& law : laws) CHECK(std::abs(law.enthalpy(1.0)) < 1e-15);
}

TEST_CASE("gamma = 5/3 closed form agrees with quadrature", "[enthalpy]") {
  const PressureLaw law = PressureLaw::gamma_law(5.0 / 3.0);
  const double oracle = simpson([&](double s) { return law.dp(s) / s; }, 1.0, 2.0, 2000);
  CHECK_THAT(law.enthalpy(2.0), WithinAbs(oracle, 1e-10));
  CHECK_THAT(law.enthalpy(2.0), WithinRel(2.5 * (std::pow(2.0, 2.0 / 3.0) - 1.0), 1e-14));
}

TEST_CASE("isothermal enthalpy is the logarithm", "[enthalpy]") {
  const PressureLaw law = PressureLaw::gamma_law(1.0);
  CHECK_THAT(law.enthalpy(3.0), WithinRel(std::log(3.0), 1e-15));
}

TEST_CASE("custom law enthalpy by adaptive quadrature", "[enthalpy]") {
  // p(s) = s + s^3/3 -> p'(s)/s = 1/s + s, h(z) = ln z + (z^2 - 1)/2
  const PressureLaw law = PressureLaw::custom([](double s) { return 1.0 + s * s; }, [](double s) { return 2.0 * s; });
  for (double z : {0.4, 1.3, 2.9}) CHECK_THAT(law.enthalpy(z), WithinAbs(std::log(z) + 0.5 * (z * z - 1.0), 1e-12));
}

TEST_CASE("nonpositive densities are rejected", "[enthalpy]") {
  const PressureLaw law = PressureLaw::gamma_law(1.4);
  CHECK_THROWS_AS(law.enthalpy(0.0), DomainError);
  CHECK_THROWS_AS(law.enthalpy_prime(-1.0), DomainError);
  CHECK_THROWS_AS(law.remainder(-2.0, 1.0), DomainError);
}

TEST_CASE("enthalpy is strictly increasing", "[enthalpy][property]") {
  for (const auto& law : {PressureLaw::gamma_law(1.0), PressureLaw::gamma_law(5.0 / 3.0), PressureLaw::gamma_law(3.0)}) {
    double prev = law.enthalpy(0.05);
    for (int i = 1; i <= 200; ++i) {
      const double h = law.enthalpy(0.05 + 0.02 * i);
      CHECK(h > prev);
      prev = h;
    }
  }
}

TEST_CASE("remainder of gamma = 2 vanishes identically", "[remainder]") {
  const PressureLaw law = PressureLaw::gamma_law(2.0);
  const Grid g(2, 8, 1.0);
  Field rho(g), rho_s(g, 1.0);
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 0.3 * std::sin(0.7 * i);
  CHECK(remainder(law, rho, rho_s).max_abs() == 0.0);
}

TEST_CASE("remainder of zero perturbation vanishes", "[remainder]") {
  const Grid g(1, 8, 1.0);
  const Field zero(g), rho_s(g, 1.3);
  CHECK(remainder(PressureLaw::gamma_law(1.4), zero, rho_s).max_abs() == 0.0);
  CHECK(remainder(PressureLaw::polynomial({0.0, 1.0, 1.0}), zero, rho_s).max_abs() == 0.0);
}

TEST_CASE("gamma = 3 remainder is h'' rho^2 / 2", "[remainder]") {
  const PressureLaw law = PressureLaw::gamma_law(3.0);
  CHECK_THAT(law.remainder(0.1, 1.0), WithinAbs(0.015, 1e-15));
  const double oracle = simpson([&](double s) { return law.enthalpy_second(s) * (1.1 - s); }, 1.0, 1.1, 200);
  CHECK_THAT(law.remainder(0.1, 1.0), WithinAbs(oracle, 1e-14));
}

TEST_CASE("Taylor identity of the remainder", "[remainder][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pert(-0.45, 0.45), base(0.5, 2.0);
  const PressureLaw laws[] = {PressureLaw::gamma_law(1.0), PressureLaw::gamma_law(1.4), PressureLaw::gamma_law(5.0 / 3.0),
                              PressureLaw::gamma_law(2.5, 0.7), PressureLaw::polynomial({0.0, 0.5, 0.25, 0.1})};
  for (int k = 0; k < 500; ++k) {
    const double x = pert(rng), rs = base(rng);
    for (const auto& law : laws) {
      const double lhs = law.enthalpy(rs + x) - law.enthalpy(rs) - law.enthalpy_prime(rs) * x;
      CHECK(std::abs(lhs - law.remainder(x, rs)) < 1e-12);
    }
  }
}

TEST_CASE("remainder is quadratically small", "[remainder][property]") {
  const PressureLaw laws[] = {PressureLaw::gamma_law(5.0 / 3.0), PressureLaw::gamma_law(1.0),
                              PressureLaw::polynomial({0.0, 1.0, 0.5, 0.2})};
  const Grid g(2, 16, 1.0);
  const Field shape = Field::from_function(g, [](const Point& x) { return std::sin(6.0 * x[0]) * std::cos(4.0 * x[1]); });
  const Field rho_s = Field::from_function(g, [](const Point& x) { return 1.0 + 0.2 * std::cos(6.283185307179586 * x[0]); });
  for (const auto& law : laws) {
    std::vector<double> ratios;
    for (double eps : {1e-2, 1e-3, 1e-4}) ratios.push_back(remainder(law, shape * eps, rho_s).max_abs() / (eps * eps));
    CHECK_THAT(ratios[1], WithinRel(ratios[0], 0.05));
    CHECK_THAT(ratios[2], WithinRel(ratios[1], 0.05));
  }
}

TEST_CASE("remainder field reports the violating grid index", "[remainder]") {
  const Grid g(1, 8, 1.0);
  Field rho(g), rho_s(g, 1.0);
  rho[5] = -1.5;
  try {
    (void)remainder(PressureLaw::gamma_law(1.4), rho, rho_s);
    FAIL("expected a positivity error");
  } catch (const PositivityError& e) {
    CHECK(e.index() == 5);
    CHECK_THAT(e.value(), WithinAbs(-0.5, 1e-15));
    CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("index 5"));
  }
}

TEST_CASE("fluid parameters enforce the viscosity conditions", "[params]") {
  FluidParams p;
  CHECK_NOTHROW(p.validate(0.5, 2.0));
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(0.5, 2.0), DomainError);
  p.mu = 1.0;
  p.mu_prime = -0.7;
  CHECK_THROWS_AS(p.validate(0.5, 2.0), DomainError);
  p.mu_prime = -2.0 / 3.0;
  CHECK_NOTHROW(p.validate(0.5, 2.0));
  p.law = PressureLaw::polynomial({0.0, -1.0, 0.5});  // p' = -1 + rho < 0 below 1
  CHECK_THROWS_AS(p.validate(0.5, 2.0), DomainError);
}

TEST_CASE("pressure law text form", "[params]") {
  const PressureLaw a = parse_pressure_law("gamma:1.4");
  CHECK(a.gamma().value() == 1.4);
  const PressureLaw b = parse_pressure_law("gamma:2,3");
  CHECK(b.kappa() == 3.0);
  const PressureLaw c = parse_pressure_law("poly:0,1,0.5");
  CHECK(c.coefficients().size() == 3);
  CHECK(parse_pressure_law(a.describe()).gamma().value() == 1.4);
  CHECK_THROWS_AS(parse_pressure_law("gamma"), DomainError);
  CHECK_THROWS_AS(parse_pressure_law("gamma:x"), DomainError);
  CHECK_THROWS_AS(parse_pressure_law("steam:1"), DomainError);
}
