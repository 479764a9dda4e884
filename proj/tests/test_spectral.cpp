#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "nsp/field_io.hpp"
#include "nsp/norms.hpp"
#include "nsp/perturbation.hpp"
#include "nsp/spectral.hpp"

using namespace nsp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Field random_field(const Grid& g, std::uint64_t seed, int band, bool zero_mean = true) {
  std::mt19937_64 rng(seed);
  return nsp::detail::random_band_field(g, rng, band, zero_mean);
}

double max_diff(const Field& a, const Field& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("grid validates its shape", "[grid]") {
  CHECK_THROWS_AS(Grid(4, 16, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(2, 12, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(2, 4, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(2, 16, 0.0), DomainError);
  const Grid g(3, 16, 2.0 * kPi);
  CHECK(g.size() == 16 * 16 * 16);
  CHECK(g.spectral_size() == 16 * 16 * 9);
  CHECK_THAT(g.wavenumber_unit(), WithinRel(1.0, 1e-15));
}

TEST_CASE("wavenumbers cover [-n/2, n/2)", "[grid]") {
  const Grid g(2, 8, 2.0 * kPi);
  int lo = 100, hi = -100;
  for (std::size_t i = 0; i < g.spectral_size(); ++i)
    for (int a = 0; a < 2; ++a) {
      lo = std::min(lo, g.mode(i)[a]);
      hi = std::max(hi, g.mode(i)[a]);
    }
  CHECK(lo == -4);
  CHECK(hi == 3);
}

TEST_CASE("transform of a constant has only the zero mode", "[transform]") {
  const Grid g(3, 8, 1.0);
  const Spectrum s = transform(Field(g, 2.5));
  CHECK_THAT(s.zero_mode().real(), WithinAbs(2.5, 1e-15));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) < 1e-15);
}

TEST_CASE("cosine has two symmetric modes of weight one half", "[transform]") {
  const double L = 3.0;
  const Grid g(2, 16, L);
  const Field f = Field::from_function(g, [&](const Point& x) { return std::cos(2.0 * kPi * x[0] / L); });
  const Spectrum s = transform(f);
  CHECK_THAT(s.coefficient({1, 0, 0}).real(), WithinAbs(0.5, 1e-14));
  CHECK_THAT(s.coefficient({-1, 0, 0}).real(), WithinAbs(0.5, 1e-14));
  double rest = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto m = g.mode(i);
    if (std::abs(m[0]) == 1 && m[1] == 0) continue;
    rest = std::max(rest, std::abs(s[i]));
  }
  CHECK(rest < 1e-14);
}

TEST_CASE("round trip reproduces values", "[transform]") {
  for (int dim : {1, 2, 3}) {
    const Grid g(dim, 16, 2.0);
    const Field f = random_field(g, 10 + dim, 7, false);
    CHECK(max_diff(inverse_transform(transform(f)), f) <= 1e-12 * f.max_abs());
  }
}

TEST_CASE("non-finite input is rejected", "[transform]") {
  const Grid g(1, 8, 1.0);
  Field f(g);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(transform(f), DomainError);
}

TEST_CASE("Parseval against grid quadrature", "[transform][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Field f = random_field(g, seed, 5, false);
    double quad = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) quad += f[i] * f[i];
    quad *= g.cell_volume();
    CHECK_THAT(std::pow(l2_norm(f), 2), WithinRel(quad, 1e-12));
  }
}

TEST_CASE("Laplacian of a cosine is an eigenvalue", "[multiplier]") {
  const double L = 5.0;
  const Grid g(2, 16, L);
  const Field f = Field::from_function(g, [&](const Point& x) { return std::cos(2.0 * kPi * x[1] / L); });
  const double k = 2.0 * kPi / L;
  CHECK(max_diff(laplacian(f), f * (-k * k)) < 1e-12);
}

TEST_CASE("inverse Laplacian undoes the Laplacian on mean-zero fields", "[multiplier]") {
  const Grid g(3, 16, 2.0 * kPi);
  const Field f = random_field(g, 4, 5);
  CHECK(max_diff(inverse_laplacian(laplacian(f)), f) < 1e-12 * f.max_abs());
}

TEST_CASE("singular symbols require mean zero", "[multiplier]") {
  const Grid g(2, 8, 1.0);
  const Field f = random_field(g, 1, 2) + 1.0;
  CHECK_THROWS_AS(inverse_laplacian(f), MeanZeroError);
  CHECK_THROWS_WITH(inverse_laplacian(f), Catch::Matchers::ContainsSubstring("mean-zero required"));
  CHECK_THROWS_AS(norm(f, {.order = -1.0}), MeanZeroError);
  // explicit projection is allowed
  CHECK_NOTHROW(apply_multiplier(f, symbols::inverse_laplacian(), ZeroMode::project));
}

TEST_CASE("half derivative twice equals one derivative magnitude", "[multiplier]") {
  const Grid g(3, 16, 2.0 * kPi);
  const Field f = random_field(g, 8, 6);
  const Field twice = fractional_derivative(fractional_derivative(f, 0.5), 0.5);
  CHECK(max_diff(twice, fractional_derivative(f, 1.0)) < 1e-12 * f.max_abs() * 10);
}

TEST_CASE("gradient divergence and Laplacian symbols agree off Nyquist", "[multiplier]") {
  const Grid g(3, 16, 2.0 * kPi);
  const Field f = random_field(g, 9, 5);
  CHECK(max_diff(divergence(gradient(f)), laplacian(f)) < 1e-11 * laplacian(f).max_abs());
}

TEST_CASE("multiplier composition is exact", "[multiplier][property]") {
  const Grid g(2, 32, 2.0 * kPi);
  const Spectrum s = transform(random_field(g, 12, 10));
  const Spectrum two = apply_multiplier(apply_multiplier(s, symbols::fractional(0.7)), symbols::fractional(1.9));
  const Spectrum one = apply_multiplier(s, [](const Wavevector& k) {
    return symbols::fractional(0.7)(k) * symbols::fractional(1.9)(k);
  });
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(two[i] - one[i]) <= 1e-15 * (1.0 + std::abs(one[i])));
}

TEST_CASE("negative order norm of a sine scales by L/2pi", "[norm]") {
  const double L = 4.0;
  const Grid g(1, 32, L);
  const Field f = Field::from_function(g, [&](const Point& x) { return std::sin(2.0 * kPi * x[0] / L); });
  CHECK_THAT(norm(f, {.order = -1.0}), WithinRel(L / (2.0 * kPi) * l2_norm(f), 1e-13));
}

TEST_CASE("H^0 norm is the L^2 norm", "[norm]") {
  const Grid g(2, 16, 1.0);
  const Field f = random_field(g, 3, 4, false);
  CHECK(sobolev_norm(f, 0.0) == l2_norm(f));
  CHECK_THAT(l2_norm(f), WithinRel(std::sqrt(g.cell_volume() * [&] {
                                     double s = 0.0;
                                     for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i];
                                     return s;
                                   }()),
                                   1e-12));
}

TEST_CASE("fractional norm against an explicit mode sum", "[norm]") {
  const Grid g(3, 16, 2.0 * kPi);
  // three harmonics with known amplitudes
  const Field f = Field::from_function(g, [](const Point& x) {
    return 2.0 * std::cos(x[0]) + 0.5 * std::sin(2.0 * x[1] + x[2]) - 0.25 * std::cos(3.0 * x[2]);
  });
  // |k|^3 |f_hat|^2 summed over +-k: amplitude^2 / 2 per harmonic, times volume
  const double V = g.volume();
  const double expected = V * (0.5 * 4.0 * 1.0 + 0.5 * 0.25 * std::pow(5.0, 1.5) + 0.5 * 0.0625 * 27.0);
  CHECK_THAT(std::pow(norm(f, {.order = 1.5}), 2), WithinRel(expected, 1e-12));
}

TEST_CASE("integer Sobolev norm sums derivative norms", "[norm]") {
  const Grid g(2, 16, 2.0 * kPi);
  const Field f = random_field(g, 5, 4);
  double expected = std::pow(l2_norm(f), 2);
  for (int a = 0; a < 2; ++a) expected += std::pow(l2_norm(partial(f, a)), 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) expected += std::pow(l2_norm(partial(partial(f, a), b)), 2);
  CHECK_THAT(std::pow(sobolev_norm(f, 2.0), 2), WithinRel(expected, 1e-12));
}

TEST_CASE("L^p norms by grid quadrature", "[norm]") {
  const Grid g(1, 64, 2.0 * kPi);
  const Field f = Field::from_function(g, [](const Point& x) { return std::cos(x[0]); });
  CHECK_THAT(norm(f, {.lebesgue = kInfinity}), WithinAbs(1.0, 1e-14));
  const Field sq = f * f;  // smooth, so the grid rule is exact
  CHECK_THAT(norm(sq, {.lebesgue = 1.0}), WithinRel(kPi, 1e-12));
  CHECK_THAT(norm(f, {.lebesgue = 2.0}), WithinRel(std::sqrt(kPi), 1e-12));
}

TEST_CASE("interpolation: degenerate triple gives ratio one", "[interpolation]") {
  const Grid g(3, 16, 2.0 * kPi);
  const Field f = random_field(g, 2, 5);
  const auto r = gn_interpolation_check(f, 1.0, 1.0, 1.0);
  CHECK_THAT(r.ratio, WithinAbs(1.0, 1e-14));
  CHECK(r.holds);
}

TEST_CASE("interpolation: single harmonic is the equality case", "[interpolation]") {
  const Grid g(3, 16, 2.0 * kPi);
  const Field f = Field::from_function(g, [](const Point& x) { return std::sin(2.0 * x[0] + x[1]); });
  CHECK_THAT(gn_interpolation_check(f, 1.0, 0.0, 2.0).ratio, WithinAbs(1.0, 1e-13));
  CHECK_THAT(gn_interpolation_check(f, 0.3, -0.5, 1.7).ratio, WithinAbs(1.0, 1e-13));
}

TEST_CASE("interpolation holds with constant one for p = 2", "[interpolation][property]") {
  const Grid g(3, 16, 2.0 * kPi);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const Field f = random_field(g, 1000 + k, 5);
    double b = u(rng), c = u(rng) + 0.1;
    if (b > c) std::swap(b, c);
    const double a = 0.5 * (b + c);
    const auto r = gn_interpolation_check(f, a, b, c);
    CHECK(r.theta == Catch::Approx(0.5));
    CHECK(r.ratio <= 1.0 + 1e-12);
  }
  const Field f = random_field(g, 7, 5);
  CHECK(gn_interpolation_check(f, 1.0, 0.0, 2.0).ratio <= 1.0);
}

TEST_CASE("interpolation rejects theta outside [0, 1]", "[interpolation]") {
  const Grid g(2, 16, 1.0);
  const Field f = random_field(g, 2, 4);
  CHECK_THROWS_WITH(gn_interpolation_check(f, 3.0, 0.0, 1.0), Catch::Matchers::ContainsSubstring("invalid interpolation triple"));
  CHECK_THROWS_WITH(gn_interpolation_check(f, 1.0, 2.0, 2.0), Catch::Matchers::ContainsSubstring("invalid interpolation triple"));
}

TEST_CASE("dealiasing keeps products band-limited", "[dealias]") {
  const Grid g(2, 32, 2.0 * kPi);
  const Field a = random_field(g, 1, 10), b = random_field(g, 2, 10);
  const Spectrum p = transform(product(a, b));
  double inside = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    (inside_dealias_band(g, g.mode(i)) ? inside : outside) = std::max(
        inside_dealias_band(g, g.mode(i)) ? inside : outside, std::abs(p[i]));
  CHECK(outside < 1e-14 * inside);
}

TEST_CASE("field file round trip and layout", "[io]") {
  const Grid g(2, 8, 1.5);
  const Field a = random_field(g, 1, 2, false), b = random_field(g, 2, 2, false);
  const std::vector<char> buf = io::encode({a, b});
  REQUIRE(buf.size() == 40 + 2 * 64 * 8);
  CHECK(std::string(buf.data(), 8) == "NSPFIELD");
  double first = 0.0;
  std::memcpy(&first, buf.data() + 40, 8);
  CHECK(first == a[0]);
  std::memcpy(&first, buf.data() + 40 + 64 * 8, 8);
  CHECK(first == b[0]);

  const auto path = std::filesystem::temp_directory_path() / "nsp_test_io.nspf";
  io::write(path, {a, b});
  const auto back = io::read(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].grid() == g);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[0][i] == a[i]);
    CHECK(back[1][i] == b[i]);
  }
  std::filesystem::remove(path);

  std::vector<char> bad = buf;
  bad[0] = 'X';
  CHECK_THROWS(io::decode(bad));
  bad = buf;
  bad.pop_back();
  CHECK_THROWS(io::decode(bad));
}
