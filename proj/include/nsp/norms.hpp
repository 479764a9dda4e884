#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "nsp/spectral.hpp"

namespace nsp {

/// Which norm to take of a field.
///
/// For lebesgue == 2 the norm is the multiplier form
///   ||grad^order f||_{H^sobolev}^2 = sum_{j=0}^{floor(s)} ||grad^{order+j} f||^2 (+ ||grad^{order+s} f||^2 if s is fractional)
/// with ||grad^a f||^2 = |T| sum_k |k|^{2a} |f_k|^2. Any other lebesgue index
/// is evaluated by equal-weight grid quadrature of the derivative tensors,
/// which needs order == 0 and an integer sobolev index.
struct MultiplierNorm {
  double order = 0.0;
  double sobolev = 0.0;
  double lebesgue = 2.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

inline double weight_power(double k2, double order) {
  if (k2 == 0.0) return order == 0.0 ? 1.0 : 0.0;
  return std::pow(k2, order);
}

/// sum over full-spectrum modes of w(|k|^2) |f_k|^2, times the box volume.
template <class Weight>
double weighted_mode_sum(const Spectrum& s, Weight&& w) {
  const Grid& g = s.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Wavevector k = g.wavevector(i);
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    sum += g.multiplicity(i) * w(k2) * std::norm(s[i]);
  }
  return sum * g.volume();
}

inline double sobolev_weight(double k2, double order, double sobolev) {
  double w = 0.0;
  const double whole = std::floor(sobolev);
  for (int j = 0; j <= static_cast<int>(whole); ++j) w += weight_power(k2, order + j);
  if (sobolev > whole) w += weight_power(k2, order + sobolev);
  return w;
}

inline double lp_of_magnitude(const std::vector<Field>& comps, double p) {
  const Grid& g = comps.at(0).grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double m2 = 0.0;
    for (const Field& c : comps) m2 += c[i] * c[i];
    const double m = std::sqrt(m2);
    if (std::isinf(p))
      acc = std::max(acc, m);
    else
      acc += std::pow(m, p);
  }
  if (std::isinf(p)) return acc;
  return std::pow(acc * g.cell_volume(), 1.0 / p);
}

/// All partial derivatives of order j (ordered multi-indices), dim^j fields.
inline std::vector<Field> derivative_tensor(const Spectrum& s, int j) {
  std::vector<Spectrum> level{s};
  for (int step = 0; step < j; ++step) {
    std::vector<Spectrum> next;
    for (const Spectrum& t : level)
      for (int a = 0; a < s.grid().dim(); ++a) next.push_back(partial(t, a));
    level = std::move(next);
  }
  std::vector<Field> out;
  for (const Spectrum& t : level) out.push_back(inverse_transform(t));
  return out;
}

}  // namespace detail

inline double norm(const Spectrum& s, const MultiplierNorm& spec) {
  if (spec.sobolev < 0.0) throw DomainError("sobolev index must be nonnegative");
  if (spec.order < 0.0 && !has_zero_mean(s)) throw MeanZeroError();
  if (spec.lebesgue == 2.0) {
    return std::sqrt(detail::weighted_mode_sum(
        s, [&](double k2) { return detail::sobolev_weight(k2, spec.order, spec.sobolev); }));
  }
  if (!(spec.lebesgue >= 1.0)) throw DomainError("lebesgue index must lie in [1, inf]");
  if (spec.order != 0.0 || spec.sobolev != std::floor(spec.sobolev))
    throw DomainError("L^p norms with p != 2 need order 0 and an integer sobolev index");
  double total = 0.0;
  for (int j = 0; j <= static_cast<int>(spec.sobolev); ++j)
    total += detail::lp_of_magnitude(detail::derivative_tensor(s, j), spec.lebesgue);
  return total;
}

inline double norm(const Field& f, const MultiplierNorm& spec) {
  if (spec.lebesgue != 2.0 && spec.sobolev == 0.0 && spec.order == 0.0)
    return detail::lp_of_magnitude({f}, spec.lebesgue);
  return norm(transform(f), spec);
}

/// Norm of a vector field: Euclidean combination of components (p = 2) or
/// quadrature of the pointwise magnitude (p != 2, order 0, sobolev 0).
inline double norm(const VectorField& v, const MultiplierNorm& spec) {
  if (spec.lebesgue != 2.0) {
    if (spec.sobolev != 0.0 || spec.order != 0.0)
      throw DomainError("vector L^p norms support only order 0, sobolev 0");
    return detail::lp_of_magnitude(v, spec.lebesgue);
  }
  double sum = 0.0;
  for (const Field& c : v) {
    const double n = norm(c, spec);
    sum += n * n;
  }
  return std::sqrt(sum);
}

inline double l2_norm(const Field& f) { return norm(f, {}); }
inline double linf_norm(const Field& f) { return f.max_abs(); }
inline double sobolev_norm(const Field& f, double k) { return norm(f, {.sobolev = k}); }

/// Outcome of a Gagliardo-Nirenberg interpolation test.
struct InterpolationCheck {
  bool holds = false;
  double ratio = 0.0;  ///< LHS / RHS
  double theta = 0.0;
};

/// Checks ||grad^alpha f||_{L^p} <= ||grad^beta f||^{1-theta} ||grad^gamma f||^theta
/// (right-hand norms in L^2) with theta from
///   alpha + d (1/2 - 1/p) = beta (1 - theta) + gamma theta,  d = grid dimension.
/// For p = 2 the inequality holds with constant 1 (Hoelder on the mode sum);
/// for other p only the ratio is meaningful.
inline InterpolationCheck gn_interpolation_check(const Field& f, double alpha, double beta,
                                                 double gamma, double p = 2.0) {
  const double lhs_order = alpha + f.grid().dim() * (0.5 - 1.0 / p);
  InterpolationCheck out;
  if (gamma == beta) {
    if (std::abs(lhs_order - beta) > 1e-14) throw DomainError("invalid interpolation triple");
    out.theta = 0.0;
  } else {
    out.theta = (lhs_order - beta) / (gamma - beta);
  }
  if (!(out.theta >= -1e-14 && out.theta <= 1.0 + 1e-14))
    throw DomainError("invalid interpolation triple");
  out.theta = std::clamp(out.theta, 0.0, 1.0);

  const Spectrum s = transform(f);
  double lhs = 0.0;
  if (p == 2.0) {
    lhs = norm(s, {.order = alpha});
  } else {
    if (alpha != std::floor(alpha) || alpha < 0.0)
      throw DomainError("L^p interpolation needs an integer alpha >= 0");
    lhs = detail::lp_of_magnitude(detail::derivative_tensor(s, static_cast<int>(alpha)), p);
  }
  const double rhs =
      std::pow(norm(s, {.order = beta}), 1.0 - out.theta) * std::pow(norm(s, {.order = gamma}), out.theta);
  out.ratio = lhs == 0.0 ? 0.0 : lhs / rhs;
  out.holds = out.ratio <= 1.0 + 1e-12;
  return out;
}

}  // namespace nsp
