#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "nsp/error.hpp"

namespace nsp::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline GaussRule build_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute the derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace detail

inline const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw DomainError("Gauss-Legendre order must lie in [1, 256]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
  return it->second;
}

/// Fixed-order Gauss-Legendre on [a, b].
template <class F>
double integrate_gauss(F&& f, double a, double b, int order) {
  const GaussRule& r = gauss_legendre(order);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
  return half * sum;
}

struct AdaptiveOptions {
  int order = 8;          ///< coarse rule; the error estimate compares with 2*order
  double rtol = 1e-10;
  double atol = 0.0;
  int max_panels = 400;
};

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Adaptive composite Gauss-Legendre over consecutive breakpoints. The panel
/// with the largest error estimate is bisected until the summed estimate is
/// below max(atol, rtol*|value|). Summation runs in panel order, so results
/// are deterministic.
template <class F>
AdaptiveResult integrate_adaptive(F&& f, const std::vector<double>& breakpoints,
                                  const AdaptiveOptions& opt = {}) {
  struct Panel {
    double a, b, value, error;
  };
  if (breakpoints.size() < 2) throw DomainError("need at least two breakpoints");
  AdaptiveResult res;
  auto evaluate = [&](double a, double b) {
    const double coarse = integrate_gauss(f, a, b, opt.order);
    const double fine = integrate_gauss(f, a, b, 2 * opt.order);
    res.evaluations += 3 * opt.order;
    return Panel{a, b, fine, std::abs(fine - coarse)};
  };
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (breakpoints[i + 1] > breakpoints[i]) panels.push_back(evaluate(breakpoints[i], breakpoints[i + 1]));

  auto totals = [&] {
    double v = 0.0, e = 0.0;
    for (const Panel& p : panels) {
      v += p.value;
      e += p.error;
    }
    return std::pair{v, e};
  };
  auto [value, error] = totals();
  while (error > std::max(opt.atol, opt.rtol * std::abs(value)) &&
         static_cast<int>(panels.size()) < opt.max_panels) {
    auto worst = std::max_element(panels.begin(), panels.end(),
                                  [](const Panel& x, const Panel& y) { return x.error < y.error; });
    const double a = worst->a, b = worst->b, m = 0.5 * (a + b);
    *worst = evaluate(a, m);
    panels.insert(worst + 1, evaluate(m, b));
    std::tie(value, error) = totals();
  }
  res.value = value;
  res.error = error;
  res.panels = static_cast<int>(panels.size());
  res.converged = error <= std::max(opt.atol, opt.rtol * std::abs(value));
  return res;
}

}  // namespace nsp::quad
