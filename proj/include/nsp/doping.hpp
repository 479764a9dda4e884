#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "nsp/field.hpp"

namespace nsp {

/// Ion background b(x) > 0. On the torus the reference value b_bar is the
/// spatial mean of b.
class DopingProfile {
public:
  static DopingProfile flat(const Grid& g, double value) {
    return DopingProfile(Field(g, value), "flat(" + fmt(value) + ")");
  }

  /// base + amplitude * sum over periodic images of exp(-|x - c|^2 / sigma^2).
  static DopingProfile gaussian_bump(const Grid& g, double base, double amplitude, const Point& center,
                                     double sigma) {
    if (!(sigma > 0.0)) throw DomainError("bump width must be positive");
    const double L = g.length();
    const int images = 1;
    Field b = Field::from_function(g, [&](const Point& x) {
      double sum = 0.0;
      const int lo0 = -images, hi0 = images;
      const int lo1 = g.dim() > 1 ? -images : 0, hi1 = g.dim() > 1 ? images : 0;
      const int lo2 = g.dim() > 2 ? -images : 0, hi2 = g.dim() > 2 ? images : 0;
      for (int i = lo0; i <= hi0; ++i)
        for (int j = lo1; j <= hi1; ++j)
          for (int k = lo2; k <= hi2; ++k) {
            const int shift[3] = {i, j, k};
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
              const double d = x[a] - center[a] + shift[a] * L;
              r2 += d * d;
            }
            sum += std::exp(-r2 / (sigma * sigma));
          }
      return base + amplitude * sum;
    });
    std::ostringstream os;
    os << "gaussian-bump(" << fmt(amplitude) << ", [" << fmt(center[0]) << "," << fmt(center[1]) << ","
       << fmt(center[2]) << "], " << fmt(sigma) << ")";
    return DopingProfile(std::move(b), os.str());
  }

  /// base + amplitude * cos(2 pi m.x / L).
  static DopingProfile cosine(const Grid& g, double base, double amplitude, const ModeIndex& m) {
    const double k0 = g.wavenumber_unit();
    Field b = Field::from_function(g, [&](const Point& x) {
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += k0 * m[a] * x[a];
      return base + amplitude * std::cos(phase);
    });
    return DopingProfile(std::move(b), "cosine(" + fmt(amplitude) + ", [" + std::to_string(m[0]) + "," +
                                           std::to_string(m[1]) + "," + std::to_string(m[2]) + "])");
  }

  static DopingProfile gridded(Field b, std::string source) {
    return DopingProfile(std::move(b), "gridded(" + source + ")");
  }

  const Field& values() const noexcept { return b_; }
  const Grid& grid() const noexcept { return b_.grid(); }
  double mean() const noexcept { return mean_; }
  double inf() const { return b_.min(); }
  double sup() const { return b_.max(); }
  const std::string& descriptor() const noexcept { return descriptor_; }

  /// b - b_bar (exactly zero for a constant profile)
  Field deviation() const {
    if (sup() == inf()) return Field(b_.grid());
    Field d = b_;
    d += -mean_;
    return d;
  }

private:
  DopingProfile(Field b, std::string descriptor) : b_(std::move(b)), descriptor_(std::move(descriptor)) {
    if (!b_.all_finite() || !(b_.min() > 0.0)) throw DomainError("doping profile must be positive");
    mean_ = b_.mean();
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }

  Field b_;
  double mean_ = 0.0;
  std::string descriptor_;
};

}  // namespace nsp
