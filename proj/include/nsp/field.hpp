#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "nsp/grid.hpp"

namespace nsp {

using Complex = std::complex<double>;

/// Real scalar samples on a periodic grid.
class Field {
public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0)
      : grid_(grid), values_(grid.size(), value) {}
  Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw DomainError("field size does not match grid");
  }

  template <class F>
  static Field from_function(const Grid& grid, F&& f) {
    Field out(grid);
    for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = f(grid.point(i));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double mean() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    check(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
  }
  Field& operator+=(double s) noexcept {
    for (double& v : values_) v += s;
    return *this;
  }
  /// this += a * x
  Field& axpy(double a, const Field& x) {
    check(x);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += a * x.values_[i];
    return *this;
  }

  template <class F>
  Field map(F&& f) const {
    Field out(grid_);
    for (std::size_t i = 0; i < size(); ++i) out.values_[i] = f(values_[i]);
    return out;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator+(Field a, double s) noexcept { return a += s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  /// Pointwise product (no dealiasing; see spectral::product).
  friend Field operator*(const Field& a, const Field& b) {
    a.check(b);
    Field out(a.grid_);
    for (std::size_t i = 0; i < a.size(); ++i) out.values_[i] = a.values_[i] * b.values_[i];
    return out;
  }

private:
  void check(const Field& o) const {
    if (!(grid_ == o.grid_)) throw DomainError("fields live on different grids");
  }

  Grid grid_;
  std::vector<double> values_;
};

/// Vector field as one scalar field per spatial component (grid.dim() of them).
using VectorField = std::vector<Field>;

inline VectorField zero_vector_field(const Grid& grid) {
  return VectorField(static_cast<std::size_t>(grid.dim()), Field(grid));
}

/// Half-complex spectrum of a real field, normalized so that the zero mode
/// holds the mean: f(x) = sum_k c_k exp(i k.x).
class Spectrum {
public:
  Spectrum() = default;
  explicit Spectrum(const Grid& grid) : grid_(grid), coeffs_(grid.spectral_size()) {}

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<Complex> coefficients() noexcept { return coeffs_; }
  std::span<const Complex> coefficients() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return coeffs_[i]; }

  /// Coefficient of any full-spectrum mode, reconstructed through Hermitian symmetry.
  Complex coefficient(const ModeIndex& m) const noexcept {
    bool conj = false;
    const std::size_t idx = grid_.spectral_index(m, conj);
    return conj ? std::conj(coeffs_[idx]) : coeffs_[idx];
  }

  Complex zero_mode() const noexcept { return coeffs_[0]; }

  Spectrum& operator+=(const Spectrum& o) {
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  Spectrum& operator-=(const Spectrum& o) {
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  Spectrum& operator*=(Complex s) noexcept {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  Spectrum& axpy(Complex a, const Spectrum& x) {
    for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += a * x.coeffs_[i];
    return *this;
  }

  friend Spectrum operator+(Spectrum a, const Spectrum& b) { return a += b; }
  friend Spectrum operator-(Spectrum a, const Spectrum& b) { return a -= b; }
  friend Spectrum operator*(Complex s, Spectrum a) { return a *= s; }

private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

}  // namespace nsp
