#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "nsp/error.hpp"

namespace nsp {

using Point = std::array<double, 3>;
using ModeIndex = std::array<int, 3>;
using Wavevector = std::array<double, 3>;

/// Uniform periodic grid on the torus [0, L)^dim with n points per axis.
///
/// Physical samples are stored row-major with the last axis fastest. The
/// half-complex spectrum (real-to-complex transform layout) keeps the first
/// dim-1 axes complete and the last axis truncated to n/2+1 entries.
class Grid {
public:
  Grid() = default;

  Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
    if (dim < 1 || dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
      throw DomainError("grid points per axis must be a power of two >= 8");
    if (!(length > 0.0) || !std::isfinite(length))
      throw DomainError("box length must be positive and finite");
  }

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }

  std::size_t size() const noexcept {
    std::size_t s = 1;
    for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
    return s;
  }

  std::size_t spectral_size() const noexcept { return size() / n_ * (n_ / 2 + 1); }

  double spacing() const noexcept { return length_ / n_; }
  double volume() const noexcept { return std::pow(length_, dim_); }
  double cell_volume() const noexcept { return volume() / static_cast<double>(size()); }
  double wavenumber_unit() const noexcept { return 2.0 * std::numbers::pi / length_; }

  /// Signed integer mode in [-n/2, n/2) for storage index i in [0, n).
  int signed_index(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }

  Point point(std::size_t flat) const noexcept {
    Point x{0.0, 0.0, 0.0};
    for (int a = dim_ - 1; a >= 0; --a) {
      x[a] = spacing() * static_cast<double>(flat % n_);
      flat /= n_;
    }
    return x;
  }

  /// Integer mode of half-spectrum entry `flat`; unused axes are 0.
  ModeIndex mode(std::size_t flat) const noexcept {
    ModeIndex m{0, 0, 0};
    const int last = n_ / 2 + 1;
    m[dim_ - 1] = static_cast<int>(flat % last);
    flat /= last;
    for (int a = dim_ - 2; a >= 0; --a) {
      m[a] = signed_index(static_cast<int>(flat % n_));
      flat /= n_;
    }
    // last-axis index n/2 is the Nyquist entry, reported as -n/2
    if (m[dim_ - 1] == n_ / 2) m[dim_ - 1] = -n_ / 2;
    return m;
  }

  Wavevector wavevector(std::size_t flat) const noexcept {
    const ModeIndex m = mode(flat);
    return {wavenumber_unit() * m[0], wavenumber_unit() * m[1], wavenumber_unit() * m[2]};
  }

  /// True when any axis of the mode sits on the Nyquist frequency.
  bool is_nyquist(const ModeIndex& m) const noexcept {
    for (int a = 0; a < dim_; ++a)
      if (m[a] == -n_ / 2) return true;
    return false;
  }

  /// Number of full-spectrum modes represented by a half-spectrum entry.
  double multiplicity(std::size_t flat) const noexcept {
    const int j = static_cast<int>(flat % (n_ / 2 + 1));
    return (j == 0 || j == n_ / 2) ? 1.0 : 2.0;
  }

  /// Half-spectrum storage index for a full-spectrum mode, with `conjugate`
  /// set when the entry holds the Hermitian partner.
  std::size_t spectral_index(ModeIndex m, bool& conjugate) const noexcept {
    conjugate = false;
    auto wrap = [this](int v) { return ((v % n_) + n_) % n_; };
    int last = wrap(m[dim_ - 1]);
    if (last > n_ / 2) {
      conjugate = true;
      for (int a = 0; a < dim_; ++a) m[a] = -m[a];
      last = wrap(m[dim_ - 1]);
    }
    std::size_t flat = 0;
    for (int a = 0; a < dim_ - 1; ++a) flat = flat * n_ + wrap(m[a]);
    return flat * (n_ / 2 + 1) + last;
  }

  bool operator==(const Grid&) const = default;

  std::string describe() const {
    return "dim=" + std::to_string(dim_) + " n=" + std::to_string(n_) +
           " L=" + std::to_string(length_);
  }

private:
  int dim_ = 1;
  int n_ = 8;
  double length_ = 2.0 * std::numbers::pi;
};

inline double magnitude(const Wavevector& k) noexcept {
  return std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
}

}  // namespace nsp
