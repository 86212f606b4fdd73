#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "gpe/error.hpp"
#include "gpe/grid.hpp"

namespace gpe {

/// Complex amplitude per grid node. Value type: copies are deep.
class WaveField {
 public:
  WaveField() = default;

  explicit WaveField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size()) {}

  WaveField(GridPtr grid, std::vector<cplx> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw GridMismatch("value count does not match grid");
  }

  /// Samples f(x[, y[, z]]) at every node.
  template <class F>
  static WaveField sample(GridPtr grid, F&& f) {
    WaveField out(grid);
    const int d = grid->dim();
    auto at = [&](std::size_t i) -> cplx {
      const double x = grid->coordinate(0)[i];
      if constexpr (std::is_invocable_v<F&, double>) {
        if (d == 1) return f(x);
      }
      if constexpr (std::is_invocable_v<F&, double, double>) {
        if (d == 2) return f(x, grid->coordinate(1)[i]);
      }
      if constexpr (std::is_invocable_v<F&, double, double, double>) {
        if (d == 3) return f(x, grid->coordinate(1)[i], grid->coordinate(2)[i]);
      }
      throw UnsupportedDimension("sampling function does not accept this dimension");
    };
    for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = at(i);
    return out;
  }

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

  bool same_grid(const WaveField& other) const noexcept {
    return grid_ == other.grid_ || (grid_ && other.grid_ && grid_->spec() == other.grid_->spec());
  }

  void require_same_grid(const WaveField& other) const {
    if (!same_grid(other)) throw GridMismatch();
  }

  WaveField& operator+=(const WaveField& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
    return *this;
  }

  WaveField& operator-=(const WaveField& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }

  WaveField& operator*=(cplx s) noexcept {
    for (auto& v : values_) v *= s;
    return *this;
  }

  WaveField& operator*=(double s) noexcept {
    for (auto& v : values_) v *= s;
    return *this;
  }

  /// this += a * x
  WaveField& axpy(cplx a, const WaveField& x) {
    require_same_grid(x);
    for (std::size_t i = 0; i < size(); ++i) values_[i] += a * x.values_[i];
    return *this;
  }

  friend WaveField operator+(WaveField a, const WaveField& b) { return a += b; }
  friend WaveField operator-(WaveField a, const WaveField& b) { return a -= b; }
  friend WaveField operator*(cplx s, WaveField a) { return a *= s; }
  friend WaveField operator*(double s, WaveField a) { return a *= s; }

  WaveField conj() const {
    WaveField out(*this);
    for (auto& v : out.values_) v = std::conj(v);
    return out;
  }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](const cplx& v) {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    });
  }

 private:
  GridPtr grid_;
  std::vector<cplx> values_;
};

/// Discrete L2 inner product h^d sum conj(u) v.
inline cplx inner(const WaveField& u, const WaveField& v) {
  u.require_same_grid(v);
  cplx acc = 0.0;
  const auto a = u.values();
  const auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc * u.grid().cell_volume();
}

/// Re <u, v>, the metric of the sphere viewed as a real manifold.
inline double real_inner(const WaveField& u, const WaveField& v) {
  u.require_same_grid(v);
  double acc = 0.0;
  const auto a = u.values();
  const auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return acc * u.grid().cell_volume();
}

inline double norm(const WaveField& u) { return std::sqrt(real_inner(u, u)); }

inline double max_abs(const WaveField& u) {
  double m = 0.0;
  for (const auto& v : u.values()) m = std::max(m, std::abs(v));
  return m;
}

/// Scales u to unit discrete norm and returns the norm it had.
inline double normalize(WaveField& u) {
  const double n = norm(u);
  if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero field");
  u *= 1.0 / n;
  return n;
}

inline WaveField normalized(WaveField u) {
  normalize(u);
  return u;
}

/// Pointwise real-valued array on a grid (potential samples, diagonals).
using RealArray = std::vector<double>;

}  // namespace gpe
