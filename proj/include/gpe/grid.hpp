#pragma once

#include <fftw3.h>

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "gpe/error.hpp"

namespace gpe {

using cplx = std::complex<double>;

/// Square periodic box [-L, L]^d sampled with M points per axis.
struct GridSpec {
  int dim = 1;
  double half_width = 1.0;
  int points = 4;

  double mesh() const noexcept { return 2.0 * half_width / points; }

  std::size_t size() const noexcept {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(points);
    return n;
  }

  /// Quadrature weight h^d of one grid node.
  double cell_volume() const noexcept { return std::pow(mesh(), dim); }

  /// Fourier frequency xi_p = p pi / L for the FFT storage index.
  double frequency(int index) const noexcept {
    const int p = index < points / 2 ? index : index - points;
    return p * std::numbers::pi / half_width;
  }

  void validate() const {
    if (dim < 1 || dim > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
    if (points < 4 || points % 2 != 0)
      throw InvalidArgument("grid points per axis must be even and >= 4");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw InvalidArgument("grid half-width must be positive");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const noexcept {
    if (p != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(p);
    }
  }
};

using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

/// Immutable grid: coordinates, frequencies and FFT plans for one GridSpec.
///
/// All transforms are in-place on caller-owned buffers, so one Grid can be
/// shared by any number of threads. The forward transform carries no
/// prefactor; the inverse divides by M per axis.
class Grid {
 public:
  static std::shared_ptr<const Grid> create(const GridSpec& spec) {
    spec.validate();
    return std::shared_ptr<const Grid>(new Grid(spec));
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  int points() const noexcept { return spec_.points; }
  double half_width() const noexcept { return spec_.half_width; }
  double mesh() const noexcept { return spec_.mesh(); }
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return spec_.cell_volume(); }

  /// Node coordinates x_k = -L + k h along one axis.
  std::span<const double> axis() const noexcept { return axis_; }
  /// Frequencies along one axis in FFT storage order.
  std::span<const double> frequencies() const noexcept { return freq_; }
  /// |xi|^2 summed over axes, per spectral index.
  std::span<const double> wavenumber_squared() const noexcept { return k2_; }
  /// Coordinate along `axis` of every grid node (row-major, axis 0 slowest).
  std::span<const double> coordinate(int axis) const noexcept { return coords_[axis]; }

  /// Multi-index of a flat row-major index.
  std::array<int, 3> unflatten(std::size_t flat) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    const auto m = static_cast<std::size_t>(spec_.points);
    for (int a = spec_.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % m);
      flat /= m;
    }
    return idx;
  }

  void forward(std::span<cplx> data) const {
    execute(forward_.get(), data, size_);
  }

  void inverse(std::span<cplx> data) const {
    execute(inverse_.get(), data, size_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& v : data) v *= scale;
  }

  /// Inverse transform of two stacked spectra in one call (d >= 2 only).
  void inverse_pair(std::span<cplx> data) const {
    if (!inverse_pair_) throw UnsupportedDimension("paired transform needs d >= 2");
    execute(inverse_pair_.get(), data, 2 * size_);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& v : data) v *= scale;
  }

  /// Number of transform passes executed on this grid so far.
  std::size_t transform_count() const noexcept { return count_.load(std::memory_order_relaxed); }

 private:
  explicit Grid(const GridSpec& spec) : spec_(spec), size_(spec.size()) {
    const int m = spec.points;
    const double h = spec.mesh();
    axis_.resize(m);
    freq_.resize(m);
    for (int k = 0; k < m; ++k) {
      axis_[k] = -spec.half_width + k * h;
      freq_[k] = spec.frequency(k);
    }
    k2_.resize(size_);
    for (auto& c : coords_) c.clear();
    for (int a = 0; a < spec.dim; ++a) coords_[a].resize(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      const auto idx = unflatten(i);
      double k2 = 0.0;
      for (int a = 0; a < spec.dim; ++a) {
        k2 += freq_[idx[a]] * freq_[idx[a]];
        coords_[a][i] = axis_[idx[a]];
      }
      k2_[i] = k2;
    }
    make_plans();
  }

  void make_plans() {
    std::array<int, 3> n{spec_.points, spec_.points, spec_.points};
    std::vector<cplx> scratch(2 * size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_.reset(fftw_plan_dft(spec_.dim, n.data(), buf, buf, FFTW_FORWARD, flags));
    inverse_.reset(fftw_plan_dft(spec_.dim, n.data(), buf, buf, FFTW_BACKWARD, flags));
    if (spec_.dim >= 2) {
      const int dist = static_cast<int>(size_);
      inverse_pair_.reset(fftw_plan_many_dft(spec_.dim, n.data(), 2, buf, nullptr, 1, dist,
                                             buf, nullptr, 1, dist, FFTW_BACKWARD, flags));
    }
  }

  void execute(fftw_plan_s* plan, std::span<cplx> data, std::size_t expected) const {
    if (data.size() != expected) throw GridMismatch("transform buffer has the wrong size");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
    count_.fetch_add(1, std::memory_order_relaxed);
  }

  GridSpec spec_;
  std::size_t size_;
  std::vector<double> axis_;
  std::vector<double> freq_;
  std::vector<double> k2_;
  std::array<std::vector<double>, 3> coords_;
  detail::Plan forward_;
  detail::Plan inverse_;
  detail::Plan inverse_pair_;
  mutable std::atomic<std::size_t> count_{0};
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace gpe
