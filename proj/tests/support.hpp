#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gpe/run.hpp"

namespace testing {

using gpe::cplx;
using gpe::GridPtr;
using gpe::WaveField;

inline GridPtr grid(int d, double L, int M) { return gpe::Grid::create({d, L, M}); }

/// Independent normal real and imaginary parts at every node.
inline WaveField random_field(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  WaveField f(g);
  for (auto& v : f.values()) v = cplx(n(rng), n(rng));
  return f;
}

/// Random field damped by a Gaussian so it is well resolved on the grid.
inline WaveField random_smooth_field(const GridPtr& g, std::uint64_t seed) {
  return gpe::detail::random_smooth(g, seed);
}

inline WaveField random_unit_field(const GridPtr& g, std::uint64_t seed) {
  return gpe::normalized(random_smooth_field(g, seed));
}

/// Smooth nonnegative potential: x^2 plus a few random cosines.
inline gpe::RealArray random_smooth_potential(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double L = g->half_width();
  double a[3], k[3];
  for (int i = 0; i < 3; ++i) {
    a[i] = 2.0 * u(rng);
    k[i] = (1 + static_cast<int>(3 * u(rng))) * std::numbers::pi / L;
  }
  gpe::RealArray v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = g->coordinate(0)[i];
    double s = 0.5 * x * x;
    for (int j = 0; j < 3; ++j) s += a[j] * (1.0 + std::cos(k[j] * x + j));
    v[i] = s;
  }
  return v;
}

inline Eigen::VectorXcd to_vector(const WaveField& f) {
  Eigen::VectorXcd v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i];
  return v;
}

inline WaveField from_vector(const Eigen::VectorXcd& v, const GridPtr& g) {
  WaveField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = v[i];
  return f;
}

/// Dense matrix of a linear field operator.
template <class Op>
Eigen::MatrixXcd assemble(const GridPtr& g, Op&& op) {
  const std::size_t n = g->size();
  Eigen::MatrixXcd A(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    WaveField e(g);
    e[j] = 1.0;
    A.col(j) = to_vector(op(e));
  }
  return A;
}

/// One-axis spectral first and second derivative matrices built from the
/// explicit DFT matrix, with the Nyquist mode treated as in the library
/// (first derivative: coefficient i xi_{-M/2}, second: -xi^2).
inline Eigen::MatrixXcd dft_derivative(int M, double L, int order) {
  Eigen::MatrixXcd F(M, M), Finv(M, M), D = Eigen::MatrixXcd::Zero(M, M);
  const cplx I(0.0, 1.0);
  for (int p = 0; p < M; ++p) {
    for (int k = 0; k < M; ++k) {
      F(p, k) = std::exp(-2.0 * std::numbers::pi * I * double(p) * double(k) / double(M));
      Finv(k, p) = std::exp(2.0 * std::numbers::pi * I * double(p) * double(k) / double(M)) / double(M);
    }
    const int q = p < M / 2 ? p : p - M;
    const double xi = q * std::numbers::pi / L;
    D(p, p) = order == 1 ? I * xi : cplx(-xi * xi);
  }
  return Finv * D * F;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_diff(const WaveField& a, const WaveField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Exact ground mode of -1/2 d^2 + x^2: 2^{1/4} pi^{-1/4} exp(-x^2/sqrt 2).
inline WaveField oscillator_ground(const GridPtr& g) {
  return gpe::normalized(WaveField::sample(g, [](double x) {
    return cplx(std::pow(2.0, 0.25) * std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / std::sqrt(2.0)));
  }));
}

inline gpe::ModelParams params(double eta, double omega = 0.0,
                               gpe::PotentialKind kind = gpe::PotentialKind::harmonic) {
  gpe::ModelParams p;
  p.eta = eta;
  p.omega = omega;
  p.potential.kind = kind;
  return p;
}

}  // namespace testing
