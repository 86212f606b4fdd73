#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "gpe/field.hpp"

namespace gpe {

enum class PotentialKind { harmonic, harmonic_plus_lattice, harmonic_plus_quartic, half_square, free };

/// How the lattice term sin^2(q_nu * arg) reads its argument.
enum class LatticeArgument {
  nu_squared,  ///< sin^2(q_nu nu^2), the form as printed
  nu,          ///< sin^2(q_nu nu), the conventional optical lattice
};

/// Parametric trap.
///
/// The harmonic part is gamma_x^2 x^2 in 1D and sum gamma_nu nu^2 in 2D/3D
/// (coefficients taken literally in both cases). The quartic trap is
/// (1 - alpha)(gamma_x x^2 + gamma_y y^2) + kappa (x^2 + y^2)^2 / 4, plus
/// gamma_z^2 z^2 in 3D. `half_square` is |x|^2 / 2 and `free` is V = 0.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::harmonic;
  std::array<double, 3> gamma{1.0, 1.0, 1.0};
  std::array<double, 3> lattice_amplitude{0.0, 0.0, 0.0};
  std::array<double, 3> lattice_wavenumber{0.0, 0.0, 0.0};
  double quartic_alpha = 0.0;
  double quartic_kappa = 0.0;
  LatticeArgument lattice_argument = LatticeArgument::nu_squared;

  void validate(int dim) const {
    if (kind == PotentialKind::harmonic || kind == PotentialKind::harmonic_plus_lattice ||
        kind == PotentialKind::harmonic_plus_quartic) {
      for (int a = 0; a < dim; ++a)
        if (!(gamma[a] > 0.0)) throw InvalidArgument("trap frequencies must be positive");
    }
    if (kind == PotentialKind::harmonic_plus_quartic) {
      if (dim < 2) throw UnsupportedDimension("quartic trap requires d = 2 or 3");
      if (quartic_kappa < 0.0) throw InvalidArgument("quartic kappa must be >= 0");
    }
  }

  double operator()(const std::array<double, 3>& x, int dim) const {
    switch (kind) {
      case PotentialKind::free: return 0.0;
      case PotentialKind::half_square: {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
        return 0.5 * r2;
      }
      case PotentialKind::harmonic:
        return harmonic(x, dim);
      case PotentialKind::harmonic_plus_lattice: {
        double v = harmonic(x, dim);
        for (int a = 0; a < dim; ++a) {
          const double arg = lattice_argument == LatticeArgument::nu_squared ? x[a] * x[a] : x[a];
          const double s = std::sin(lattice_wavenumber[a] * arg);
          v += lattice_amplitude[a] * s * s;
        }
        return v;
      }
      case PotentialKind::harmonic_plus_quartic: {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        double v = (1.0 - quartic_alpha) * (gamma[0] * x[0] * x[0] + gamma[1] * x[1] * x[1]) +
                   0.25 * quartic_kappa * r2 * r2;
        if (dim == 3) v += gamma[2] * gamma[2] * x[2] * x[2];
        return v;
      }
    }
    return 0.0;
  }

  /// Trap frequencies entering the Thomas-Fermi chemical potential.
  std::array<double, 3> thomas_fermi_gamma(int dim) const {
    if (kind == PotentialKind::half_square) {
      const double g = dim == 1 ? std::sqrt(0.5) : 0.5;
      return {g, g, g};
    }
    return gamma;
  }

  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;

 private:
  double harmonic(const std::array<double, 3>& x, int dim) const {
    if (dim == 1) return gamma[0] * gamma[0] * x[0] * x[0];
    double v = 0.0;
    for (int a = 0; a < dim; ++a) v += gamma[a] * x[a] * x[a];
    return v;
  }
};

/// Samples the trap once per grid node.
inline RealArray sample_potential(const PotentialSpec& spec, const Grid& grid) {
  spec.validate(grid.dim());
  RealArray v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(a)[i];
    v[i] = spec(x, grid.dim());
  }
  return v;
}

inline std::string_view to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::harmonic_plus_lattice: return "lattice";
    case PotentialKind::harmonic_plus_quartic: return "quartic";
    case PotentialKind::half_square: return "half_square";
    case PotentialKind::free: return "free";
  }
  return "?";
}

inline PotentialKind parse_potential_kind(std::string_view s) {
  if (s == "harmonic") return PotentialKind::harmonic;
  if (s == "lattice" || s == "harmonic_plus_lattice") return PotentialKind::harmonic_plus_lattice;
  if (s == "quartic" || s == "harmonic_plus_quartic") return PotentialKind::harmonic_plus_quartic;
  if (s == "half_square" || s == "custom_isotropic_half_square") return PotentialKind::half_square;
  if (s == "free") return PotentialKind::free;
  throw InvalidArgument("unknown potential kind '" + std::string(s) + "'");
}

}  // namespace gpe
