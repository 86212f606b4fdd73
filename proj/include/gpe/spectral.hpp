#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gpe/field.hpp"

namespace gpe {

/// Fourier coefficients of a field, FFT storage order.
struct Spectrum {
  GridPtr grid;
  std::vector<cplx> coeffs;
};

inline Spectrum forward_transform(const WaveField& phi) {
  Spectrum s{phi.grid_ptr(), std::vector<cplx>(phi.values().begin(), phi.values().end())};
  phi.grid().forward(s.coeffs);
  return s;
}

inline WaveField inverse_transform(Spectrum s) {
  s.grid->inverse(s.coeffs);
  return WaveField(s.grid, std::move(s.coeffs));
}

/// Delta phi from the spectrum of phi: one inverse transform.
inline WaveField laplacian_from_spectrum(const Spectrum& s) {
  const auto k2 = s.grid->wavenumber_squared();
  std::vector<cplx> out(s.coeffs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -k2[i] * s.coeffs[i];
  s.grid->inverse(out);
  return WaveField(s.grid, std::move(out));
}

/// L_z phi = -i (x d_y phi - y d_x phi) from the spectrum of phi.
///
/// Both partial derivatives come out of one paired inverse transform; the
/// coordinate multiplications happen in real space.
inline WaveField lz_from_spectrum(const Spectrum& s) {
  const Grid& g = *s.grid;
  if (g.dim() < 2) throw UnsupportedDimension("L_z requires d >= 2");
  const std::size_t n = g.size();
  const auto freq = g.frequencies();
  std::vector<cplx> buf(2 * n);
  const cplx I(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = g.unflatten(i);
    buf[i] = I * freq[idx[0]] * s.coeffs[i];      // d_x
    buf[n + i] = I * freq[idx[1]] * s.coeffs[i];  // d_y
  }
  g.inverse_pair(buf);
  const auto x = g.coordinate(0);
  const auto y = g.coordinate(1);
  WaveField out(s.grid);
  for (std::size_t i = 0; i < n; ++i) out[i] = -I * (x[i] * buf[n + i] - y[i] * buf[i]);
  return out;
}

inline WaveField apply_laplacian(const WaveField& phi) {
  return laplacian_from_spectrum(forward_transform(phi));
}

inline WaveField apply_lz(const WaveField& phi) {
  if (phi.grid().dim() < 2) throw UnsupportedDimension("L_z requires d >= 2");
  return lz_from_spectrum(forward_transform(phi));
}

/// Linear differential part of the Hamiltonian, split by term.
struct LinearParts {
  WaveField kinetic;  ///< -1/2 Delta phi
  WaveField angular;  ///< L_z phi (zero field when not requested)
};

/// -1/2 Delta phi and, if `with_rotation`, L_z phi from one forward
/// transform plus one inverse per term.
inline LinearParts linear_parts(const WaveField& phi, bool with_rotation) {
  const Spectrum s = forward_transform(phi);
  LinearParts out{laplacian_from_spectrum(s), WaveField(phi.grid_ptr())};
  out.kinetic *= -0.5;
  if (with_rotation) out.angular = lz_from_spectrum(s);
  return out;
}

/// Fourier zero-padding prolongation onto a finer grid with the same L and d.
///
/// Coarse coefficients keep their frequency; the unmatched -M/2 mode is split
/// evenly between -M'/2 and +M'/2 on every axis where it occurs. The result
/// is renormalized to unit discrete norm.
inline WaveField spectral_interpolate(const WaveField& phi, const GridPtr& target) {
  const GridSpec& from = phi.grid().spec();
  const GridSpec& to = target->spec();
  if (from.dim != to.dim || from.half_width != to.half_width)
    throw GridMismatch("interpolation requires the same dimension and half-width");
  if (to.points < from.points) throw InvalidArgument("interpolation target must not be coarser");

  const Spectrum coarse = forward_transform(phi);
  const int mc = from.points;
  const int mf = to.points;
  const int d = from.dim;
  const double scale = static_cast<double>(target->size()) / static_cast<double>(phi.size());
  std::vector<cplx> fine(target->size(), cplx(0.0));

  // Fine storage indices (and weights) receiving coarse storage index k on one axis.
  auto targets = [&](int k) {
    std::vector<std::pair<int, double>> t;
    const int p = k < mc / 2 ? k : k - mc;
    if (p == -mc / 2 && mf > mc) {
      t.emplace_back(mf - mc / 2, 0.5);  // -M/2 keeps its place
      t.emplace_back(mc / 2, 0.5);       // mirrored to +M/2
    } else {
      t.emplace_back(p >= 0 ? p : p + mf, 1.0);
    }
    return t;
  };

  std::vector<std::vector<std::pair<int, double>>> axis_targets(mc);
  for (int k = 0; k < mc; ++k) axis_targets[k] = targets(k);

  for (std::size_t i = 0; i < coarse.coeffs.size(); ++i) {
    const auto idx = phi.grid().unflatten(i);
    const cplx c = coarse.coeffs[i] * scale;
    const auto& tx = axis_targets[idx[0]];
    const auto& ty = d > 1 ? axis_targets[idx[1]] : axis_targets[0];
    const auto& tz = d > 2 ? axis_targets[idx[2]] : axis_targets[0];
    const std::size_t ny = d > 1 ? ty.size() : 1;
    const std::size_t nz = d > 2 ? tz.size() : 1;
    for (const auto& [fx, wx] : tx) {
      for (std::size_t b = 0; b < ny; ++b) {
        for (std::size_t e = 0; e < nz; ++e) {
          std::size_t flat = static_cast<std::size_t>(fx);
          double w = wx;
          if (d > 1) {
            flat = flat * mf + ty[b].first;
            w *= ty[b].second;
          }
          if (d > 2) {
            flat = flat * mf + tz[e].first;
            w *= tz[e].second;
          }
          fine[flat] += w * c;
        }
      }
    }
  }
  WaveField out = inverse_transform(Spectrum{target, std::move(fine)});
  normalize(out);
  return out;
}

}  // namespace gpe
