#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "gpe/field.hpp"

namespace gpe {

struct Vortex {
  double x = 0.0;
  double y = 0.0;
  int winding = 0;
  double density = 0.0;  ///< mean |phi|^2 over the plaquette corners
};

/// Phase singularities of a 2D field found by summing wrapped phase
/// differences around every grid plaquette. Only plaquettes centred inside
/// `radius` whose corner density stays below `density_fraction` times the
/// peak density are reported.
inline std::vector<Vortex> detect_vortices(const WaveField& phi, double radius,
                                           double density_fraction = 0.5) {
  const Grid& g = phi.grid();
  if (g.dim() != 2) throw UnsupportedDimension("vortex detection is two-dimensional");
  const int m = g.points();
  const auto ax = g.axis();
  const double h = g.mesh();
  double peak = 0.0;
  for (const auto& v : phi.values()) peak = std::max(peak, std::norm(v));

  auto at = [&](int i, int j) { return phi[static_cast<std::size_t>(i) * m + j]; };
  auto wrap = [](double a) { return std::remainder(a, 2.0 * std::numbers::pi); };

  std::vector<Vortex> out;
  for (int i = 0; i + 1 < m; ++i) {
    for (int j = 0; j + 1 < m; ++j) {
      const double cx = ax[i] + 0.5 * h;
      const double cy = ax[j] + 0.5 * h;
      if (cx * cx + cy * cy > radius * radius) continue;
      const cplx c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      double rho = 0.0;
      bool zero = false;
      for (const auto& v : c) {
        rho += 0.25 * std::norm(v);
        if (v == cplx(0.0)) zero = true;
      }
      if (zero || rho > density_fraction * peak) continue;
      double sum = 0.0;
      for (int k = 0; k < 4; ++k) sum += wrap(std::arg(c[(k + 1) % 4]) - std::arg(c[k]));
      const int w = static_cast<int>(std::lround(sum / (2.0 * std::numbers::pi)));
      if (w != 0) out.push_back({cx, cy, w, rho});
    }
  }
  return out;
}

}  // namespace gpe
