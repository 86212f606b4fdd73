#pragma once

#include <cmath>
#include <utility>

#include "gpe/potential.hpp"
#include "gpe/spectral.hpp"

namespace gpe {

struct ModelParams {
  double eta = 0.0;    ///< nonlinearity strength
  double omega = 0.0;  ///< rotation speed, ignored in 1D
  PotentialSpec potential;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Energy split by term; total is their sum.
struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double rotation = 0.0;
  double total = 0.0;
};

/// A GPE instance bound to a grid: parameters plus the sampled trap.
class Model {
 public:
  Model(GridPtr grid, ModelParams params)
      : grid_(std::move(grid)), params_(std::move(params)),
        potential_(sample_potential(params_.potential, *grid_)) {}

  /// Pre-sampled trap values; params.potential is then informational only.
  Model(GridPtr grid, ModelParams params, RealArray potential)
      : grid_(std::move(grid)), params_(std::move(params)), potential_(std::move(potential)),
        sampled_(false) {
    if (potential_.size() != grid_->size()) throw GridMismatch("potential does not match grid");
  }

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const Grid& grid() const noexcept { return *grid_; }
  const ModelParams& params() const noexcept { return params_; }
  double eta() const noexcept { return params_.eta; }
  double omega() const noexcept { return rotating() ? params_.omega : 0.0; }
  const RealArray& potential() const noexcept { return potential_; }

  /// True when the L_z term contributes.
  bool rotating() const noexcept { return params_.omega != 0.0 && grid_->dim() >= 2; }

  /// Same parameters on another grid (multigrid levels).
  Model on(GridPtr grid) const {
    if (!sampled_) throw InvalidArgument("a pre-sampled potential cannot be moved to another grid");
    return Model(std::move(grid), params_);
  }

 private:
  GridPtr grid_;
  ModelParams params_;
  RealArray potential_;
  bool sampled_ = true;
};

namespace detail {

inline void require_finite(const WaveField& phi) {
  if (!phi.all_finite()) throw NonFinite("field contains NaN or Inf");
}

inline void require_normalized(const WaveField& phi, const char* what) {
  if (std::abs(norm(phi) - 1.0) > 1e-10)
    throw InvalidArgument(std::string(what) + " requires a normalized field");
}

inline void require_model_grid(const WaveField& phi, const Model& m) {
  if (phi.grid().spec() != m.grid().spec()) throw GridMismatch("field and model grids differ");
}

}  // namespace detail

/// Energy from precomputed linear parts (-1/2 Delta phi, L_z phi).
inline EnergyBreakdown energy_from_parts(const WaveField& phi, const LinearParts& parts,
                                         const Model& m) {
  const double w = phi.grid().cell_volume();
  const auto& v = m.potential();
  double pot = 0.0;
  double quart = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double rho = std::norm(phi[i]);
    pot += v[i] * rho;
    quart += rho * rho;
  }
  EnergyBreakdown e;
  e.kinetic = real_inner(phi, parts.kinetic);
  e.potential = w * pot;
  e.interaction = 0.5 * m.eta() * w * quart;
  e.rotation = m.rotating() ? -m.omega() * real_inner(phi, parts.angular) : 0.0;
  e.total = e.kinetic + e.potential + e.interaction + e.rotation;
  return e;
}

/// E(phi) = int 1/2|grad phi|^2 + V|phi|^2 + eta/2 |phi|^4 - omega conj(phi) L_z phi.
inline EnergyBreakdown energy(const WaveField& phi, const Model& m, bool require_normalized = true) {
  detail::require_model_grid(phi, m);
  detail::require_finite(phi);
  if (require_normalized) detail::require_normalized(phi, "energy");
  return energy_from_parts(phi, linear_parts(phi, m.rotating()), m);
}

/// (-1/2 Delta + V + eta |density|^2 - omega L_z) phi.
///
/// One forward transform of phi, one inverse for Delta phi and, when
/// rotating, one paired inverse for L_z phi.
inline WaveField apply_hamiltonian(const WaveField& phi, const WaveField& density, const Model& m) {
  detail::require_model_grid(phi, m);
  phi.require_same_grid(density);
  const LinearParts parts = linear_parts(phi, m.rotating());
  WaveField out = parts.kinetic;
  const auto& v = m.potential();
  const double eta = m.eta();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += (v[i] + eta * std::norm(density[i])) * phi[i];
  if (m.rotating()) out.axpy(-m.omega(), parts.angular);
  return out;
}

inline WaveField apply_hamiltonian(const WaveField& phi, const Model& m) {
  return apply_hamiltonian(phi, phi, m);
}

/// grad E(phi) = 2 H_phi phi.
inline WaveField gradient(const WaveField& phi, const Model& m) {
  WaveField g = apply_hamiltonian(phi, phi, m);
  g *= 2.0;
  return g;
}

/// Second derivative of E at phi in direction f, d^2/dt^2 E(phi + t f) at t = 0:
/// 2 (Re<f, H_phi f> + eta sum |phi|^2 |f|^2 + eta Re sum conj(phi)^2 f^2) h^d.
inline double hessian_quadratic_form(const WaveField& phi, const WaveField& f, const Model& m) {
  phi.require_same_grid(f);
  const WaveField hf = apply_hamiltonian(f, phi, m);
  double quartic = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const cplx pf = std::conj(phi[i]) * f[i];
    quartic += std::norm(pf) + (pf * pf).real();
  }
  return 2.0 * (real_inner(f, hf) + m.eta() * phi.grid().cell_volume() * quartic);
}

/// lambda = Re <H_phi phi, phi>.
inline double chemical_potential(const WaveField& phi, const Model& m) {
  detail::require_normalized(phi, "chemical_potential");
  return real_inner(apply_hamiltonian(phi, phi, m), phi);
}

/// Characteristic energy int 1/2|grad phi|^2 + V|phi|^2 + eta|phi|^4, used as
/// the adaptive preconditioner shift.
inline double characteristic_energy(const EnergyBreakdown& e) {
  return e.kinetic + e.potential + 2.0 * e.interaction;
}

inline double characteristic_energy(const WaveField& phi, const Model& m) {
  return characteristic_energy(energy(phi, m));
}

}  // namespace gpe
