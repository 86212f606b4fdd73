#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpe/model.hpp"

namespace gpe {

enum class PreconditionerKind {
  identity,
  kinetic,       ///< P_D = (a - Delta/2)^-1
  potential,     ///< P_V = (a + V + eta |phi_n|^2)^-1
  combined1,     ///< P_V P_D
  combined2,     ///< P_D P_V
  combined_sym,  ///< P_V^1/2 P_D P_V^1/2
};

inline std::string_view to_string(PreconditionerKind k) {
  switch (k) {
    case PreconditionerKind::identity: return "identity";
    case PreconditionerKind::kinetic: return "kinetic";
    case PreconditionerKind::potential: return "potential";
    case PreconditionerKind::combined1: return "c1";
    case PreconditionerKind::combined2: return "c2";
    case PreconditionerKind::combined_sym: return "sym";
  }
  return "?";
}

inline PreconditionerKind parse_preconditioner_kind(std::string_view s) {
  for (auto k : {PreconditionerKind::identity, PreconditionerKind::kinetic,
                 PreconditionerKind::potential, PreconditionerKind::combined1,
                 PreconditionerKind::combined2, PreconditionerKind::combined_sym})
    if (s == to_string(k)) return k;
  if (s == "none" || s == "I") return PreconditionerKind::identity;
  if (s == "delta") return PreconditionerKind::kinetic;
  if (s == "V") return PreconditionerKind::potential;
  if (s == "C" || s == "combined") return PreconditionerKind::combined_sym;
  throw InvalidArgument("unknown preconditioner '" + std::string(s) + "'");
}

/// Hermitian positive definite for identity, kinetic, potential, combined_sym.
inline bool is_symmetric(PreconditionerKind k) noexcept {
  return k != PreconditionerKind::combined1 && k != PreconditionerKind::combined2;
}

/// Adaptive: shift equals the characteristic energy of the current iterate.
struct ShiftPolicy {
  std::optional<double> fixed;

  static ShiftPolicy adaptive() { return {}; }
  static ShiftPolicy fixed_at(double alpha) { return {alpha}; }
  bool is_adaptive() const noexcept { return !fixed.has_value(); }
  friend bool operator==(const ShiftPolicy&, const ShiftPolicy&) = default;
};

/// Preconditioned vector together with the linear operator parts the
/// optimizer needs to apply H to it without further transforms.
struct PreconditionedDirection {
  WaveField value;    ///< s = P r
  WaveField kinetic;  ///< -1/2 Delta s
  WaveField angular;  ///< L_z s, zero unless requested
};

/// Shifted diagonal preconditioner frozen at one iterate.
class Preconditioner {
 public:
  Preconditioner(PreconditionerKind kind, double alpha, const WaveField& phi_n, const Model& m)
      : kind_(kind), alpha_(alpha), grid_(phi_n.grid_ptr()) {
    detail::require_model_grid(phi_n, m);
    if (kind_ == PreconditionerKind::identity) return;
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
      throw InvalidArgument("preconditioner shift must be positive");
    const auto& v = m.potential();
    if (uses_real_diagonal()) {
      real_diag_.resize(phi_n.size());
      for (std::size_t i = 0; i < real_diag_.size(); ++i) {
        const double den = alpha_ + v[i] + m.eta() * std::norm(phi_n[i]);
        if (!(den > 0.0)) throw InvalidArgument("potential preconditioner is not positive");
        real_diag_[i] = 1.0 / den;
      }
      if (kind_ == PreconditionerKind::combined_sym) {
        sqrt_diag_.resize(real_diag_.size());
        for (std::size_t i = 0; i < sqrt_diag_.size(); ++i) sqrt_diag_[i] = std::sqrt(real_diag_[i]);
      }
    }
    if (uses_fourier_diagonal()) {
      const auto k2 = grid_->wavenumber_squared();
      fourier_diag_.resize(k2.size());
      for (std::size_t i = 0; i < k2.size(); ++i) fourier_diag_[i] = 1.0 / (alpha_ + 0.5 * k2[i]);
    }
  }

  PreconditionerKind kind() const noexcept { return kind_; }
  double shift() const noexcept { return alpha_; }
  const RealArray& real_diagonal() const noexcept { return real_diag_; }
  const RealArray& fourier_diagonal() const noexcept { return fourier_diag_; }

  /// P r.
  WaveField apply(const WaveField& r) const {
    require_grid(r);
    switch (kind_) {
      case PreconditionerKind::identity: return r;
      case PreconditionerKind::kinetic: return kinetic_solve(r);
      case PreconditionerKind::potential: return scaled(r, real_diag_);
      case PreconditionerKind::combined1: return scaled(kinetic_solve(r), real_diag_);
      case PreconditionerKind::combined2: return kinetic_solve(scaled(r, real_diag_));
      case PreconditionerKind::combined_sym:
        return scaled(kinetic_solve(scaled(r, sqrt_diag_)), sqrt_diag_);
    }
    return r;
  }

  /// P r plus -1/2 Delta (P r) and, if `with_rotation`, L_z (P r).
  ///
  /// When P_D is the last factor its resolvent gives the kinetic part for
  /// free: (a - Delta/2) s = t implies -1/2 Delta s = t - a s, and the
  /// spectrum of s is already at hand for L_z. Otherwise s is transformed
  /// once more.
  PreconditionedDirection apply_with_operators(const WaveField& r, bool with_rotation) const {
    require_grid(r);
    switch (kind_) {
      case PreconditionerKind::kinetic: return resolvent_direction(r, with_rotation);
      case PreconditionerKind::combined2:
        return resolvent_direction(scaled(r, real_diag_), with_rotation);
      default: break;
    }
    WaveField s = apply(r);
    LinearParts parts = linear_parts(s, with_rotation);
    return {std::move(s), std::move(parts.kinetic), std::move(parts.angular)};
  }

 private:
  bool uses_real_diagonal() const noexcept {
    return kind_ != PreconditionerKind::identity && kind_ != PreconditionerKind::kinetic;
  }
  bool uses_fourier_diagonal() const noexcept {
    return kind_ != PreconditionerKind::identity && kind_ != PreconditionerKind::potential;
  }

  void require_grid(const WaveField& r) const {
    if (r.grid().spec() != grid_->spec()) throw GridMismatch("preconditioner built on another grid");
  }

  static WaveField scaled(WaveField r, const RealArray& diag) {
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= diag[i];
    return r;
  }

  Spectrum kinetic_spectrum(const WaveField& t) const {
    Spectrum s = forward_transform(t);
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) s.coeffs[i] *= fourier_diag_[i];
    return s;
  }

  WaveField kinetic_solve(const WaveField& t) const { return inverse_transform(kinetic_spectrum(t)); }

  PreconditionedDirection resolvent_direction(const WaveField& t, bool with_rotation) const {
    const Spectrum spec = kinetic_spectrum(t);
    WaveField angular = with_rotation ? lz_from_spectrum(spec) : WaveField(grid_);
    WaveField s = inverse_transform(spec);
    WaveField kinetic = t;
    kinetic.axpy(-alpha_, s);
    return {std::move(s), std::move(kinetic), std::move(angular)};
  }

  PreconditionerKind kind_;
  double alpha_;
  GridPtr grid_;
  RealArray real_diag_;
  RealArray sqrt_diag_;
  RealArray fourier_diag_;
};

/// Builds P at phi_n. The adaptive shift is the characteristic energy; pass
/// `breakdown` when the energy of phi_n is already known to avoid recomputing it.
inline Preconditioner build_preconditioner(PreconditionerKind kind, const ShiftPolicy& policy,
                                           const WaveField& phi_n, const Model& m,
                                           const EnergyBreakdown* breakdown = nullptr) {
  double alpha = 1.0;
  if (kind != PreconditionerKind::identity) {
    if (policy.fixed) {
      alpha = *policy.fixed;
    } else {
      alpha = breakdown ? characteristic_energy(*breakdown) : characteristic_energy(phi_n, m);
    }
  }
  return Preconditioner(kind, alpha, phi_n, m);
}

}  // namespace gpe
