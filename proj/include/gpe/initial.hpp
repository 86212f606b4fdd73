#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

#include "gpe/model.hpp"

namespace gpe {

/// Thomas-Fermi chemical potential from the trap frequencies.
inline double thomas_fermi_mu(int dim, double eta, const PotentialSpec& pot) {
  if (!(eta > 0.0)) throw InvalidArgument("Thomas-Fermi initial data requires eta > 0");
  if (pot.kind == PotentialKind::free) throw InvalidArgument("Thomas-Fermi initial data needs a trap");
  const auto g = pot.thomas_fermi_gamma(dim);
  switch (dim) {
    case 1: return 0.5 * std::pow(3.0 * eta * g[0], 2.0 / 3.0);
    case 2: return 0.5 * std::sqrt(4.0 * eta * g[0] * g[1]);
    case 3: return 0.5 * std::pow(15.0 * eta * g[0] * g[1] * g[2], 0.4);
    default: throw UnsupportedDimension("dimension must be 1, 2 or 3");
  }
}

/// Normalized sqrt(max(mu_TF - V, 0) / eta).
inline WaveField thomas_fermi_initial(const Model& m) {
  const double eta = m.eta();
  const double mu = thomas_fermi_mu(m.grid().dim(), eta, m.params().potential);
  WaveField phi(m.grid_ptr());
  const auto& v = m.potential();
  bool any = false;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (v[i] < mu) {
      phi[i] = std::sqrt((mu - v[i]) / eta);
      any = true;
    }
  }
  if (!any) throw InvalidArgument("trap exceeds the Thomas-Fermi chemical potential everywhere");
  normalize(phi);
  return phi;
}

enum class InitialKind { a, b, b_bar, c, c_bar, d, d_bar, e, e_bar, thomas_fermi, gaussian, random };

inline std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::a: return "a";
    case InitialKind::b: return "b";
    case InitialKind::b_bar: return "bbar";
    case InitialKind::c: return "c";
    case InitialKind::c_bar: return "cbar";
    case InitialKind::d: return "d";
    case InitialKind::d_bar: return "dbar";
    case InitialKind::e: return "e";
    case InitialKind::e_bar: return "ebar";
    case InitialKind::thomas_fermi: return "tf";
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::random: return "random";
  }
  return "?";
}

inline InitialKind parse_initial_kind(std::string_view s) {
  for (auto k : {InitialKind::a, InitialKind::b, InitialKind::b_bar, InitialKind::c,
                 InitialKind::c_bar, InitialKind::d, InitialKind::d_bar, InitialKind::e,
                 InitialKind::e_bar, InitialKind::thomas_fermi, InitialKind::gaussian,
                 InitialKind::random})
    if (s == to_string(k)) return k;
  if (s == "f") return InitialKind::thomas_fermi;
  throw InvalidArgument("unknown initial guess '" + std::string(s) + "'");
}

namespace detail {

inline WaveField vortex_free(const GridPtr& g) {
  return WaveField::sample(g, [](double x, double y) {
    return cplx(std::exp(-0.5 * (x * x + y * y)) / std::sqrt(std::numbers::pi));
  });
}

inline WaveField unit_vortex(const GridPtr& g) {
  return WaveField::sample(g, [](double x, double y) {
    return cplx(x, y) * std::exp(-0.5 * (x * x + y * y)) / std::sqrt(std::numbers::pi);
  });
}

inline WaveField mixture(const GridPtr& g, double wa, double wb) {
  WaveField out = wa * vortex_free(g);
  out.axpy(wb, unit_vortex(g));
  return normalized(std::move(out));
}

/// Gaussian envelope modulated by a few random low Fourier modes.
inline WaveField random_smooth(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int d = g->dim();
  const double k0 = std::numbers::pi / g->half_width();
  struct Mode {
    std::array<int, 3> k;
    cplx c;
  };
  std::vector<Mode> modes;
  for (int n = 0; n < 6; ++n) {
    Mode md{{0, 0, 0}, cplx(u(rng), u(rng))};
    for (int a = 0; a < d; ++a) md.k[a] = static_cast<int>(std::lround(3.0 * u(rng)));
    modes.push_back(md);
  }
  WaveField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double r2 = 0.0;
    cplx s = 1.0;
    for (const auto& md : modes) {
      double ph = 0.0;
      for (int a = 0; a < d; ++a) ph += md.k[a] * k0 * g->coordinate(a)[i];
      s += 0.5 * md.c * std::exp(cplx(0.0, ph));
    }
    for (int a = 0; a < d; ++a) r2 += g->coordinate(a)[i] * g->coordinate(a)[i];
    out[i] = s * std::exp(-0.5 * r2);
  }
  return normalized(std::move(out));
}

}  // namespace detail

/// Named initial data. Kinds a through e_bar are two-dimensional; gaussian,
/// random and thomas_fermi work in any dimension.
inline WaveField initial_guess(InitialKind kind, const Model& m, std::uint64_t seed = 0) {
  const GridPtr& g = m.grid_ptr();
  const double w = m.params().omega;
  switch (kind) {
    case InitialKind::thomas_fermi: return thomas_fermi_initial(m);
    case InitialKind::random: return detail::random_smooth(g, seed);
    case InitialKind::gaussian:
      return normalized(WaveField::sample(g, [](auto... xs) {
        const double r2 = ((xs * xs) + ...);
        return cplx(std::exp(-0.5 * r2));
      }));
    default: break;
  }
  if (g->dim() != 2)
    throw UnsupportedDimension("initial guess '" + std::string(to_string(kind)) + "' is 2D only");
  switch (kind) {
    case InitialKind::a: return normalized(detail::vortex_free(g));
    case InitialKind::b: return normalized(detail::unit_vortex(g));
    case InitialKind::b_bar: return normalized(detail::unit_vortex(g)).conj();
    case InitialKind::c: return detail::mixture(g, 0.5, 0.5);
    case InitialKind::c_bar: return detail::mixture(g, 0.5, 0.5).conj();
    case InitialKind::d: return detail::mixture(g, 1.0 - w, w);
    case InitialKind::d_bar: return detail::mixture(g, 1.0 - w, w).conj();
    case InitialKind::e: return detail::mixture(g, w, 1.0 - w);
    case InitialKind::e_bar: return detail::mixture(g, w, 1.0 - w).conj();
    default: break;
  }
  throw InvalidArgument("unsupported initial guess");
}

}  // namespace gpe
