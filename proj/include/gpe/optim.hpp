#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gpe/io.hpp"
#include "gpe/precond.hpp"

namespace gpe {

enum class Method { pg, pcg };
enum class StopCriterion { energy, residual, iterate };

inline std::string_view to_string(Method m) { return m == Method::pg ? "pg" : "pcg"; }

inline std::string_view to_string(StopCriterion s) {
  switch (s) {
    case StopCriterion::energy: return "energy";
    case StopCriterion::residual: return "residual";
    case StopCriterion::iterate: return "iterate";
  }
  return "?";
}

inline StopCriterion parse_stop_criterion(std::string_view s) {
  if (s == "energy" || s == "energy_diff") return StopCriterion::energy;
  if (s == "residual" || s == "residual_inf") return StopCriterion::residual;
  if (s == "iterate" || s == "iterate_diff") return StopCriterion::iterate;
  throw InvalidArgument("unknown stopping criterion '" + std::string(s) + "'");
}

struct SolverConfig {
  Method method = Method::pcg;
  PreconditionerKind precond = PreconditionerKind::combined_sym;
  ShiftPolicy shift = ShiftPolicy::adaptive();
  StopCriterion stop = StopCriterion::energy;
  double tol = 1e-12;
  int max_iter = 10000;
  double theta_default = 0.1;
  double backtrack_factor = 0.5;
  int max_backtracks = 30;
  bool full_linesearch = false;
  /// Steps between exact recomputations of the cached -1/2 Delta phi, L_z phi.
  int refresh_interval = 100;
  /// Replaces the second-order stepsize by a constant trial angle.
  std::optional<double> fixed_theta;

  void validate() const {
    if (!(tol >= 0.0)) throw InvalidArgument("tolerance must be non-negative");
    if (max_iter < 0) throw InvalidArgument("max_iter must be non-negative");
    if (!(theta_default > 0.0)) throw InvalidArgument("theta_default must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw InvalidArgument("backtrack_factor must lie in (0, 1)");
    if (max_backtracks < 0) throw InvalidArgument("max_backtracks must be non-negative");
    if (refresh_interval < 1) throw InvalidArgument("refresh_interval must be positive");
    if (fixed_theta && !(*fixed_theta > 0.0)) throw InvalidArgument("fixed theta must be positive");
    if (shift.fixed && !(*shift.fixed > 0.0)) throw InvalidArgument("fixed shift must be positive");
  }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// One outer iteration: the state at iterate n and the step n -> n+1.
struct ConvergenceRecord {
  int n = 0;
  double energy = 0.0;      ///< E(phi_n)
  double lambda = 0.0;      ///< lambda_n
  double residual_inf = 0.0;
  double step_inf = 0.0;    ///< |phi_{n+1} - phi_n|_inf
  double delta_energy = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  int backtracks = 0;
  bool restart = false;
  std::size_t fft_count = 0;  ///< cumulative
  double wall_time = 0.0;     ///< cumulative seconds
  double norm_error = 0.0;    ///< ||phi_{n+1}|| - 1
  long inner_iters = 0;       ///< cumulative, implicit schemes only
};

enum class SolveStatus { converged, max_iter, stagnated };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::stagnated: return "stagnated";
  }
  return "?";
}

struct SolveResult {
  WaveField phi;
  std::vector<ConvergenceRecord> records;
  SolveStatus status = SolveStatus::max_iter;
  double energy = 0.0;
  double lambda = 0.0;
  double residual_inf = 0.0;
  std::size_t fft_count = 0;
  double wall_time = 0.0;
  long inner_iters = 0;

  int iterations() const noexcept { return static_cast<int>(records.size()); }
  bool converged() const noexcept { return status == SolveStatus::converged; }
};

/// Deterministic columns; wall time goes to a separate file.
inline std::string convergence_csv(const std::vector<ConvergenceRecord>& recs) {
  using io::format_double;
  std::string out =
      "n,energy,lambda,residual_inf,step_inf,delta_energy,theta,beta,backtracks,restart,"
      "fft_count,norm_error,inner_iters\n";
  for (const auto& r : recs) {
    out += std::to_string(r.n) + ',' + format_double(r.energy) + ',' + format_double(r.lambda) +
           ',' + format_double(r.residual_inf) + ',' + format_double(r.step_inf) + ',' +
           format_double(r.delta_energy) + ',' + format_double(r.theta) + ',' +
           format_double(r.beta) + ',' + std::to_string(r.backtracks) + ',' +
           (r.restart ? "1" : "0") + ',' + std::to_string(r.fft_count) + ',' +
           format_double(r.norm_error) + ',' + std::to_string(r.inner_iters) + '\n';
  }
  return out;
}

inline std::string timing_csv(const std::vector<ConvergenceRecord>& recs) {
  std::string out = "n,wall_time\n";
  for (const auto& r : recs) out += std::to_string(r.n) + ',' + io::format_double(r.wall_time) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Building blocks

/// r = H_phi phi - lambda phi with lambda = Re <H_phi phi, phi>.
inline std::pair<WaveField, double> residual(const WaveField& phi, const Model& m) {
  detail::require_normalized(phi, "residual");
  WaveField r = apply_hamiltonian(phi, phi, m);
  const double lambda = real_inner(r, phi);
  r.axpy(-lambda, phi);
  return {std::move(r), lambda};
}

/// d - Re<phi, d> phi.
inline WaveField tangent_project(WaveField d, const WaveField& phi) {
  d.axpy(-real_inner(phi, d), phi);
  return d;
}

struct ThetaEstimate {
  double theta = 0.0;
  double denom = 0.0;
};

/// Minimizer of the second-order model
/// E + t Re<grad E, p^> + t^2/2 (D^2E[p^,p^] - 2 lambda) along the geodesic.
/// Returns theta = 0 when the slope vanishes; callers check denom <= 0.
inline ThetaEstimate theta_opt(const WaveField& phi, const WaveField& p_dir, const WaveField& grad,
                               const Model& m, double lambda) {
  const double np = norm(p_dir);
  if (!(np > 0.0)) throw InvalidArgument("search direction is zero");
  const WaveField ph = (1.0 / np) * p_dir;
  const double num = -real_inner(grad, ph);
  const double denom = hessian_quadratic_form(phi, ph, m) - 2.0 * lambda;
  ThetaEstimate out;
  out.denom = denom;
  out.theta = num == 0.0 ? 0.0 : num / denom;
  return out;
}

/// cos(t) phi + sin(t) p / ||p||, renormalized.
inline WaveField step(const WaveField& phi, const WaveField& p_dir, double theta) {
  const double np = norm(p_dir);
  if (!(np > 0.0)) throw InvalidArgument("search direction is zero");
  WaveField out = std::cos(theta) * phi;
  out.axpy(std::sin(theta) / np, p_dir);
  normalize(out);
  return out;
}

namespace detail {

/// E(cos t phi + sin t p^) - E(phi), evaluated without cancellation.
///
/// With A = <phi, Q phi>, B = Re<phi, Q p^>, C = <p^, Q p^> for the quadratic
/// operator Q, the quadratic part changes by -s^2 A + 2 c s B + s^2 C, and
/// |psi|^2 - |phi|^2 = -s^2 |phi|^2 + 2 c s Re(conj(phi) p^) + s^2 |p^|^2.
struct GeodesicEnergy {
  double A = 0.0, B = 0.0, C = 0.0;
  double eta_w = 0.0;  // eta h^d
  std::vector<double> a, b, q;

  double delta(double theta) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    double d = -s * s * A + 2.0 * c * s * B + s * s * C;
    if (eta_w != 0.0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = -s * s * a[i] + 2.0 * c * s * b[i] + s * s * q[i];
        acc += diff * (diff + 2.0 * a[i]);
      }
      d += 0.5 * eta_w * acc;
    }
    return d;
  }

  double slope(double theta) const {
    const double s2 = std::sin(2.0 * theta);
    const double c2 = std::cos(2.0 * theta);
    double d = (C - A) * s2 + 2.0 * B * c2;
    if (eta_w != 0.0) {
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      double acc = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double rho = c * c * a[i] + 2.0 * c * s * b[i] + s * s * q[i];
        acc += rho * ((q[i] - a[i]) * s2 + 2.0 * b[i] * c2);
      }
      d += eta_w * acc;
    }
    return d;
  }
};

/// Quadratic operator Q = -1/2 Delta + V - omega L_z applied from cached parts.
inline WaveField quadratic_action(const WaveField& f, const WaveField& kin, const WaveField& ang,
                                  const Model& m) {
  WaveField out = kin;
  const auto& v = m.potential();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i] * f[i];
  if (m.rotating()) out.axpy(-m.omega(), ang);
  return out;
}

inline GeodesicEnergy geodesic_energy(const WaveField& phi, const WaveField& q_phi,
                                      const WaveField& ph, const WaveField& q_ph, const Model& m) {
  GeodesicEnergy g;
  g.A = real_inner(phi, q_phi);
  g.B = real_inner(ph, q_phi);
  g.C = real_inner(ph, q_ph);
  g.eta_w = m.eta() * phi.grid().cell_volume();
  if (g.eta_w != 0.0) {
    const std::size_t n = phi.size();
    g.a.resize(n);
    g.b.resize(n);
    g.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.a[i] = std::norm(phi[i]);
      g.b[i] = (std::conj(phi[i]) * ph[i]).real();
      g.q[i] = std::norm(ph[i]);
    }
  }
  return g;
}

/// Global minimizer of E along the half circle theta in (0, pi).
inline double minimize_geodesic(const GeodesicEnergy& g) {
  constexpr double pi = std::numbers::pi;
  if (g.eta_w == 0.0) {
    // -((C-A)/2) cos 2t + B sin 2t + const
    double u = std::atan2(-g.B, 0.5 * (g.C - g.A));
    if (u <= 0.0) u += 2.0 * pi;
    return 0.5 * u;
  }
  constexpr int samples = 64;
  const double h = pi / samples;
  int best = 1;
  double best_e = g.delta(h);
  for (int k = 2; k < samples; ++k) {
    const double e = g.delta(k * h);
    if (e < best_e) {
      best_e = e;
      best = k;
    }
  }
  double lo = (best - 1) * h;
  double hi = (best + 1) * h;
  if (!(g.slope(lo) < 0.0) || !(g.slope(hi) > 0.0)) return best * h;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (g.slope(mid) < 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  return g.delta(t) <= best_e ? t : best * h;
}

/// Everything the solver knows about the current iterate.
struct IterateState {
  WaveField phi, kin, ang;  // phi, -1/2 Delta phi, L_z phi
  EnergyBreakdown energy;
  WaveField h_phi;          // H_phi phi
  double lambda = 0.0;
  WaveField r;
};

inline void refresh_parts(IterateState& st, const Model& m) {
  LinearParts parts = linear_parts(st.phi, m.rotating());
  st.kin = std::move(parts.kinetic);
  st.ang = std::move(parts.angular);
}

inline void evaluate(IterateState& st, const Model& m) {
  st.energy = energy_from_parts(st.phi, LinearParts{st.kin, st.ang}, m);
  if (!std::isfinite(st.energy.total)) throw NonFinite("energy is not finite");
  st.h_phi = quadratic_action(st.phi, st.kin, st.ang, m);
  const double eta = m.eta();
  for (std::size_t i = 0; i < st.phi.size(); ++i)
    st.h_phi[i] += eta * std::norm(st.phi[i]) * st.phi[i];
  st.lambda = real_inner(st.h_phi, st.phi);
  st.r = st.h_phi;
  st.r.axpy(-st.lambda, st.phi);
}

inline double max_abs_diff(const WaveField& a, const WaveField& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

}  // namespace detail

/// argmin over theta in (0, pi) of E(cos theta phi + sin theta p / ||p||).
inline double linesearch_full(const WaveField& phi, const WaveField& p_dir, const Model& m) {
  const double np = norm(p_dir);
  if (!(np > 0.0)) throw InvalidArgument("search direction is zero");
  const WaveField ph = (1.0 / np) * p_dir;
  const LinearParts pp = linear_parts(phi, m.rotating());
  const LinearParts pq = linear_parts(ph, m.rotating());
  const auto g = detail::geodesic_energy(phi, detail::quadratic_action(phi, pp.kinetic, pp.angular, m),
                                         ph, detail::quadratic_action(ph, pq.kinetic, pq.angular, m), m);
  return detail::minimize_geodesic(g);
}

/// Whether the configured criterion is met by the last record.
inline bool check_stop(const std::vector<ConvergenceRecord>& history, const SolverConfig& cfg) {
  if (history.empty()) return false;
  const auto& r = history.back();
  switch (cfg.stop) {
    case StopCriterion::energy: return std::abs(r.delta_energy) <= cfg.tol;
    case StopCriterion::iterate: return r.step_inf <= cfg.tol;
    case StopCriterion::residual: return r.residual_inf <= cfg.tol;
  }
  return false;
}

/// First record index at which each criterion would have fired, or -1.
struct StopTriggers {
  int energy = -1;
  int residual = -1;
  int iterate = -1;
};

inline StopTriggers first_triggers(const std::vector<ConvergenceRecord>& history, double tol) {
  StopTriggers t;
  for (const auto& r : history) {
    if (t.energy < 0 && std::abs(r.delta_energy) <= tol) t.energy = r.n;
    if (t.residual < 0 && r.residual_inf <= tol) t.residual = r.n;
    if (t.iterate < 0 && r.step_inf <= tol) t.iterate = r.n;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Solvers

namespace detail {

inline SolveResult riemannian_descent(const WaveField& phi0, const Model& m, SolverConfig cfg,
                                      bool conjugate) {
  cfg.validate();
  require_model_grid(phi0, m);
  require_finite(phi0);
  require_normalized(phi0, "solver");

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const Grid& grid = m.grid();
  const std::size_t fft0 = grid.transform_count();
  const bool rot = m.rotating();

  IterateState st;
  st.phi = phi0;
  refresh_parts(st, m);
  evaluate(st, m);

  SolveResult res;
  res.status = SolveStatus::max_iter;

  // previous direction and its operator parts, plus PR bookkeeping
  WaveField p_prev, p_prev_kin, p_prev_ang;
  WaveField r_prev;
  double rs_prev = 0.0;
  bool have_prev = false;
  bool force_restart = true;
  int since_refresh = 0;

  for (int n = 0; n < cfg.max_iter; ++n) {
    ConvergenceRecord rec;
    rec.n = n;
    rec.energy = st.energy.total;
    rec.lambda = st.lambda;
    rec.residual_inf = max_abs(st.r);

    if (cfg.stop == StopCriterion::residual && rec.residual_inf <= cfg.tol) {
      res.status = SolveStatus::converged;
      break;
    }

    const Preconditioner P = build_preconditioner(cfg.precond, cfg.shift, st.phi, m, &st.energy);
    PreconditionedDirection s = P.apply_with_operators(st.r, rot);
    const double rs = real_inner(st.r, s.value);

    // d = -P r + beta p_prev
    double beta = 0.0;
    bool restart = !conjugate || force_restart || !have_prev || !(norm(p_prev) > 0.0);
    if (!restart && rs_prev > 0.0) {
      WaveField dr = st.r;
      dr -= r_prev;
      beta = std::max(0.0, real_inner(dr, s.value) / rs_prev);
    }

    auto make_dir = [&](double b, WaveField& d, WaveField& dk, WaveField& da) {
      d = -1.0 * s.value;
      dk = -1.0 * s.kinetic;
      da = -1.0 * s.angular;
      if (b != 0.0) {
        d.axpy(b, p_prev);
        dk.axpy(b, p_prev_kin);
        da.axpy(b, p_prev_ang);
      }
      const double c = real_inner(st.phi, d);
      d.axpy(-c, st.phi);
      dk.axpy(-c, st.kin);
      da.axpy(-c, st.ang);
    };

    WaveField p, pk, pa;
    make_dir(beta, p, pk, pa);
    if (beta > 0.0 && !(real_inner(st.r, p) < 0.0)) {
      beta = 0.0;
      restart = true;
      make_dir(0.0, p, pk, pa);
    }
    if (!(real_inner(st.r, p) < 0.0)) {
      // P is not positive on r (non-symmetric combined kinds): fall back to -r.
      p = -1.0 * st.r;
      LinearParts parts = linear_parts(p, rot);
      pk = std::move(parts.kinetic);
      pa = std::move(parts.angular);
      beta = 0.0;
      restart = true;
    }

    const double np = norm(p);
    if (!(np > 0.0)) {
      res.status = SolveStatus::converged;
      break;
    }
    const double inv = 1.0 / np;
    WaveField ph = inv * p;
    WaveField phk = inv * pk;
    WaveField pha = inv * pa;

    const WaveField q_phi = quadratic_action(st.phi, st.kin, st.ang, m);
    const WaveField q_ph = quadratic_action(ph, phk, pha, m);
    const GeodesicEnergy geo = geodesic_energy(st.phi, q_phi, ph, q_ph, m);

    double theta;
    if (cfg.fixed_theta) {
      theta = *cfg.fixed_theta;
    } else if (cfg.full_linesearch) {
      theta = minimize_geodesic(geo);
    } else {
      // slope 2 Re<r, p^>; curvature D^2E[p^,p^] - 2 lambda from the cached parts
      const double slope = 2.0 * real_inner(st.r, ph);
      double quartic = 0.0;
      for (std::size_t i = 0; i < ph.size(); ++i) {
        const cplx pf = std::conj(st.phi[i]) * ph[i];
        quartic += 2.0 * std::norm(pf) + (pf * pf).real();
      }
      const double curv =
          2.0 * (geo.C + m.eta() * grid.cell_volume() * quartic) - 2.0 * st.lambda;
      theta = curv > 0.0 ? -slope / curv : cfg.theta_default;
      if (!(theta > 0.0)) theta = cfg.theta_default;
    }
    theta = std::min(theta, std::numbers::pi / 2.0);

    double de = geo.delta(theta);
    int bt = 0;
    while (!(de < 0.0) && bt < cfg.max_backtracks) {
      theta *= cfg.backtrack_factor;
      de = geo.delta(theta);
      ++bt;
    }
    rec.theta = theta;
    rec.beta = beta;
    rec.backtracks = bt;
    rec.restart = restart;

    if (!(de < 0.0)) {
      rec.fft_count = grid.transform_count() - fft0;
      rec.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
      res.records.push_back(rec);
      res.status = SolveStatus::stagnated;
      break;
    }

    // accept: phi <- c phi + s p^, parts by linearity
    const double c = std::cos(theta);
    const double sn = std::sin(theta);
    WaveField next = c * st.phi;
    next.axpy(sn, ph);
    WaveField next_kin = c * st.kin;
    next_kin.axpy(sn, phk);
    WaveField next_ang = c * st.ang;
    next_ang.axpy(sn, pha);
    const double nn = norm(next);
    rec.norm_error = nn - 1.0;
    next *= 1.0 / nn;
    next_kin *= 1.0 / nn;
    next_ang *= 1.0 / nn;
    rec.step_inf = max_abs_diff(next, st.phi);

    // keep the transported direction for the next conjugate step
    r_prev = st.r;
    rs_prev = rs;
    p_prev = std::move(p);
    p_prev_kin = std::move(pk);
    p_prev_ang = std::move(pa);
    have_prev = true;
    force_restart = bt >= 2;

    st.phi = std::move(next);
    st.kin = std::move(next_kin);
    st.ang = std::move(next_ang);
    if (++since_refresh >= cfg.refresh_interval) {
      refresh_parts(st, m);
      since_refresh = 0;
    }
    evaluate(st, m);
    // exact geodesic difference; the recomputed total agrees up to roundoff
    rec.delta_energy = de;

    rec.fft_count = grid.transform_count() - fft0;
    rec.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
    res.records.push_back(rec);
    if (cfg.stop != StopCriterion::residual && check_stop(res.records, cfg)) {
      res.status = SolveStatus::converged;
      break;
    }
  }

  res.phi = std::move(st.phi);
  res.energy = st.energy.total;
  res.lambda = st.lambda;
  res.residual_inf = max_abs(st.r);
  res.fft_count = grid.transform_count() - fft0;
  res.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
  return res;
}

}  // namespace detail

/// Preconditioned Riemannian gradient descent on the unit sphere.
inline SolveResult solve_pg(const WaveField& phi0, const Model& m, const SolverConfig& cfg) {
  return detail::riemannian_descent(phi0, m, cfg, false);
}

/// Preconditioned nonlinear conjugate gradient on the unit sphere with a
/// nonnegative Polak-Ribiere coefficient and a descent safeguard.
inline SolveResult solve_pcg(const WaveField& phi0, const Model& m, const SolverConfig& cfg) {
  return detail::riemannian_descent(phi0, m, cfg, true);
}

inline SolveResult solve(const WaveField& phi0, const Model& m, const SolverConfig& cfg) {
  return cfg.method == Method::pg ? solve_pg(phi0, m, cfg) : solve_pcg(phi0, m, cfg);
}

}  // namespace gpe
