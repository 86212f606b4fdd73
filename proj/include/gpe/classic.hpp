#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gpe/initial.hpp"
#include "gpe/optim.hpp"

namespace gpe {

enum class SchemeKind { fe, fe_lambda, be, be_lambda, cn, cn_lambda };

inline std::string_view to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::fe: return "fe";
    case SchemeKind::fe_lambda: return "fe_lambda";
    case SchemeKind::be: return "be";
    case SchemeKind::be_lambda: return "be_lambda";
    case SchemeKind::cn: return "cn";
    case SchemeKind::cn_lambda: return "cn_lambda";
  }
  return "?";
}

inline SchemeKind parse_scheme_kind(std::string_view s) {
  for (auto k : {SchemeKind::fe, SchemeKind::fe_lambda, SchemeKind::be, SchemeKind::be_lambda,
                 SchemeKind::cn, SchemeKind::cn_lambda})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown scheme '" + std::string(s) + "'");
}

inline bool is_implicit(SchemeKind k) noexcept { return k != SchemeKind::fe && k != SchemeKind::fe_lambda; }

inline bool uses_lambda(SchemeKind k) noexcept {
  return k == SchemeKind::fe_lambda || k == SchemeKind::be_lambda || k == SchemeKind::cn_lambda;
}

struct SchemeConfig {
  SchemeKind kind = SchemeKind::be_lambda;
  double dt = 0.01;
  double inner_tol = 1e-10;
  int inner_max_iter = 2000;
  PreconditionerKind precond = PreconditionerKind::kinetic;
  /// Unset: 1/dt for BE and 2/dt for CN, matching the diagonal of the system.
  std::optional<double> shift;

  void validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
    if (!(inner_tol > 0.0)) throw InvalidArgument("inner tolerance must be positive");
    if (inner_max_iter < 1) throw InvalidArgument("inner_max_iter must be positive");
    if (!is_symmetric(precond))
      throw InvalidArgument("MINRES needs a Hermitian positive definite preconditioner");
    if (shift && !(*shift > 0.0)) throw InvalidArgument("preconditioner shift must be positive");
  }

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

// ---------------------------------------------------------------------------
// MINRES

using LinearOperator = std::function<WaveField(const WaveField&)>;

struct KrylovResult {
  WaveField x;
  int iterations = 0;
  double relative_residual = 0.0;        ///< true ||Ax - b|| / ||b||
  std::vector<double> residual_history;  ///< preconditioned residual estimates
};

namespace detail {

/// One preconditioned MINRES sweep for A x = b from x = 0, stopping when the
/// P-norm residual estimate drops below `rtol` times its initial value.
inline int minres_sweep(const LinearOperator& A, const WaveField& b, const LinearOperator& P,
                        double rtol, int max_iter, WaveField& x, std::vector<double>& history) {
  x = WaveField(b.grid_ptr());
  WaveField r1 = b;
  WaveField y = P(r1);
  double beta1 = real_inner(r1, y);
  if (beta1 < 0.0) throw SolverFailure("preconditioner is not positive definite", norm(b));
  beta1 = std::sqrt(beta1);
  if (beta1 == 0.0) return 0;

  WaveField r2 = r1;
  WaveField w(b.grid_ptr()), w1(b.grid_ptr()), w2(b.grid_ptr());
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  history.push_back(phibar);

  int itn = 0;
  while (itn < max_iter) {
    ++itn;
    const double s = 1.0 / beta;
    WaveField v = s * y;
    y = A(v);
    if (itn >= 2) y.axpy(-beta / oldb, r1);
    const double alfa = real_inner(v, y);
    y.axpy(-alfa / beta, r2);
    r1 = std::move(r2);
    r2 = y;
    y = P(r2);
    oldb = beta;
    double b2 = real_inner(r2, y);
    if (b2 < 0.0) throw SolverFailure("preconditioner is not positive definite", phibar);
    beta = std::sqrt(b2);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = std::move(w2);
    w2 = std::move(w);
    w = v;
    w.axpy(-oldeps, w1);
    w.axpy(-delta, w2);
    w *= 1.0 / gamma;
    x.axpy(phi, w);
    history.push_back(phibar);

    if (phibar <= rtol * beta1 || beta == 0.0) break;
  }
  return itn;
}

}  // namespace detail

/// Preconditioned MINRES for Hermitian A and Hermitian positive definite P,
/// both with respect to Re<.,.>. Restarts from the current iterate while the
/// true relative residual exceeds `tol`.
inline KrylovResult krylov_solve(const LinearOperator& A, const WaveField& b, const LinearOperator& P,
                                 double tol, int max_iter) {
  KrylovResult out;
  out.x = WaveField(b.grid_ptr());
  const double nb = norm(b);
  if (nb == 0.0) return out;
  WaveField r = b;
  double rel = 1.0;
  for (int restart = 0; restart < 8; ++restart) {
    const int budget = max_iter - out.iterations;
    if (budget <= 0) break;
    WaveField e;
    const int it = detail::minres_sweep(A, r, P, 0.5 * tol * nb / norm(r), budget, e,
                                        out.residual_history);
    out.iterations += it;
    out.x += e;
    r = b;
    r -= A(out.x);
    rel = norm(r) / nb;
    if (rel <= tol) break;
    if (it == 0) break;
  }
  out.relative_residual = rel;
  if (!(rel <= tol))
    throw SolverFailure("MINRES did not reach the requested tolerance", rel);
  return out;
}

// ---------------------------------------------------------------------------
// Imaginary-time schemes

struct ImaginaryTimeStep {
  WaveField phi;               ///< normalized phi_{n+1}
  double pre_norm = 1.0;       ///< ||phi~_{n+1}|| before projection
  double lambda = 0.0;         ///< lambda(phi_n)
  int inner_iters = 0;
};

/// One step of FE, BE or CN, with or without the lambda term, followed by
/// normalization. The nonlinear density is frozen at phi_n.
inline ImaginaryTimeStep imaginary_time_step(const WaveField& phi_n, const SchemeConfig& sc,
                                             const Model& m) {
  sc.validate();
  detail::require_model_grid(phi_n, m);
  detail::require_finite(phi_n);
  detail::require_normalized(phi_n, "imaginary_time_step");

  const double dt = sc.dt;
  const WaveField h_phi = apply_hamiltonian(phi_n, phi_n, m);
  const double lambda = real_inner(h_phi, phi_n);
  const double lam = uses_lambda(sc.kind) ? lambda : 0.0;

  ImaginaryTimeStep out;
  out.lambda = lambda;
  WaveField next;

  if (!is_implicit(sc.kind)) {
    next = phi_n;
    next.axpy(-dt, h_phi);
    next.axpy(dt * lam, phi_n);
  } else {
    const bool cn = sc.kind == SchemeKind::cn || sc.kind == SchemeKind::cn_lambda;
    const double half = cn ? 0.5 : 1.0;
    // (I/dt + half (H - lam)) x = rhs
    LinearOperator A = [&](const WaveField& v) {
      WaveField a = apply_hamiltonian(v, phi_n, m);
      a *= half;
      a.axpy(1.0 / dt - half * lam, v);
      return a;
    };
    WaveField rhs = (1.0 / dt) * phi_n;
    if (cn) {
      rhs.axpy(-0.5, h_phi);
      rhs.axpy(0.5 * lam, phi_n);
    }
    const ShiftPolicy shift = ShiftPolicy::fixed_at(sc.shift ? *sc.shift : 1.0 / (half * dt));
    const Preconditioner pre = build_preconditioner(sc.precond, shift, phi_n, m);
    LinearOperator P = [&](const WaveField& r) { return pre.apply(r); };
    KrylovResult k = krylov_solve(A, rhs, P, sc.inner_tol, sc.inner_max_iter);
    out.inner_iters = k.iterations;
    next = std::move(k.x);
  }
  if (!next.all_finite()) throw NonFinite("imaginary-time iterate is not finite");
  out.pre_norm = normalize(next);
  out.phi = std::move(next);
  return out;
}

/// Outer imaginary-time loop with the optimizer's stopping criteria.
inline SolveResult run_imaginary_time(const WaveField& phi0, const SchemeConfig& sc, const Model& m,
                                      StopCriterion stop, double tol, int max_iter) {
  sc.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const std::size_t fft0 = m.grid().transform_count();

  SolverConfig stop_cfg;
  stop_cfg.stop = stop;
  stop_cfg.tol = tol;

  SolveResult res;
  WaveField phi = phi0;
  auto [r, lambda] = residual(phi, m);
  double e = energy(phi, m).total;
  const double e0 = e;
  int rising = 0;

  for (int n = 0; n < max_iter; ++n) {
    ConvergenceRecord rec;
    rec.n = n;
    rec.energy = e;
    rec.lambda = lambda;
    rec.residual_inf = max_abs(r);
    if (stop == StopCriterion::residual && rec.residual_inf <= tol) {
      res.status = SolveStatus::converged;
      break;
    }
    ImaginaryTimeStep st = imaginary_time_step(phi, sc, m);
    res.inner_iters += st.inner_iters;
    rec.step_inf = detail::max_abs_diff(st.phi, phi);
    rec.norm_error = norm(st.phi) - 1.0;
    phi = std::move(st.phi);
    const double e_next = energy(phi, m).total;
    rec.delta_energy = e_next - e;
    rising = rec.delta_energy > 0.0 ? rising + 1 : 0;
    e = e_next;
    std::tie(r, lambda) = residual(phi, m);
    rec.inner_iters = res.inner_iters;
    rec.fft_count = m.grid().transform_count() - fft0;
    rec.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
    res.records.push_back(rec);

    if (!std::isfinite(e) || e > e0 + 10.0 * std::abs(e0) + 1.0 ||
        (rising >= 20 && e > e0))
      throw SolverFailure("imaginary-time iteration diverged", max_abs(r));
    if (stop != StopCriterion::residual && check_stop(res.records, stop_cfg)) {
      res.status = SolveStatus::converged;
      break;
    }
  }
  res.phi = std::move(phi);
  res.energy = e;
  res.lambda = lambda;
  res.residual_inf = max_abs(r);
  res.fft_count = m.grid().transform_count() - fft0;
  res.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
  return res;
}

// ---------------------------------------------------------------------------
// Linear analysis

/// Amplification factor of one step of a lambda-free scheme for eigenvalue l.
inline double amplification_factor(SchemeKind k, double dt, double l) {
  switch (k) {
    case SchemeKind::fe:
    case SchemeKind::fe_lambda: return 1.0 - dt * l;
    case SchemeKind::be:
    case SchemeKind::be_lambda: return 1.0 / (1.0 + dt * l);
    case SchemeKind::cn:
    case SchemeKind::cn_lambda: return (1.0 - 0.5 * dt * l) / (1.0 + 0.5 * dt * l);
  }
  return 0.0;
}

struct SpectralTransformReport {
  Eigen::VectorXd eigenvalues;      ///< of H, ascending
  Eigen::VectorXd amplification;    ///< mu_i in the same order
  int dominant = 0;                 ///< index of the largest |mu|
  double predicted_rate = 0.0;      ///< second largest |mu| over largest
  double observed_rate = 0.0;       ///< fitted decay of the error angle
  bool degenerate = false;
  std::vector<double> error_angles;
  std::vector<double> rqi_residuals;  ///< only in demo mode
};

namespace detail {

/// Least-squares slope of log(y) against n over the later half of the
/// entries inside (lo, hi); earlier ones still carry faster modes.
inline double log_linear_rate(const std::vector<double>& y, double lo, double hi) {
  std::vector<std::size_t> idx;
  for (std::size_t n = 0; n < y.size(); ++n)
    if (y[n] > lo && y[n] < hi) idx.push_back(n);
  if (idx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t k = std::min(idx.size() / 2, idx.size() - 3); k < idx.size(); ++k) {
    const double x = static_cast<double>(idx[k]);
    const double v = std::log(y[idx[k]]);
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
    ++cnt;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace detail

/// Power-iteration view of a linear imaginary-time scheme for dense Hermitian H.
inline SpectralTransformReport amplification_analysis(const Eigen::MatrixXcd& H, SchemeKind scheme,
                                                      double dt, int iterations = 200,
                                                      std::uint64_t seed = 1, bool rqi_demo = false) {
  const Eigen::Index n = H.rows();
  if (n != H.cols() || n < 2) throw InvalidArgument("H must be square with size >= 2");
  if (n > 256) throw InvalidArgument("amplification analysis is limited to size 256");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if ((H - H.adjoint()).norm() > 1e-10 * std::max(1.0, H.norm()))
    throw InvalidArgument("H must be Hermitian");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  SpectralTransformReport rep;
  rep.eigenvalues = es.eigenvalues();
  rep.amplification.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    rep.amplification[i] = amplification_factor(scheme, dt, rep.eigenvalues[i]);

  std::vector<Eigen::Index> order(n);
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(rep.amplification[a]) > std::abs(rep.amplification[b]);
  });
  rep.dominant = static_cast<int>(order[0]);
  const double top = std::abs(rep.amplification[order[0]]);
  const double second = std::abs(rep.amplification[order[1]]);
  rep.predicted_rate = second / top;
  rep.degenerate = top - second <= 1e-12 * std::max(1.0, top);

  // A = I - dt H, (I + dt H)^-1 or (I + dt H/2)^-1 (I - dt H/2)
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd A;
  switch (scheme) {
    case SchemeKind::fe:
    case SchemeKind::fe_lambda: A = I - dt * H; break;
    case SchemeKind::be:
    case SchemeKind::be_lambda: A = (I + dt * H).partialPivLu().solve(I); break;
    case SchemeKind::cn:
    case SchemeKind::cn_lambda:
      A = (I + 0.5 * dt * H).partialPivLu().solve(I - 0.5 * dt * H);
      break;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::complex<double>(g(rng), g(rng));
  x.normalize();
  const Eigen::VectorXcd v = es.eigenvectors().col(rep.dominant);
  for (int k = 0; k < iterations; ++k) {
    // sine of the angle from the orthogonal part, accurate when it is tiny
    rep.error_angles.push_back((x - v * v.dot(x)).norm());
    x = A * x;
    x.normalize();
  }
  if (!rep.degenerate)
    rep.observed_rate = detail::log_linear_rate(rep.error_angles, 1e-11, 0.5);

  if (rqi_demo) {
    // Rayleigh-quotient iteration from the power-iteration start vector.
    Eigen::VectorXcd y(n);
    std::mt19937_64 rng2(seed);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = std::complex<double>(g(rng2), g(rng2));
    y += 4.0 * es.eigenvectors().col(0);
    y.normalize();
    for (int k = 0; k < 8; ++k) {
      const double rq = y.dot(H * y).real();
      const double res = (H * y - rq * y).norm();
      rep.rqi_residuals.push_back(res);
      if (res < 1e-14 * std::max(1.0, H.norm())) break;
      y = (H - rq * I).fullPivLu().solve(y);
      y.normalize();
    }
  }
  return rep;
}

struct ConditionReport {
  double sigma = 0.0;          ///< largest over smallest non-zero eigenvalue
  double largest = 0.0;
  double smallest = 0.0;
  int excluded = 0;            ///< eigenvalues treated as zero
  double residual_inf = 0.0;
  bool stationary = true;      ///< false when ||r||_inf > 1e-6
  bool dense = true;
};

namespace detail {

/// (1 - phi phi*) P (Hess - lambda)(1 - phi phi*) f, in the convention where
/// Hess f = H_phi f + eta (|phi|^2 f + phi^2 conj f).
inline WaveField projected_hessian(const WaveField& phi, const Model& m, const Preconditioner& P,
                                   double lambda, const WaveField& f) {
  WaveField t = tangent_project(f, phi);
  WaveField h = apply_hamiltonian(t, phi, m);
  const double eta = m.eta();
  for (std::size_t i = 0; i < t.size(); ++i)
    h[i] += eta * (std::norm(phi[i]) * t[i] + phi[i] * phi[i] * std::conj(t[i]));
  h.axpy(-lambda, t);
  return tangent_project(P.apply(h), phi);
}

inline Eigen::VectorXd to_real(const WaveField& f) {
  Eigen::VectorXd v(2 * f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    v[2 * i] = f[i].real();
    v[2 * i + 1] = f[i].imag();
  }
  return v;
}

inline WaveField from_real(const Eigen::VectorXd& v, const GridPtr& g) {
  WaveField f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(v[2 * i], v[2 * i + 1]);
  return f;
}

}  // namespace detail

/// Condition number of the preconditioned, projected Hessian at a
/// (near-)stationary point. Dense for 2N <= dense_limit, power iterations otherwise.
inline ConditionReport precond_hessian_condition(const WaveField& phi, const Model& m,
                                                 const Preconditioner& P, int power_iters = 2000,
                                                 std::size_t dense_limit = 2048) {
  detail::require_model_grid(phi, m);
  auto [r, lambda] = residual(phi, m);
  ConditionReport rep;
  rep.residual_inf = max_abs(r);
  rep.stationary = rep.residual_inf <= 1e-6;
  const GridPtr& g = phi.grid_ptr();
  const std::size_t n = phi.size();
  auto op = [&](const WaveField& f) { return detail::projected_hessian(phi, m, P, lambda, f); };

  if (2 * n <= dense_limit) {
    Eigen::MatrixXd M(2 * n, 2 * n);
    for (std::size_t j = 0; j < 2 * n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2 * n);
      e[j] = 1.0;
      M.col(j) = detail::to_real(op(detail::from_real(e, g)));
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    const auto ev = es.eigenvalues();
    double mx = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) mx = std::max(mx, std::abs(ev[i]));
    double mn = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double a = std::abs(ev[i]);
      if (a <= 1e-8 * mx) {
        ++rep.excluded;
        continue;
      }
      mn = std::min(mn, a);
    }
    rep.largest = mx;
    rep.smallest = mn;
    rep.sigma = mx / mn;
    return rep;
  }

  // Large grids: power iteration for the top, shifted power iteration for
  // the bottom, with phi and i phi projected out of the iterates.
  rep.dense = false;
  const WaveField iphi = cplx(0.0, 1.0) * phi;
  auto deflate = [&](WaveField f) {
    f = tangent_project(std::move(f), phi);
    f.axpy(-real_inner(iphi, f), iphi);
    return f;
  };
  WaveField x = deflate(detail::random_smooth(g, 7));
  normalize(x);
  double top = 0.0;
  for (int k = 0; k < power_iters; ++k) {
    WaveField y = deflate(op(x));
    top = norm(y);
    if (!(top > 0.0)) break;
    x = (1.0 / top) * y;
  }
  WaveField z = deflate(detail::random_smooth(g, 11));
  normalize(z);
  double shifted = 0.0;
  for (int k = 0; k < power_iters; ++k) {
    WaveField y = top * z;
    y -= op(z);
    y = deflate(std::move(y));
    shifted = norm(y);
    if (!(shifted > 0.0)) break;
    z = (1.0 / shifted) * y;
  }
  rep.largest = top;
  rep.smallest = top - shifted;
  rep.excluded = 2;
  rep.sigma = rep.smallest > 0.0 ? rep.largest / rep.smallest : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace gpe
