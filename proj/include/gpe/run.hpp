#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gpe/config.hpp"
#include "gpe/vortex.hpp"

namespace gpe {

/// Solver dispatch on the configured method.
inline SolveResult run_method(const WaveField& phi0, const Model& m, const RunConfig& c,
                              double tol) {
  if (c.imaginary_time()) return run_imaginary_time(phi0, c.scheme, m, c.solver.stop, tol, c.solver.max_iter);
  SolverConfig s = c.solver;
  s.tol = tol;
  s.method = c.method == "pg" ? Method::pg : Method::pcg;
  return solve(phi0, m, s);
}

inline std::string summary_text(const RunConfig& c, const SolveResult& r) {
  using io::format_double;
  std::string s;
  auto put = [&](const std::string& k, const std::string& v) { s += k + "=" + v + "\n"; };
  put("status", std::string(to_string(r.status)));
  put("method", c.method);
  put("precond", std::string(to_string(c.solver.precond)));
  put("energy", format_double(r.energy));
  put("lambda", format_double(r.lambda));
  put("residual_inf", format_double(r.residual_inf));
  put("iterations", std::to_string(r.iterations()));
  put("inner_iters", std::to_string(r.inner_iters));
  put("fft_count", std::to_string(r.fft_count));
  put("wall_time", format_double(r.wall_time));
  return s;
}

/// Solves on the configured grid and writes convergence.csv, timing.csv,
/// field.gpef, density.csv and summary.txt into `out`.
inline SolveResult run_single(const RunConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const auto grid = Grid::create(c.grid);
  const Model m(grid, c.model);
  const WaveField phi0 = initial_guess(c.initial_kind(), m, c.seed);
  SolveResult r = run_method(phi0, m, c, c.solver.tol);
  io::write_atomic(out / "convergence.csv", convergence_csv(r.records));
  io::write_atomic(out / "timing.csv", timing_csv(r.records));
  io::write_field(out / "field.gpef", r.phi);
  io::write_atomic(out / "density.csv", io::density_csv(r.phi));
  io::write_atomic(out / "summary.txt", summary_text(c, r));
  return r;
}

struct MultigridResult {
  std::vector<SolveResult> levels;
  const SolveResult& final() const { return levels.back(); }
  double wall_time() const {
    double t = 0.0;
    for (const auto& l : levels) t += l.wall_time;
    return t;
  }
  int iterations() const {
    int n = 0;
    for (const auto& l : levels) n += l.iterations();
    return n;
  }
};

/// Coarse-to-fine continuation without file output. An empty schedule
/// solves once on c.grid.
inline MultigridResult solve_multigrid(const RunConfig& c) {
  std::vector<MultigridLevel> sched = c.multigrid;
  if (sched.empty()) sched.push_back({c.grid.points, c.solver.tol});
  MultigridResult out;
  WaveField phi;
  for (std::size_t p = 0; p < sched.size(); ++p) {
    GridSpec spec = c.grid;
    spec.points = sched[p].points;
    const auto grid = Grid::create(spec);
    const Model m(grid, c.model);
    phi = p == 0 ? initial_guess(c.initial_kind(), m, c.seed) : spectral_interpolate(phi, grid);
    out.levels.push_back(run_method(phi, m, c, sched[p].tol));
    phi = out.levels.back().phi;
  }
  return out;
}

/// Multigrid run with per-level convergence files, multigrid.csv (one row
/// per level) and the final field.
inline MultigridResult run_multigrid(const RunConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  MultigridResult mg = solve_multigrid(c);
  std::string table = "level,M,iterations,inner_iters,fft_count,energy,lambda,residual_inf,status\n";
  std::string timing = "level,n,wall_time\n";
  double offset = 0.0;
  for (std::size_t p = 0; p < mg.levels.size(); ++p) {
    const auto& r = mg.levels[p];
    io::write_atomic(out / ("level" + std::to_string(p) + "_convergence.csv"), convergence_csv(r.records));
    table += std::to_string(p) + ',' + std::to_string(r.phi.grid().points()) + ',' +
             std::to_string(r.iterations()) + ',' + std::to_string(r.inner_iters) + ',' +
             std::to_string(r.fft_count) + ',' + io::format_double(r.energy) + ',' +
             io::format_double(r.lambda) + ',' + io::format_double(r.residual_inf) + ',' +
             std::string(to_string(r.status)) + '\n';
    for (const auto& rec : r.records)
      timing += std::to_string(p) + ',' + std::to_string(rec.n) + ',' +
                io::format_double(offset + rec.wall_time) + '\n';
    offset += r.wall_time;
  }
  io::write_atomic(out / "multigrid.csv", table);
  io::write_atomic(out / "timing.csv", timing);
  io::write_field(out / "field.gpef", mg.final().phi);
  io::write_atomic(out / "density.csv", io::density_csv(mg.final().phi));
  SolveResult total = mg.final();
  total.wall_time = mg.wall_time();
  std::string summary = summary_text(c, total);
  summary += "levels=" + std::to_string(mg.levels.size()) + "\n";
  summary += "total_iterations=" + std::to_string(mg.iterations()) + "\n";
  io::write_atomic(out / "summary.txt", summary);
  return mg;
}

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchCase {
  std::string label;
  RunConfig config;
};

namespace detail {

inline RunConfig lattice_1d(double L, double h, double eta) {
  RunConfig c;
  c.grid = {1, L, static_cast<int>(std::lround(2.0 * L / h))};
  c.model.eta = eta;
  c.model.potential.kind = PotentialKind::harmonic_plus_lattice;
  c.model.potential.lattice_amplitude = {25.0, 25.0, 25.0};
  c.model.potential.lattice_wavenumber = {std::numbers::pi / 2, std::numbers::pi / 2, std::numbers::pi / 2};
  c.solver.tol = 1e-14;
  c.solver.max_iter = 100000;
  c.init = InitialKind::thomas_fermi;
  return c;
}

inline RunConfig with_method(RunConfig c, const std::string& method, PreconditionerKind pk) {
  c.method = method;
  c.solver.precond = pk;
  c.scheme.precond = pk;
  if (c.imaginary_time()) {
    c.scheme.kind = parse_scheme_kind(method);
    c.solver.max_iter = 20000;
  }
  return c;
}

}  // namespace detail

inline std::vector<std::string> benchmark_suites() {
  return {"solvers_1d", "precond_1d", "eta_sweep_1d", "rotation_2d", "multigrid_2d"};
}

/// Configurations of one suite at desk scale (or at the published scale).
inline std::vector<BenchCase> benchmark_cases(const std::string& suite, bool paper_scale) {
  using PK = PreconditionerKind;
  using detail::with_method;
  std::vector<BenchCase> cases;
  auto add = [&](RunConfig c) {
    std::string label = c.method + "_" + std::string(to_string(c.solver.precond));
    cases.push_back({label, std::move(c)});
  };

  if (suite == "solvers_1d") {
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
      const RunConfig base = detail::lattice_1d(16.0, h, 250.0);
      for (const char* m : {"be", "be_lambda", "pg", "pcg"}) add(with_method(base, m, PK::identity));
    }
  } else if (suite == "precond_1d") {
    const RunConfig base = paper_scale ? detail::lattice_1d(128.0, 1.0 / 64, 250.0)
                                       : detail::lattice_1d(32.0, 1.0 / 16, 250.0);
    for (PK k : {PK::kinetic, PK::potential, PK::combined_sym, PK::combined1, PK::combined2})
      for (const char* m : {"pg", "pcg"}) add(with_method(base, m, k));
  } else if (suite == "eta_sweep_1d") {
    for (double eta : {10.0, 100.0, 1000.0, 10000.0}) {
      const RunConfig base = paper_scale ? detail::lattice_1d(128.0, 1.0 / 64, eta)
                                         : detail::lattice_1d(32.0, 1.0 / 16, eta);
      for (const char* m : {"pg", "pcg"}) add(with_method(base, m, PK::combined_sym));
    }
  } else if (suite == "rotation_2d") {
    for (double omega : {0.0, 1.0, 2.0}) {
      RunConfig c;
      c.grid = paper_scale ? GridSpec{2, 32.0, 512} : GridSpec{2, 16.0, 128};
      c.model.eta = 1000.0;
      c.model.omega = omega;
      c.model.potential.kind = PotentialKind::harmonic_plus_lattice;
      c.model.potential.lattice_amplitude = {25.0, 25.0, 0.0};
      c.model.potential.lattice_wavenumber = {std::numbers::pi / 2, std::numbers::pi / 2, 0.0};
      c.solver.tol = 1e-12;
      c.solver.max_iter = 5000;
      c.init = InitialKind::thomas_fermi;
      for (PK k : {PK::combined_sym, PK::combined1}) add(with_method(c, "pcg", k));
    }
  } else if (suite == "multigrid_2d") {
    for (InitialKind k : {InitialKind::a, InitialKind::b, InitialKind::b_bar, InitialKind::c,
                          InitialKind::c_bar, InitialKind::d, InitialKind::d_bar, InitialKind::e,
                          InitialKind::e_bar, InitialKind::thomas_fermi}) {
      RunConfig c;
      c.grid = {2, 16.0, 64};
      c.model.eta = 500.0;
      c.model.omega = 0.5;
      c.model.potential.kind = PotentialKind::half_square;
      c.solver.precond = PK::combined_sym;
      c.solver.max_iter = 20000;
      c.init = k;
      if (paper_scale)
        c.multigrid = {{64, 1e-12}, {128, 1e-12}, {256, 1e-12}, {512, 1e-14}};
      else
        c.multigrid = {{64, 1e-12}, {128, 1e-12}};
      cases.push_back({"pcg_sym_" + std::string(to_string(k)), std::move(c)});
    }
  } else {
    throw ConfigError("suite", "unknown benchmark suite '" + suite + "'");
  }
  return cases;
}

/// Runs every case of `suite` and returns the CSV table. Wall time is the
/// last column so determinism checks can strip it.
inline std::string run_benchmark(const std::string& suite, bool paper_scale,
                                 const std::function<void(const std::string&)>& progress = {}) {
  std::string table =
      "suite,case,method,precond,h,L,eta,omega,init,iterations,inner_iters,fft_count,energy,status,"
      "wall_time\n";
  for (const auto& bc : benchmark_cases(suite, paper_scale)) {
    const RunConfig& c = bc.config;
    if (progress) progress(bc.label);
    int iters = 0;
    long inner = 0;
    std::size_t ffts = 0;
    double e = 0.0, wall = 0.0;
    std::string status;
    double h = c.grid.mesh();
    try {
      if (suite == "multigrid_2d") {
        const MultigridResult mg = solve_multigrid(c);
        iters = mg.iterations();
        for (const auto& l : mg.levels) {
          inner += l.inner_iters;
          ffts += l.fft_count;
        }
        e = mg.final().energy;
        wall = mg.wall_time();
        status = std::string(to_string(mg.final().status));
        h = mg.final().phi.grid().mesh();
      } else {
        const auto grid = Grid::create(c.grid);
        const Model m(grid, c.model);
        const SolveResult r = run_method(initial_guess(c.initial_kind(), m, c.seed), m, c, c.solver.tol);
        iters = r.iterations();
        inner = r.inner_iters;
        ffts = r.fft_count;
        e = r.energy;
        wall = r.wall_time;
        status = std::string(to_string(r.status));
      }
    } catch (const SolverFailure& err) {
      status = "failed";
    }
    table += suite + ',' + bc.label + ',' + c.method + ',' + std::string(to_string(c.solver.precond)) +
             ',' + io::format_double(h) + ',' + io::format_double(c.grid.half_width) + ',' +
             io::format_double(c.model.eta) + ',' + io::format_double(c.model.omega) + ',' +
             std::string(to_string(c.initial_kind())) + ',' + std::to_string(iters) + ',' +
             std::to_string(inner) + ',' + std::to_string(ffts) + ',' + io::format_double(e) + ',' +
             status + ',' + io::format_double(wall) + '\n';
  }
  return table;
}

// ---------------------------------------------------------------------------
// Analysis

/// Dense matrix of phi -> H_rho phi with the density frozen at `density`.
inline Eigen::MatrixXcd dense_hamiltonian(const WaveField& density, const Model& m) {
  const std::size_t n = density.size();
  Eigen::MatrixXcd H(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    WaveField e(density.grid_ptr());
    e[j] = 1.0;
    const WaveField col = apply_hamiltonian(e, density, m);
    for (std::size_t i = 0; i < n; ++i) H(i, j) = col[i];
  }
  return H;
}

/// Ground state, then condition numbers of the projected preconditioned
/// Hessian for every preconditioner, and amplification rates of the linear
/// schemes for the Hamiltonian frozen at the ground state. Writes
/// condition.csv, amplification.csv and summary.txt.
inline void run_analysis(const RunConfig& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const auto grid = Grid::create(c.grid);
  const Model m(grid, c.model);
  SolverConfig s = c.solver;
  s.method = Method::pcg;
  const SolveResult gs = solve(initial_guess(c.initial_kind(), m, c.seed), m, s);
  const EnergyBreakdown eb = energy(gs.phi, m);

  std::string cond = "precond,sigma,largest,smallest,excluded,dense,stationary\n";
  for (auto k : {PreconditionerKind::identity, PreconditionerKind::kinetic, PreconditionerKind::potential,
                 PreconditionerKind::combined1, PreconditionerKind::combined2,
                 PreconditionerKind::combined_sym}) {
    const Preconditioner P = build_preconditioner(k, c.solver.shift, gs.phi, m, &eb);
    const ConditionReport rep = precond_hessian_condition(gs.phi, m, P);
    cond += std::string(to_string(k)) + ',' + io::format_double(rep.sigma) + ',' +
            io::format_double(rep.largest) + ',' + io::format_double(rep.smallest) + ',' +
            std::to_string(rep.excluded) + ',' + (rep.dense ? "1" : "0") + ',' +
            (rep.stationary ? "1" : "0") + '\n';
  }
  io::write_atomic(out / "condition.csv", cond);

  std::string amp = "scheme,dt,predicted_rate,observed_rate,degenerate\n";
  if (gs.phi.size() <= 256) {
    const Eigen::MatrixXcd H = dense_hamiltonian(gs.phi, m);
    for (auto k : {SchemeKind::fe, SchemeKind::be, SchemeKind::cn}) {
      const auto rep = amplification_analysis(H, k, c.scheme.dt, 200, c.seed + 1);
      amp += std::string(to_string(k)) + ',' + io::format_double(c.scheme.dt) + ',' +
             io::format_double(rep.predicted_rate) + ',' + io::format_double(rep.observed_rate) + ',' +
             (rep.degenerate ? "1" : "0") + '\n';
    }
  }
  io::write_atomic(out / "amplification.csv", amp);
  io::write_atomic(out / "summary.txt", summary_text(c, gs));
}

}  // namespace gpe
