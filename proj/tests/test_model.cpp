#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace gpe;
using namespace testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXcd dense_linear_1d(const Model& m) {
  const int M = m.grid().points();
  Eigen::MatrixXcd H = -0.5 * dft_derivative(M, m.grid().half_width(), 2);
  for (int i = 0; i < M; ++i) H(i, i) += m.potential()[i];
  return H;
}

// lowest discrete eigenpair of a 1D linear model, normalized on the grid
std::pair<WaveField, double> dense_ground(const Model& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_linear_1d(m));
  WaveField v = normalized(from_vector(es.eigenvectors().col(0), m.grid_ptr()));
  return {v, es.eigenvalues()[0]};
}

struct Instance {
  Model model;
  WaveField phi;
  WaveField f;
};

// random 1D/2D instances over the eta and omega ranges of the suite
std::vector<Instance> instances() {
  std::vector<Instance> out;
  std::uint64_t seed = 100;
  for (int d : {1, 2}) {
    for (double eta : {0.0, 10.0, 250.0}) {
      for (double omega : {0.0, 0.5}) {
        if (d == 1 && omega != 0.0) continue;
        for (int rep = 0; rep < (d == 1 ? 3 : 2); ++rep) {
          auto g = d == 1 ? grid(1, 8.0, 64) : grid(2, 6.0, 24);
          Model m(g, params(eta, omega));
          out.push_back({m, random_unit_field(g, ++seed), random_smooth_field(g, ++seed)});
        }
      }
    }
  }
  return out;
}

double energy_raw(const WaveField& phi, const Model& m) { return energy(phi, m, false).total; }

}  // namespace

TEST_CASE("energy", "[model]") {
  SECTION("harmonic oscillator ground state") {
    auto g = grid(1, 16.0, 128);
    Model m(g, params(0.0));
    CHECK_THAT(energy(oscillator_ground(g), m).total, WithinAbs(std::sqrt(2.0) / 2.0, 1e-10));
  }
  SECTION("quadratic case equals the Hamiltonian form") {
    for (int d : {1, 2}) {
      auto g = grid(d, 5.0, 16);
      Model m(g, params(0.0));
      auto phi = random_unit_field(g, 3);
      const double e = energy(phi, m).total;
      CHECK_THAT(e, WithinRel(real_inner(phi, apply_hamiltonian(phi, m)), 1e-12));
    }
  }
  SECTION("breakdown sums to the total") {
    auto g = grid(2, 5.0, 16);
    Model m(g, params(40.0, 0.7));
    auto e = energy(random_unit_field(g, 8), m);
    CHECK_THAT(e.total, WithinRel(e.kinetic + e.potential + e.interaction + e.rotation, 1e-14));
    CHECK(e.kinetic > 0.0);
    CHECK(e.interaction > 0.0);
  }
  SECTION("unnormalized input is rejected unless allowed") {
    auto g = grid(1, 4.0, 16);
    Model m(g, params(1.0));
    WaveField phi = 2.0 * random_unit_field(g, 1);
    CHECK_THROWS_AS(energy(phi, m), InvalidArgument);
    CHECK_NOTHROW(energy(phi, m, false));
    phi[3] = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(energy(phi, m, false), NonFinite);
  }
  SECTION("time reversal flips the rotation sign") {
    // resolved field: the unpaired Nyquist mode breaks the discrete symmetry
    auto g = grid(2, 8.0, 64);
    auto phi = normalized(WaveField::sample(g, [](double x, double y) {
      return cplx(1.0 + 0.3 * x, 0.5 * y - 0.2 * x * y) * std::exp(-0.5 * (x * x + 1.3 * y * y));
    }));
    const double e1 = energy(phi, Model(g, params(30.0, 0.4))).total;
    const double e2 = energy(phi.conj(), Model(g, params(30.0, -0.4))).total;
    CHECK_THAT(e2, WithinRel(e1, 1e-12));
  }
}

TEST_CASE("Hamiltonian", "[model]") {
  SECTION("plane wave without trap") {
    const double L = 6.0;
    auto g = grid(1, L, 32);
    Model m(g, params(0.0, 0.0, PotentialKind::free));
    const double xi = std::numbers::pi / L;
    auto phi = WaveField::sample(g, [&](double x) { return std::exp(cplx(0.0, xi * (x + L))); });
    CHECK(max_diff(apply_hamiltonian(phi, phi, m), (0.5 * xi * xi) * phi) < 1e-12);
  }
  SECTION("Hermitian for a frozen density") {
    for (int d : {1, 2}) {
      auto g = grid(d, 5.0, 16);
      Model m(g, params(25.0, 0.5));
      auto rho = random_unit_field(g, 1);
      auto u = random_field(g, 2), v = random_field(g, 3);
      const double a = real_inner(u, apply_hamiltonian(v, rho, m));
      const double b = real_inner(apply_hamiltonian(u, rho, m), v);
      CHECK_THAT(a, WithinRel(b, 1e-12));
    }
  }
  SECTION("dense assembly at M = 16") {
    auto g = grid(1, 4.0, 16);
    Model m(g, params(7.0));
    auto rho = random_unit_field(g, 4);
    Eigen::MatrixXcd H = dense_linear_1d(m);
    for (int i = 0; i < 16; ++i) H(i, i) += 7.0 * std::norm(rho[i]);
    auto u = random_field(g, 5);
    const Eigen::VectorXcd ref = H * to_vector(u);
    CHECK((to_vector(apply_hamiltonian(u, rho, m)) - ref).norm() <= 1e-12 * ref.norm());
  }
  SECTION("pre-sampled trap") {
    auto g = grid(1, 4.0, 16);
    Model a(g, params(3.0));
    Model b(g, params(3.0, 0.0, PotentialKind::free), a.potential());
    auto u = random_unit_field(g, 6);
    CHECK(max_diff(apply_hamiltonian(u, a), apply_hamiltonian(u, b)) == 0.0);
    CHECK_THROWS_AS(b.on(grid(1, 4.0, 32)), InvalidArgument);
    CHECK_THROWS_AS(Model(g, params(0.0), RealArray(8)), GridMismatch);
  }
}

TEST_CASE("gradient", "[model]") {
  SECTION("central differences") {
    for (const auto& in : instances()) {
      for (double eps : {1e-4, 1e-5}) {
        WaveField plus = in.phi, minus = in.phi;
        plus.axpy(eps, in.f);
        minus.axpy(-eps, in.f);
        const double fd = (energy_raw(plus, in.model) - energy_raw(minus, in.model)) / (2.0 * eps);
        const double an = real_inner(gradient(in.phi, in.model), in.f);
        CHECK(rel_err(fd, an) <= 1e-6);
      }
    }
  }
  SECTION("discrete eigenvector of the linear problem") {
    auto g = grid(1, 8.0, 32);
    Model m(g, params(0.0));
    auto [v, lam] = dense_ground(m);
    WaveField r = gradient(v, m);
    r.axpy(-2.0 * lam, v);
    CHECK(max_abs(r) <= 1e-10);
  }
  SECTION("zero field") {
    auto g = grid(2, 4.0, 8);
    Model m(g, params(123.0, 0.0, PotentialKind::free));
    CHECK(max_abs(gradient(WaveField(g), m)) == 0.0);
  }
}

TEST_CASE("Hessian quadratic form", "[model]") {
  SECTION("differences of the gradient") {
    for (const auto& in : instances()) {
      const double eps = 1e-5;
      WaveField plus = in.phi, minus = in.phi;
      plus.axpy(eps, in.f);
      minus.axpy(-eps, in.f);
      WaveField dg = gradient(plus, in.model);
      dg -= gradient(minus, in.model);
      const double fd = real_inner(dg, in.f) / (2.0 * eps);
      CHECK(rel_err(fd, hessian_quadratic_form(in.phi, in.f, in.model)) <= 1e-5);
    }
  }
  SECTION("second differences of the energy") {
    for (const auto& in : instances()) {
      const double eps = 1e-4;
      WaveField plus = in.phi, minus = in.phi;
      plus.axpy(eps, in.f);
      minus.axpy(-eps, in.f);
      const double fd = (energy_raw(plus, in.model) - 2.0 * energy_raw(in.phi, in.model) +
                         energy_raw(minus, in.model)) /
                        (eps * eps);
      CHECK(rel_err(fd, hessian_quadratic_form(in.phi, in.f, in.model)) <= 1e-4);
    }
  }
  SECTION("linear case") {
    auto g = grid(2, 5.0, 16);
    Model m(g, params(0.0, 0.3));
    auto phi = random_unit_field(g, 1);
    auto f = random_field(g, 2);
    CHECK_THAT(hessian_quadratic_form(phi, f, m),
               WithinRel(2.0 * real_inner(f, apply_hamiltonian(f, m)), 1e-12));
  }
  SECTION("real fields: quartic contribution is 4 eta h^d sum phi^2 f^2") {
    auto g = grid(1, 5.0, 32);
    const double eta = 17.0;
    Model m(g, params(eta));
    WaveField phi = random_unit_field(g, 3), f = random_smooth_field(g, 4);
    for (auto& v : phi.values()) v = v.real();
    for (auto& v : f.values()) v = v.real();
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += std::norm(phi[i]) * std::norm(f[i]);
    const double extra = hessian_quadratic_form(phi, f, m) - 2.0 * real_inner(f, apply_hamiltonian(f, phi, m));
    CHECK(extra >= 0.0);
    CHECK_THAT(extra, WithinRel(4.0 * eta * g->cell_volume() * s, 1e-12));
  }
}

TEST_CASE("chemical potential", "[model]") {
  SECTION("linear case equals the energy") {
    auto g = grid(2, 5.0, 16);
    Model m(g, params(0.0, 0.5));
    auto phi = random_unit_field(g, 5);
    CHECK_THAT(chemical_potential(phi, m), WithinRel(energy(phi, m).total, 1e-12));
  }
  SECTION("harmonic ground mode") {
    auto g = grid(1, 16.0, 128);
    CHECK_THAT(chemical_potential(oscillator_ground(g), Model(g, params(0.0))),
               WithinAbs(std::sqrt(2.0) / 2.0, 1e-10));
  }
  SECTION("interaction shifts lambda by half the quartic integral") {
    auto g = grid(1, 8.0, 64);
    Model m(g, params(250.0));
    auto phi = random_unit_field(g, 6);
    double q = 0.0;
    for (const auto& v : phi.values()) q += std::norm(v) * std::norm(v);
    const double diff = chemical_potential(phi, m) - energy(phi, m).total;
    CHECK_THAT(diff, WithinRel(125.0 * g->cell_volume() * q, 1e-12));
  }
}

TEST_CASE("characteristic energy", "[model]") {
  SECTION("equals lambda without rotation") {
    auto g = grid(2, 5.0, 16);
    Model m(g, params(60.0));
    auto phi = random_unit_field(g, 7);
    CHECK_THAT(characteristic_energy(phi, m), WithinRel(chemical_potential(phi, m), 1e-12));
  }
  SECTION("plane wave") {
    const double L = 4.0;
    auto g = grid(1, L, 16);
    Model m(g, params(0.0, 0.0, PotentialKind::free));
    const double xi = 2.0 * std::numbers::pi / L;
    auto phi = normalized(WaveField::sample(g, [&](double x) { return std::exp(cplx(0.0, xi * (x + L))); }));
    CHECK_THAT(characteristic_energy(phi, m), WithinRel(0.5 * xi * xi, 1e-12));
  }
  SECTION("breakdown against direct quadrature") {
    auto g = grid(2, 5.0, 16);
    Model m(g, params(33.0, 0.8));
    auto phi = random_unit_field(g, 8);
    const Spectrum s = forward_transform(phi);
    const auto k2 = g->wavenumber_squared();
    double kin = 0.0;
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) kin += 0.5 * k2[i] * std::norm(s.coeffs[i]);
    kin *= g->cell_volume() / static_cast<double>(g->size());
    double pot = 0.0, quart = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      pot += m.potential()[i] * std::norm(phi[i]);
      quart += std::pow(std::norm(phi[i]), 2);
    }
    const double direct = kin + g->cell_volume() * (pot + 33.0 * quart);
    CHECK_THAT(characteristic_energy(energy(phi, m)), WithinRel(direct, 1e-12));
  }
}

TEST_CASE("Thomas-Fermi initial data", "[model]") {
  SECTION("1D chemical potential and support") {
    const double mu = thomas_fermi_mu(1, 250.0, PotentialSpec{});
    CHECK_THAT(mu, WithinRel(0.5 * std::pow(750.0, 2.0 / 3.0), 1e-14));
    CHECK_THAT(mu, WithinAbs(41.274, 1e-3));
    auto g = grid(1, 16.0, 256);
    auto phi = thomas_fermi_initial(Model(g, params(250.0)));
    CHECK_THAT(norm(phi), WithinAbs(1.0, 1e-14));
    for (std::size_t i = 0; i < phi.size(); ++i) {
      const double x = g->coordinate(0)[i];
      if (std::abs(x) > std::sqrt(mu)) CHECK(phi[i] == cplx(0.0));
      if (std::abs(x) < 0.99 * std::sqrt(mu)) CHECK(std::abs(phi[i]) > 0.0);
    }
  }
  SECTION("2D closed form") {
    CHECK_THAT(thomas_fermi_mu(2, 500.0, PotentialSpec{}), WithinRel(std::sqrt(2000.0) / 2.0, 1e-14));
    PotentialSpec half;
    half.kind = PotentialKind::half_square;
    CHECK_THAT(thomas_fermi_mu(2, 500.0, half), WithinRel(std::sqrt(500.0) / 2.0, 1e-14));
  }
  SECTION("rejected without interaction or trap") {
    CHECK_THROWS_AS(thomas_fermi_mu(1, 0.0, PotentialSpec{}), InvalidArgument);
    PotentialSpec free;
    free.kind = PotentialKind::free;
    CHECK_THROWS_AS(thomas_fermi_mu(2, 10.0, free), InvalidArgument);
  }
}

TEST_CASE("named initial guesses", "[model]") {
  auto g = grid(2, 8.0, 64);
  Model m(g, params(100.0, 0.5, PotentialKind::half_square));
  SECTION("a is normalized and radially symmetric") {
    auto a = initial_guess(InitialKind::a, m);
    CHECK_THAT(norm(a), WithinAbs(1.0, 1e-14));
    CHECK(norm(apply_lz(a)) <= 1e-10);
  }
  SECTION("b and its conjugate carry unit angular momentum") {
    auto b = initial_guess(InitialKind::b, m);
    auto bb = initial_guess(InitialKind::b_bar, m);
    CHECK_THAT(real_inner(b, apply_lz(b)), WithinAbs(1.0, 1e-8));
    CHECK_THAT(real_inner(bb, apply_lz(bb)), WithinAbs(-1.0, 1e-8));
  }
  SECTION("d equals c at omega = 1/2") {
    auto c = initial_guess(InitialKind::c, m);
    auto d = initial_guess(InitialKind::d, m);
    CHECK(max_diff(c, d) < 1e-14);
  }
  SECTION("every kind is normalized") {
    for (auto k : {InitialKind::a, InitialKind::b, InitialKind::b_bar, InitialKind::c, InitialKind::c_bar,
                   InitialKind::d, InitialKind::d_bar, InitialKind::e, InitialKind::e_bar,
                   InitialKind::thomas_fermi, InitialKind::gaussian, InitialKind::random}) {
      auto phi = initial_guess(k, m, 3);
      CHECK_THAT(norm(phi), WithinAbs(1.0, 1e-13));
      CHECK(parse_initial_kind(to_string(k)) == k);
    }
  }
  SECTION("2D kinds need a 2D grid") {
    Model m1(grid(1, 8.0, 32), params(10.0));
    CHECK_THROWS_AS(initial_guess(InitialKind::b, m1), UnsupportedDimension);
    CHECK_NOTHROW(initial_guess(InitialKind::gaussian, m1));
  }
}
