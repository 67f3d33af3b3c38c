#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "qudit/eigen_system.hpp"
#include "qudit/error.hpp"
#include "qudit/thermo.hpp"
#include "qudit/units.hpp"

using namespace qudit;

namespace {

EnsembleSpec single_crystal() {
  EnsembleSpec e;
  e.n_orientations = 1;
  return e;
}

double free_energy_ghz(const SpinSystem& s, const FieldSpec& f, double t_k) {
  const Eigen::VectorXd e = eigenvalues(hamiltonian(s, f));
  const double kt = units::kelvin_to_ghz(t_k);
  double z = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) z += std::exp(-(e(i) - e(0)) / kt);
  return e(0) - kt * std::log(z);
}

double brillouin_moment(double g, double s, double b_t, double t_k) {
  const double y = g * units::kBohrGHzPerT * b_t / units::kelvin_to_ghz(t_k);
  double num = 0.0;
  double den = 0.0;
  for (double m = -s; m <= s + 1e-9; m += 1.0) {
    num += m * std::exp(m * y);
    den += std::exp(m * y);
  }
  return g * num / den;
}

}  // namespace

TEST_CASE("two-level heat capacity follows the Schottky formula") {
  const SingleIonParams half{0.0, 0.0, 1.99, 0.5};
  const double b = 0.7;
  const double gap_k = units::ghz_to_kelvin(half.g * units::kBohrGHzPerT * b);
  const ThermalGrid grid = ThermalGrid::log_spaced(0.05, 20.0, 60, FieldSpec::along(b, Vec3::UnitZ()));
  const auto c = heat_capacity(half, single_crystal(), grid);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double x = gap_k / grid.temperatures_k[i];
    const double expected = x * x * std::exp(x) / ((1.0 + std::exp(x)) * (1.0 + std::exp(x)));
    CHECK(std::abs(c[i] - expected) < 1e-10);
  }
}

TEST_CASE("entropy released by a Kramers monomer at zero field is ln 4") {
  const SingleIonParams lagd{0.096, -0.032, 1.99, 3.5};
  const ThermalGrid grid = ThermalGrid::log_spaced(0.005, 100.0, 400, FieldSpec{});
  const auto c = heat_capacity(lagd, single_crystal(), grid);
  double s = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double t0 = grid.temperatures_k[i - 1];
    const double t1 = grid.temperatures_k[i];
    s += 0.5 * (c[i - 1] / t0 + c[i] / t1) * (t1 - t0);
    CHECK(c[i] >= 0.0);
  }
  // The ground Kramers doublet keeps ln 2 down to T = 0.
  CHECK(s == doctest::Approx(std::log(4.0)).epsilon(0.005));
}

TEST_CASE("magnetization is minus the field derivative of the free energy") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    const SpinSystem sys = k % 2 == 0 ? SpinSystem{SingleIonParams{0.096, -0.032, 1.99, 3.5}}
                                      : SpinSystem{DimerParams{{0.096, -0.032, 1.99, 3.5}, {0.115, 0.038, 1.99, 3.5}, -0.02, {}}};
    const Vec3 n = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const double b = 0.05 + 2.0 * u(rng);
    const double t = 0.5 + 20.0 * u(rng);
    const double h = 1e-4;
    const double df = (free_energy_ghz(sys, FieldSpec::along(b + h, n), t) -
                       free_energy_ghz(sys, FieldSpec::along(b - h, n), t)) /
                      (2.0 * h);
    const double m = magnetization(sys, single_crystal(), FieldSpec::along(b, n), t);
    CHECK(std::abs(m + df / units::kBohrGHzPerT) < 1e-6 * std::abs(m));
  }
}

TEST_CASE("isotropic susceptibility equals the Brillouin result") {
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  const ThermalGrid grid{{2.0, 10.0, 100.0}, FieldSpec::along(0.0, Vec3::UnitZ())};
  const auto chi_t = chi_t_curve(iso, single_crystal(), grid, 0.1);
  for (std::size_t i = 0; i < chi_t.size(); ++i) {
    const double t = grid.temperatures_k[i];
    const double expected = t * brillouin_moment(1.99, 3.5, 0.1, t) * units::kAvogadroBohrEmu / 1e3;
    CHECK(chi_t[i] == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(chi_t[2] == doctest::Approx(1.99 * 1.99 * 3.5 * 4.5 / 8.0).epsilon(0.01));
  CHECK_THROWS_AS(chi_t_curve(iso, single_crystal(), grid, 0.0), DomainError);
}

TEST_CASE("chi*T is in linear response at small probe fields") {
  const SingleIonParams lagd{0.096, -0.032, 1.99, 3.5};
  EnsembleSpec powder;
  powder.n_orientations = 50;
  const ThermalGrid grid{{2.0, 5.0, 20.0}, FieldSpec{}};
  const auto weak = chi_t_curve(lagd, powder, grid, 0.01);
  const auto probe = chi_t_curve(lagd, powder, grid, 0.1);
  for (std::size_t i = 0; i < weak.size(); ++i) CHECK(std::abs(probe[i] / weak[i] - 1.0) < 0.005);
}

TEST_CASE("isotropic powder average does not depend on the grid size") {
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  const ThermalGrid grid = ThermalGrid::log_spaced(0.1, 10.0, 20, FieldSpec::along(0.5, Vec3::UnitZ()));
  EnsembleSpec small;
  small.n_orientations = 7;
  EnsembleSpec large;
  large.n_orientations = 230;
  const auto a = heat_capacity(iso, small, grid);
  const auto b = heat_capacity(iso, large, grid);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("thread count does not change ensemble results") {
  const DimerParams gd2{{0.096, -0.032, 1.99, 3.5}, {0.115, 0.038, 1.99, 3.5}, -0.02, {}};
  const ThermalGrid grid = ThermalGrid::log_spaced(0.2, 10.0, 15, FieldSpec::along(0.3, Vec3::UnitZ()));
  EnsembleSpec one;
  one.n_orientations = 12;
  EnsembleSpec four = one;
  four.threads = 4;
  const auto a = heat_capacity(gd2, one, grid);
  const auto b = heat_capacity(gd2, four, grid);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("lattice baseline table") {
  std::istringstream in("# lattice\nT_K,c_over_R\n1,0.01\n3,0.09\n");
  const BaselineTable table = BaselineTable::read_csv(in);
  CHECK(table.at(2.0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(table.at(5.0), RangeError);
  const std::vector<double> t{1.0, 2.0};
  const std::vector<double> mag{0.5, 0.25};
  const auto total = add_lattice_baseline(t, mag, table);
  CHECK(total[1] == doctest::Approx(0.30));

  std::istringstream bad("T_K,c_over_R\n1,abc\n");
  CHECK_THROWS_AS(BaselineTable::read_csv(bad), DataError);
}

TEST_CASE("temperature grids") {
  const ThermalGrid g = ThermalGrid::log_spaced(0.1, 10.0, 3, FieldSpec{});
  CHECK(g.temperatures_k[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(ThermalGrid::log_spaced(0.0, 10.0, 3, FieldSpec{}), ValidationError);
  CHECK_THROWS_AS(populations(Eigen::VectorXd::Zero(2), -1.0), DomainError);
}
