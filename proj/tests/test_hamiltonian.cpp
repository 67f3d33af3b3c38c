#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "qudit/eigen_system.hpp"
#include "qudit/error.hpp"
#include "qudit/hamiltonian.hpp"
#include "qudit/units.hpp"

using namespace qudit;

namespace {

const SingleIonParams kLaGd{0.096, -0.032, 1.99, 3.5};
const SingleIonParams kGdLu{0.115, 0.038, 1.99, 3.5};

std::vector<double> pair_sums(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j) out.push_back(a(i) + b(j));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double spread_k(const SpinSystem& s) {
  const Eigen::VectorXd e = eigenvalues(zero_field_hamiltonian(s));
  return units::ghz_to_kelvin(e(e.size() - 1) - e(0));
}

}  // namespace

TEST_CASE("uncoupled dimer spectrum is the Kronecker sum of the monomers") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int draw = 0; draw < 20; ++draw) {
    const SingleIonParams a{0.2 * u(rng), 0.06 * u(rng), 2.0 + 0.05 * u(rng), 3.5};
    const SingleIonParams b{0.2 * u(rng), 0.06 * u(rng), 2.0 + 0.05 * u(rng), 3.5};
    const FieldSpec f = FieldSpec::along(1.5 * (u(rng) + 1.0), Vec3(u(rng), u(rng), u(rng)));
    const Eigen::VectorXd dimer = eigenvalues(hamiltonian(DimerParams{a, b, 0.0, {}}, f));
    const auto sums = pair_sums(eigenvalues(hamiltonian(a, f)), eigenvalues(hamiltonian(b, f)));
    for (std::size_t k = 0; k < sums.size(); ++k) CHECK(std::abs(dimer(static_cast<Eigen::Index>(k)) - sums[k]) < 1e-8);
  }
}

TEST_CASE("rotated site-2 frame equals rotating the field seen by site 2") {
  const EulerAngles euler{0.3, 1.1, -0.7};
  const Vec3 n = Vec3(0.2, -0.5, 0.8).normalized();
  const FieldSpec f = FieldSpec::along(0.7, n);
  const Eigen::VectorXd dimer = eigenvalues(hamiltonian(DimerParams{kLaGd, kGdLu, 0.0, euler}, f));
  const Vec3 local = rotation_matrix(euler).transpose() * n;
  const auto sums = pair_sums(eigenvalues(hamiltonian(kLaGd, f)),
                              eigenvalues(hamiltonian(kGdLu, FieldSpec::along(0.7, local))));
  for (std::size_t k = 0; k < sums.size(); ++k) CHECK(std::abs(dimer(static_cast<Eigen::Index>(k)) - sums[k]) < 1e-8);
}

TEST_CASE("rotation matrix is proper orthogonal") {
  const Eigen::Matrix3d r = rotation_matrix({0.4, 2.0, 1.3});
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-14);
  CHECK(r.determinant() == doctest::Approx(1.0));
}

TEST_CASE("isotropic Zeeman ladder") {
  const SingleIonParams p{0.0, 0.0, 1.99, 3.5};
  const double b = 0.8;
  const Eigen::VectorXd e = eigenvalues(hamiltonian(p, FieldSpec::along(b, Vec3(1, 2, 3))));
  for (int k = 0; k < 8; ++k) {
    const double m = -3.5 + k;
    CHECK(e(k) == doctest::Approx(p.g * units::kBohrGHzPerT * b * m).epsilon(1e-12));
  }
}

TEST_CASE("axial zero-field levels are -D m^2") {
  const SingleIonParams p{0.096, 0.0, 1.99, 3.5};
  const Eigen::VectorXd e = eigenvalues(zero_field_hamiltonian(p));
  const double d = units::kelvin_to_ghz(p.d_zfs_k);
  const std::vector<double> expected{-12.25 * d, -12.25 * d, -6.25 * d, -6.25 * d,
                                     -2.25 * d,  -2.25 * d,  -0.25 * d, -0.25 * d};
  for (int k = 0; k < 8; ++k) CHECK(e(k) == doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-12));
}

TEST_CASE("isotropic exchange follows the total-spin ladder") {
  const double j_k = -0.02;
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  const Eigen::VectorXd e = eigenvalues(zero_field_hamiltonian(DimerParams{iso, iso, j_k, {}}));
  std::vector<double> expected;
  for (int s = 0; s <= 7; ++s) {
    for (int k = 0; k < 2 * s + 1; ++k) expected.push_back(units::kelvin_to_ghz(-0.5 * j_k * (s * (s + 1) - 31.5)));
  }
  std::sort(expected.begin(), expected.end());
  REQUIRE(e.size() == 64);
  for (int k = 0; k < 64; ++k) CHECK(std::abs(e(k) - expected[static_cast<std::size_t>(k)]) < 1e-9);
  CHECK(units::ghz_to_kelvin(e(0)) == doctest::Approx(-0.315).epsilon(1e-9));
}

TEST_CASE("zero-field spreads of the two sites") {
  CHECK(spread_k(kLaGd) == doctest::Approx(1.390).epsilon(1e-3));
  CHECK(spread_k(kGdLu) == doctest::Approx(1.662).epsilon(1e-3));
}

TEST_CASE("cached terms reproduce the direct Hamiltonian") {
  const DimerParams p{kLaGd, kGdLu, -0.02, {0.1, 0.2, 0.3}};
  const HamiltonianTerms terms(p);
  const Vec3 n = Vec3(1, 1, 1).normalized();
  const ComplexMatrix direct = hamiltonian(p, FieldSpec::along(0.42, n));
  CHECK((terms.at(0.42, n) - direct).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(hermiticity_defect(direct) < 1e-14);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(SingleIonParams{0.1, 0.0, -2.0, 3.5}), ValidationError);
  CHECK_THROWS_AS(validate(SingleIonParams{0.1, 0.0, 2.0, 1.25}), InvalidSpinError);
  CHECK_THROWS_AS(validate(SingleIonParams{std::nan(""), 0.0, 2.0, 3.5}), ValidationError);
  CHECK_THROWS_AS(FieldSpec::along(1.0, Vec3::Zero()), ValidationError);
  CHECK_THROWS_AS(hamiltonian(kLaGd, FieldSpec{-1.0, Vec3::UnitZ()}), ValidationError);
}

TEST_CASE("selected eigenvectors match the full solve") {
  const DimerParams p{kLaGd, kGdLu, -0.02, {}};
  for (double b : {0.0, 0.35}) {
    const ComplexMatrix h = hamiltonian(p, FieldSpec::along(b, Vec3(1, 1, 1)));
    const EigenSystem full = eigensolve(h);
    const EigenSystem sel = eigensolve_selected(h, {40, 3, 3});
    CHECK((sel.energies - full.energies).cwiseAbs().maxCoeff() < 1e-9);
    REQUIRE(sel.states.cols() == 2);
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXcd v = sel.states.col(k);
      CHECK((h * v - (k == 0 ? full.energies(3) : full.energies(40)) * v).norm() < 1e-8);
    }
  }
}
