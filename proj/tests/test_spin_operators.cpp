#include <doctest.h>

#include <complex>
#include <random>

#include "qudit/error.hpp"
#include "qudit/spin_operators.hpp"

using namespace qudit;

namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spin matrices satisfy the angular momentum algebra") {
  const std::complex<double> i(0.0, 1.0);
  for (double s : {0.5, 1.0, 1.5, 2.0, 3.5}) {
    CAPTURE(s);
    const SpinOperatorSet op = spin_operators(s);
    const auto d = op.dimension();
    REQUIRE(d == static_cast<Eigen::Index>(2 * s + 1));
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    CHECK(max_abs(op.sx - op.sx.adjoint()) < 1e-12);
    CHECK(max_abs(op.sy - op.sy.adjoint()) < 1e-12);
    CHECK(max_abs(op.sz - op.sz.adjoint()) < 1e-12);
    CHECK(max_abs(op.sx * op.sy - op.sy * op.sx - i * op.sz) < 1e-12);
    CHECK(max_abs(op.sy * op.sz - op.sz * op.sy - i * op.sx) < 1e-12);
    CHECK(max_abs(op.sz * op.sx - op.sx * op.sz - i * op.sy) < 1e-12);
    CHECK(max_abs(op.sx * op.sx + op.sy * op.sy + op.sz * op.sz - s * (s + 1) * id) < 1e-12);
    CHECK(std::abs(op.sx.trace()) < 1e-12);
    CHECK(std::abs(op.sy.trace()) < 1e-12);
    CHECK(std::abs(op.sz.trace()) < 1e-12);
    for (Eigen::Index k = 0; k < d; ++k) CHECK(op.sz(k, k).real() == doctest::Approx(s - k));
  }
}

TEST_CASE("half-integer steps only") {
  CHECK_THROWS_AS(spin_operators(0.3), InvalidSpinError);
  CHECK_THROWS_AS(spin_operators(-1.0), InvalidSpinError);
  CHECK_THROWS_AS(spin_operators(std::nan("")), InvalidSpinError);
}

TEST_CASE("kron matches the element definition") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix a(3, 3);
  ComplexMatrix b(2, 2);
  for (auto* m : {&a, &b}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = {n(rng), n(rng)};
    }
  }
  const ComplexMatrix k = kron(a, b);
  REQUIRE(k.rows() == 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) CHECK(std::abs(k(2 * i + p, 2 * j + q) - a(i, j) * b(p, q)) < 1e-14);
      }
    }
  }
}

TEST_CASE("embedded operators act on their own site") {
  const SpinOperatorSet half = spin_operators(0.5);
  const SpinOperatorSet one = spin_operators(1.0);
  const SpinOperatorSet left = embed(half, 3, 0);
  const SpinOperatorSet right = embed(one, 2, 1);
  CHECK(max_abs(left.sz - kron(half.sz, ComplexMatrix::Identity(3, 3))) == 0.0);
  CHECK(max_abs(right.sx - kron(ComplexMatrix::Identity(2, 2), one.sx)) == 0.0);
  CHECK(max_abs(left.sx * right.sy - right.sy * left.sx) < 1e-14);
}
