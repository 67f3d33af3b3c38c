#include <doctest.h>

#include <random>

#include "qudit/error.hpp"
#include "qudit/hamiltonian.hpp"
#include "qudit/universality.hpp"

using namespace qudit;

namespace {

// Real dimension of the Lie algebra generated by both drive quadratures of
// every edge, found by saturating the span with commutators and measuring
// rank with an SVD.
int brute_force_rank(const EdgeSet& edges) {
  const int d = edges.dimension;
  auto flat = [d](const ComplexMatrix& m) {
    Eigen::VectorXd v(2 * d * d);
    for (int i = 0; i < d * d; ++i) {
      v(i) = m(i % d, i / d).real();
      v(d * d + i) = m(i % d, i / d).imag();
    }
    return v;
  };
  std::vector<ComplexMatrix> basis;
  Eigen::MatrixXd span(2 * d * d, 0);
  auto rank_of = [](const Eigen::MatrixXd& a) {
    if (a.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > 1e-9;
    return r;
  };
  auto try_add = [&](const ComplexMatrix& m) {
    Eigen::MatrixXd grown(span.rows(), span.cols() + 1);
    grown << span, flat(m);
    if (rank_of(grown) > static_cast<int>(span.cols())) {
      span = grown;
      basis.push_back(m);
      return true;
    }
    return false;
  };
  const std::complex<double> i(0.0, 1.0);
  for (const auto& [n, m] : edges.edges) {
    ComplexMatrix x = ComplexMatrix::Zero(d, d);
    x(n, m) = i;
    x(m, n) = i;
    try_add(x);
    ComplexMatrix y = ComplexMatrix::Zero(d, d);
    y(n, m) = 1.0;
    y(m, n) = -1.0;
    try_add(y);
  }
  bool grew = true;
  while (grew) {
    grew = false;
    const auto current = basis;
    for (std::size_t a = 0; a < current.size(); ++a) {
      for (std::size_t b = a + 1; b < current.size(); ++b) {
        grew |= try_add(current[a] * current[b] - current[b] * current[a]);
      }
    }
  }
  return static_cast<int>(basis.size());
}

EdgeSet random_edges(std::mt19937_64& rng, int d, double p) {
  EdgeSet e;
  e.dimension = d;
  std::bernoulli_distribution keep(p);
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      if (keep(rng)) e.add(a, b);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("union-find") {
  UnionFind uf(6);
  CHECK(uf.unite(0, 1));
  CHECK(uf.unite(1, 2));
  CHECK_FALSE(uf.unite(0, 2));
  CHECK(uf.find(2) == uf.find(0));
  CHECK(uf.find(3) != uf.find(0));
  CHECK(uf.size_of(1) == 3);
}

TEST_CASE("closure is connectivity") {
  EdgeSet e;
  e.dimension = 5;
  e.add(0, 1);
  e.add(3, 1);
  const ReachabilityResult r = graph_closure(e);
  CHECK_FALSE(r.universal);
  REQUIRE(r.components.size() == 3);
  CHECK(r.components[0] == std::vector<int>{0, 1, 3});
  CHECK(r.reachable[0][3]);
  CHECK_FALSE(r.reachable[0][2]);
  e.add(2, 4);
  e.add(4, 0);
  CHECK(graph_closure(e).universal);
  CHECK_THROWS_AS(e.add(2, 2), ValidationError);
  CHECK_THROWS_AS(e.add(0, 5), ValidationError);
}

TEST_CASE("adding an edge never removes reachability") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    EdgeSet e = random_edges(rng, 8, 0.15);
    const auto before = graph_closure(e).reachable;
    std::uniform_int_distribution<int> level(0, 7);
    int a = level(rng);
    int b = level(rng);
    if (a == b) b = (a + 1) % 8;
    e.add(a, b);
    const auto after = graph_closure(e).reachable;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) CHECK((!before[i][j] || after[i][j]));
    }
  }
}

TEST_CASE("Lie rank agrees with a brute-force commutator closure") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const EdgeSet e = random_edges(rng, d, 0.5);
    const int rank = lie_algebra_rank(e);
    CHECK(rank == brute_force_rank(e));
    int expected = 0;
    for (const auto& c : graph_closure(e).components) expected += static_cast<int>(c.size() * c.size()) - 1;
    CHECK(rank == expected);
  }
}

TEST_CASE("Lie rank dimension guard") {
  EdgeSet e;
  e.dimension = kLieRankMaxDimension + 1;
  CHECK_THROWS_AS(lie_algebra_rank(e), DomainError);
  CHECK(lie_algebra_rank(e, true) == 0);
}

TEST_CASE("Heisenberg dimer with a uniform drive is not universal") {
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  const DimerParams p{iso, iso, -0.02, {}};
  const EigenSystem es = eigensolve(hamiltonian(p, FieldSpec::along(0.5, Vec3(1, 1, 1))));
  const RabiMap m = rabi_map(es, total_spin(p), Vec3(1, -1, 0), 1.99);
  const ReachabilityResult r = graph_closure(allowed_edges(m, 0.2));
  CHECK_FALSE(r.universal);
  CHECK(r.components.size() == 8);
}

TEST_CASE("edge threshold and addressability") {
  const SingleIonParams lagd{0.096, -0.032, 1.99, 3.5};
  const EigenSystem es = eigensolve(hamiltonian(lagd, FieldSpec::along(0.5, Vec3::UnitZ())));
  const RabiMap m = rabi_map(es, total_spin(lagd), Vec3::UnitX(), 1.99);
  CHECK_THROWS_AS(allowed_edges(m, -1.0), DomainError);
  const EdgeSet all = allowed_edges(m, 0.2);
  for (int n = 0; n + 1 < 8; ++n) CHECK(all.contains(n, n + 1));
  CHECK(addressable_edges(m, all, 0.0).edges == all.edges);
  CHECK(addressable_edges(m, all, 1e6).edges.empty());
  CHECK_THROWS_AS(addressable_edges(m, all, -1.0), DomainError);
}
