#include <doctest.h>

#include <algorithm>

#include "qudit/eigen_system.hpp"
#include "qudit/epr.hpp"
#include "qudit/error.hpp"
#include "qudit/units.hpp"

using namespace qudit;

namespace {

const DimerParams kGd2{{0.096, -0.032, 1.99, 3.5}, {0.115, 0.038, 1.99, 3.5}, -0.02, {}};

struct Root {
  double field_t;
  int lower;
  int upper;
};

// Every sign change of every level-pair detuning on a fine grid, refined by
// bisection on eigenvalues alone.
std::vector<Root> brute_force_roots(const SpinSystem& s, const Vec3& dir, double nu, double b_max, double step) {
  const HamiltonianTerms terms(s);
  std::vector<Eigen::VectorXd> levels;
  std::vector<double> grid;
  for (double b = 0.0; b < b_max + 0.5 * step; b += step) {
    grid.push_back(std::min(b, b_max));
    levels.push_back(eigenvalues(terms.at(grid.back(), dir)));
  }
  std::vector<Root> out;
  const auto d = static_cast<int>(levels[0].size());
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        auto f = [&](const Eigen::VectorXd& e) { return e(b) - e(a) - nu; };
        const double f0 = f(levels[k]);
        if ((f0 < 0.0) == (f(levels[k + 1]) < 0.0)) continue;
        double lo = grid[k];
        double hi = grid[k + 1];
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          ((f(eigenvalues(terms.at(mid, dir))) < 0.0) == (f0 < 0.0) ? lo : hi) = mid;
        }
        out.push_back({0.5 * (lo + hi), a, b});
      }
    }
  }
  return out;
}

double peak_field(const Spectrum& s) {
  const auto it = std::max_element(s.amplitude.begin(), s.amplitude.end());
  return s.field_t[static_cast<std::size_t>(it - s.amplitude.begin())];
}

}  // namespace

TEST_CASE("spin-1/2 resonance sits at h nu / g muB") {
  const SingleIonParams half{0.0, 0.0, 1.99, 0.5};
  const auto spec = SpectrometerSpec::uniform(9.886, 0.0, 1.0, 0.001);
  const ResonanceSearch r = resonance_search(half, Vec3::UnitZ(), spec);
  REQUIRE(r.resonances.size() == 1);
  const double expected = 9.886 / (1.99 * units::kBohrGHzPerT);
  CHECK(std::abs(r.resonances[0].field_t - expected) < kResonanceFieldTolerance);
  CHECK(std::abs(units::tesla_to_millitesla(r.resonances[0].field_t) - 354.9) < 0.1);
}

TEST_CASE("dimer resonances agree with a brute-force bisection oracle") {
  const Vec3 dir = Vec3(0.3, 0.4, 0.8).normalized();
  const auto spec = SpectrometerSpec::uniform(9.886, 0.0, 0.6, 0.001);
  const ResonanceSearch r = resonance_search(kGd2, dir, spec);
  const auto brute = brute_force_roots(kGd2, dir, 9.886, 0.6, 0.0005);
  CHECK(r.warnings.empty());
  REQUIRE(!brute.empty());
  for (const Root& b : brute) {
    const bool found = std::any_of(r.resonances.begin(), r.resonances.end(), [&](const Resonance& x) {
      return x.lower == b.lower && x.upper == b.upper && std::abs(x.field_t - b.field_t) < kResonanceFieldTolerance;
    });
    CHECK_MESSAGE(found, "missing root " << b.lower << "-" << b.upper << " at " << b.field_t);
  }
  // Anything beyond the oracle must be a genuine pair of close crossings.
  CHECK(r.resonances.size() >= brute.size());
  const HamiltonianTerms terms(kGd2);
  for (const Resonance& x : r.resonances) {
    const Eigen::VectorXd e = eigenvalues(terms.at(x.field_t, dir));
    CHECK(std::abs(e(x.upper) - e(x.lower) - 9.886) < 1e-3);
    CHECK(x.weight >= 0.0);
  }
}

TEST_CASE("isotropic high spin collapses to one line") {
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  const auto spec = SpectrometerSpec::uniform(9.886, 0.0, 1.0, 0.001);
  const ResonanceSearch r = resonance_search(iso, Vec3(1, 2, 2), spec);
  // Multi-quantum crossings at B0 / k are found too but carry no weight.
  std::vector<Resonance> allowed;
  for (const auto& x : r.resonances) {
    if (x.weight > 1e-12) allowed.push_back(x);
  }
  REQUIRE(allowed.size() == 7);
  for (const auto& x : allowed) CHECK(std::abs(x.field_t - allowed[0].field_t) < 2 * kResonanceFieldTolerance);
  CHECK(r.resonances.size() == 28);
}

TEST_CASE("line position scales with the microwave frequency") {
  const SingleIonParams iso{0.0, 0.0, 1.99, 3.5};
  EnsembleSpec e;
  e.n_orientations = 5;
  auto x = SpectrometerSpec::uniform(9.886, 0.0, 1.5, 0.0005);
  auto q = SpectrometerSpec::uniform(33.33, 0.0, 1.5, 0.0005);
  const double bx = peak_field(powder_spectrum(iso, e, x));
  const double bq = peak_field(powder_spectrum(iso, e, q));
  CHECK(std::abs(bq - bx * 33.33 / 9.886) < 0.0005 * (1.0 + 33.33 / 9.886));
}

TEST_CASE("zero-width strain reproduces the unstrained spectrum exactly") {
  const SingleIonParams lagd{0.096, -0.032, 1.99, 3.5};
  const auto spec = SpectrometerSpec::uniform(9.886, 0.0, 1.0, 0.002);
  EnsembleSpec plain;
  plain.n_orientations = 10;
  EnsembleSpec zero = plain;
  zero.n_strain_samples = 8;
  zero.seed = 99;
  CHECK(powder_spectrum(lagd, plain, spec).amplitude == powder_spectrum(lagd, zero, spec).amplitude);
}

TEST_CASE("spectrum is independent of the thread count") {
  const SingleIonParams gdlu{0.115, 0.038, 1.99, 3.5};
  const auto spec = SpectrometerSpec::uniform(9.886, 0.0, 1.0, 0.002);
  EnsembleSpec one;
  one.n_orientations = 16;
  one.strain.d_fwhm_fraction = 0.6;
  one.n_strain_samples = 3;
  EnsembleSpec many = one;
  many.threads = 3;
  const auto a = powder_spectrum(gdlu, one, spec).amplitude;
  const auto b = powder_spectrum(gdlu, many, spec).amplitude;
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
}

TEST_CASE("derivative spectrum") {
  const SingleIonParams half{0.0, 0.0, 1.99, 0.5};
  EnsembleSpec e;
  e.n_orientations = 3;
  const auto s = powder_spectrum(half, e, SpectrometerSpec::uniform(9.886, 0.3, 0.4, 0.0005));
  CHECK(s.kind == SpectrumKind::absorption);
  const auto d = derivative_spectrum(s);
  CHECK(d.kind == SpectrumKind::first_derivative);
  CHECK_THROWS_AS(derivative_spectrum(d), ValidationError);
  // Zero crossing of the derivative at the absorption maximum.
  const double peak = peak_field(s);
  CHECK(std::abs(peak - 9.886 / (1.99 * units::kBohrGHzPerT)) < 0.0005);
}

TEST_CASE("spectrometer validation") {
  CHECK_THROWS_AS(SpectrometerSpec::uniform(9.886, 1.0, 0.5, 0.001), ValidationError);
  CHECK_THROWS_AS(SpectrometerSpec::uniform(-1.0, 0.0, 0.5, 0.001), ValidationError);
}
