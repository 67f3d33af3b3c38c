#include "qudit/epr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include <Eigen/SparseCore>

#include "qudit/eigen_system.hpp"
#include "qudit/error.hpp"
#include "qudit/parallel.hpp"
#include "qudit/thermo.hpp"
#include "qudit/units.hpp"

namespace qudit {

void SpectrometerSpec::validate() const {
  if (!(frequency_ghz > 0.0)) throw ValidationError("spectrometer frequency must be positive");
  if (field_grid_t.empty()) throw ValidationError("spectrometer field grid is empty");
  for (std::size_t i = 0; i < field_grid_t.size(); ++i) {
    if (!std::isfinite(field_grid_t[i]) || field_grid_t[i] < 0.0) {
      throw ValidationError("field grid values must be finite and non-negative");
    }
    if (i > 0 && !(field_grid_t[i] > field_grid_t[i - 1])) {
      throw ValidationError("field grid must be strictly ascending");
    }
  }
  if (!(linewidth_fwhm_mt > 0.0)) throw ValidationError("linewidth must be positive");
  if (!(temperature_k > 0.0)) throw ValidationError("spectrometer temperature must be positive");
  if (!(search_step_t > 0.0)) throw ValidationError("search step must be positive");
}

SpectrometerSpec SpectrometerSpec::uniform(double frequency_ghz, double b_min_t, double b_max_t,
                                           double step_t) {
  if (!(step_t > 0.0) || !(b_max_t > b_min_t)) {
    throw ValidationError("uniform field grid needs step > 0 and b_max > b_min");
  }
  SpectrometerSpec spec;
  spec.frequency_ghz = frequency_ghz;
  const auto n = static_cast<long>(std::floor((b_max_t - b_min_t) / step_t + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) spec.field_grid_t.push_back(b_min_t + step_t * static_cast<double>(i));
  spec.validate();
  return spec;
}

const char* to_string(SpectrumKind kind) {
  return kind == SpectrumKind::absorption ? "absorption" : "first-derivative";
}

namespace {

// Unit vectors spanning the plane perpendicular to `n`.
std::pair<Vec3, Vec3> perpendicular_frame(const Vec3& n) {
  const Vec3 seed = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = n.cross(seed).normalized();
  return {u, n.cross(u).normalized()};
}

// Levels at one field with their field derivatives (Hellmann-Feynman).
struct FieldPoint {
  double field_t = 0.0;
  Eigen::VectorXd energy;
  Eigen::VectorXd slope;  // GHz/T
  ComplexMatrix states;
};

struct PairIndex {
  int lower;
  int upper;
};

// Detuning, its slope and the line weight of one pair at one field.
struct PairPoint {
  double detuning;
  double slope;
  double weight;
};

class LevelProbe {
 public:
  LevelProbe(const HamiltonianTerms& terms, const SpinOperatorSet& spin, const Vec3& dir,
             const SpectrometerSpec& spec)
      : terms_(terms), dir_(dir), moment_(terms.moment_along(dir)), spec_(spec) {
    sparse_moment_ = moment_.sparseView();
    const auto [u, v] = perpendicular_frame(dir);
    su_ = spin.along(u);
    sv_ = spin.along(v);
    const Eigen::VectorXd mu = eigenvalues(moment_);
    max_gap_slope_ = units::kBohrGHzPerT * (mu(mu.size() - 1) - mu(0));
  }

  /// Bound on |d(E_n - E_k)/dB| for any pair of sorted levels.
  double max_gap_slope() const { return max_gap_slope_; }

  FieldPoint levels(double b) const {
    EigenSystem es = eigensolve(terms_.at(b, dir_));
    const ComplexMatrix mv = sparse_moment_ * es.states;
    const Eigen::VectorXd slope =
        -units::kBohrGHzPerT * es.states.cwiseProduct(mv.conjugate()).colwise().sum().real().transpose();
    return {b, std::move(es.energies), slope, std::move(es.states)};
  }

  PairPoint pair(double b, PairIndex ij) const {
    const EigenSystem es = eigensolve_selected(terms_.at(b, dir_), {ij.lower, ij.upper});
    const auto a = es.states.col(0);
    const auto z = es.states.col(1);
    const double c = units::kBohrGHzPerT;
    const double slope = -c * (z.dot(moment_ * z) - a.dot(moment_ * a)).real();
    const Eigen::VectorXd pop = populations(es.energies, spec_.temperature_k);
    return {es.energies(ij.upper) - es.energies(ij.lower) - spec_.frequency_ghz, slope,
            intensity(a, z) * std::abs(pop(ij.lower) - pop(ij.upper))};
  }

  /// Line weights of several pairs from one eigensolve at `b`, so that
  /// pairs sharing a degenerate level use one basis of its subspace.
  std::vector<double> weights(double b, const std::vector<PairIndex>& pairs) const {
    std::vector<int> levels;
    for (const PairIndex ij : pairs) {
      levels.push_back(ij.lower);
      levels.push_back(ij.upper);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const EigenSystem es = eigensolve_selected(terms_.at(b, dir_), levels);
    const Eigen::VectorXd pop = populations(es.energies, spec_.temperature_k);
    auto column = [&](int level) {
      return es.states.col(std::lower_bound(levels.begin(), levels.end(), level) - levels.begin());
    };
    std::vector<double> out;
    for (const PairIndex ij : pairs) {
      out.push_back(intensity(column(ij.lower), column(ij.upper)) * std::abs(pop(ij.lower) - pop(ij.upper)));
    }
    return out;
  }

 private:
  const HamiltonianTerms& terms_;
  Vec3 dir_;
  double max_gap_slope_ = 0.0;
  ComplexMatrix moment_;
  Eigen::SparseMatrix<std::complex<double>> sparse_moment_;
  ComplexMatrix su_;
  ComplexMatrix sv_;

  template <class A, class Z>
  double intensity(const A& a, const Z& z) const {
    return 0.5 * (std::norm(a.dot(su_ * z)) + std::norm(a.dot(sv_ * z)));
  }
  const SpectrometerSpec& spec_;
};

// Polynomial in t on [0, 1], coefficients in ascending order.
using Poly = std::array<double, 4>;

double eval(const Poly& c, double t) {
  double y = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) y = y * t + *it;
  return y;
}

Poly cubic_hermite(double f0, double d0, double f1, double d1, double h) {
  const double a = f1 - f0 - h * d0;
  const double b = h * (d1 - d0);
  return {f0, h * d0, 3.0 * a - b, b - 2.0 * a};
}

// Root of `c` in [lo, hi] given opposite signs at the ends.
double bracketed_root(const Poly& c, double lo, double hi) {
  const bool neg_lo = eval(c, lo) < 0.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((eval(c, mid) < 0.0) == neg_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gap(const Eigen::VectorXd& v, PairIndex p) { return v(p.upper) - v(p.lower); }

Poly gap_interpolant(const FieldPoint& lo, const FieldPoint& hi, PairIndex ij, double nu) {
  return cubic_hermite(gap(lo.energy, ij) - nu, gap(lo.slope, ij), gap(hi.energy, ij) - nu, gap(hi.slope, ij),
                       hi.field_t - lo.field_t);
}

// Safeguarded Newton for the resonance of `ij` inside the bracket [a, b],
// where the detuning is negative at `a` iff `neg_a`.
Resonance newton(const LevelProbe& probe, PairIndex ij, double a, double b, bool neg_a, double x,
                 double tol = kResonanceFieldTolerance) {
  PairPoint p = probe.pair(x, ij);
  for (int iter = 0; iter < 100; ++iter) {
    ((p.detuning < 0.0) == neg_a ? a : b) = x;
    double next = p.slope != 0.0 ? x - p.detuning / p.slope : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    const bool done = std::abs(next - x) < 0.5 * tol || b - a < tol;
    x = next;
    if (done) break;
    p = probe.pair(x, ij);
  }
  return {x, ij.lower, ij.upper, p.weight};
}

// Looks for a field inside (a, b) where the detuning of `ij` has the sign
// opposite to its value at the ends, given pair slopes sa and sb of opposite
// sign. Homes in on the gap extremum by Illinois regula falsi on the slope
// and stops as soon as the sign flips, or when the Lipschitz bound on the
// gap rules out a crossing in the remaining bracket (the gap is monotone
// outside it). Returns NaN if the iteration budget runs out first.
std::optional<double> split_point(const LevelProbe& probe, PairIndex ij, double a, double fa, double sa, double b,
                                  double fb, double sb) {
  const bool neg = fa < 0.0;
  int side = 0;
  for (int iter = 0; iter < 100; ++iter) {
    if (std::abs(fa) + std::abs(fb) > probe.max_gap_slope() * (b - a)) return std::nullopt;
    double x = a - sa * (b - a) / (sb - sa);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    const PairPoint p = probe.pair(x, ij);
    if ((p.detuning < 0.0) != neg) return x;
    if (b - a < kResonanceFieldTolerance) return std::nullopt;
    if ((p.slope < 0.0) == (sa < 0.0)) {
      a = x;
      fa = p.detuning;
      sa = p.slope;
      if (side == -1) sb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = p.detuning;
      sb = p.slope;
      if (side == 1) sa *= 0.5;
      side = 1;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// Levels that may not evolve smoothly across [p0, p1]. Sorted levels are
// smooth except where neighbours meet, so a level is flagged when its state
// changes character between the ends (an odd number of swaps) or when the
// gap to a neighbour closes and reopens inside the interval (two swaps
// restore the order). For the latter the field where the neighbours meet is
// estimated from the straight-line closing of the gap.
struct Kinks {
  std::vector<bool> flagged;
  std::vector<double> meeting;  // NaN unless a neighbour gap closes inside
};

Kinks kinked_levels(const FieldPoint& p0, const FieldPoint& p1) {
  const double h = p1.field_t - p0.field_t;
  const Eigen::Index d = p0.energy.size();
  Kinks out{std::vector<bool>(static_cast<std::size_t>(d), false),
            std::vector<double>(static_cast<std::size_t>(d), std::numeric_limits<double>::quiet_NaN())};
  for (Eigen::Index n = 0; n < d; ++n) {
    const auto k = static_cast<std::size_t>(n);
    if (std::norm(p0.states.col(n).dot(p1.states.col(n))) < 0.5) out.flagged[k] = true;
    if (n + 1 == d) break;
    const double g0 = p0.energy(n + 1) - p0.energy(n);
    const double g1 = p1.energy(n + 1) - p1.energy(n);
    const double d0 = p0.slope(n + 1) - p0.slope(n);
    const double d1 = p1.slope(n + 1) - p1.slope(n);
    if (d0 < 0.0 && d1 > 0.0 && g0 / -d0 + g1 / d1 < 2.0 * h) {
      const double x = p0.field_t + std::clamp(0.5 * (g0 / -d0 + h - g1 / d1), 0.0, h);
      out.flagged[k] = out.flagged[k + 1] = true;
      out.meeting[k] = out.meeting[k + 1] = x;
    }
  }
  return out;
}

class Scanner {
 public:
  Scanner(const LevelProbe& probe, double nu, ResonanceSearch& result)
      : probe_(probe), nu_(nu), result_(result) {}

  // Finds the resonances of `pairs` inside [p0, p1]. Pairs whose levels are
  // not smooth over the interval are handed to the two halves instead.
  void scan(const FieldPoint& p0, const FieldPoint& p1, const std::vector<PairIndex>& pairs) {
    const double h = p1.field_t - p0.field_t;
    const Kinks kinks = kinked_levels(p0, p1);
    std::vector<PairIndex> deferred;
    for (const PairIndex ij : pairs) {
      const double f0 = gap(p0.energy, ij) - nu_;
      const double f1 = gap(p1.energy, ij) - nu_;
      const bool crosses = (f0 < 0.0) != (f1 < 0.0);
      if (!crosses && std::abs(f0) + std::abs(f1) > probe_.max_gap_slope() * h) continue;
      const auto lo = static_cast<std::size_t>(ij.lower);
      const auto up = static_cast<std::size_t>(ij.upper);
      if (kinks.flagged[lo] || kinks.flagged[up]) {
        if (h > kResonanceFieldTolerance) {
          deferred.push_back(ij);
          continue;
        }
        // Two near-coincident roots closer than the tolerance: the gap can
        // only turn back where one of its levels meets a neighbour.
        if (!crosses && touches(ij, p0.field_t, p1.field_t, f0 < 0.0, {kinks.meeting[lo], kinks.meeting[up]})) {
          continue;
        }
      }
      if (crosses) {
        const double t = bracketed_root(gap_interpolant(p0, p1, ij, nu_), 0.0, 1.0);
        result_.resonances.push_back(newton(probe_, ij, p0.field_t, p1.field_t, f0 < 0.0, p0.field_t + t * h));
        continue;
      }
      // A smooth gap that turns back toward the frequency may cross it twice.
      const double s0 = gap(p0.slope, ij);
      const double s1 = gap(p1.slope, ij);
      const bool toward = f0 > 0.0 ? (s0 < 0.0 && s1 > 0.0) : (s0 > 0.0 && s1 < 0.0);
      if (!toward) continue;
      if (const auto x = split_point(probe_, ij, p0.field_t, f0, s0, p1.field_t, f1, s1)) {
        if (std::isnan(*x)) {
          std::ostringstream msg;
          msg << "levels " << ij.lower << "-" << ij.upper << " in [" << p0.field_t << ", " << p1.field_t
              << "] T may cross twice but could not be separated";
          result_.warnings.push_back(msg.str());
          continue;
        }
        const bool neg = f0 < 0.0;
        result_.resonances.push_back(newton(probe_, ij, p0.field_t, *x, neg, 0.5 * (p0.field_t + *x)));
        result_.resonances.push_back(newton(probe_, ij, *x, p1.field_t, !neg, 0.5 * (*x + p1.field_t)));
      }
    }
    if (deferred.empty()) return;
    const FieldPoint mid = probe_.levels(0.5 * (p0.field_t + p1.field_t));
    scan(p0, mid, deferred);
    scan(mid, p1, deferred);
  }

 private:
  const LevelProbe& probe_;
  double nu_;
  ResonanceSearch& result_;

  bool touches(PairIndex ij, double a, double b, bool neg, std::array<double, 2> meetings) {
    for (const double x : meetings) {
      if (std::isnan(x) || !(x > a && x < b)) continue;
      if ((probe_.pair(x, ij).detuning < 0.0) == neg) continue;
      // Each root is refined well away from the meeting point, where the
      // states of the pair are still distinct.
      const double tol = 1e-4 * kResonanceFieldTolerance;
      result_.resonances.push_back(newton(probe_, ij, a, x, neg, 0.5 * (a + x), tol));
      result_.resonances.push_back(newton(probe_, ij, x, b, !neg, 0.5 * (x + b), tol));
      return true;
    }
    return false;
  }
};

// Two resonances at the same field whose pairs differ by one neighbouring
// level meet at a degeneracy, where each separate eigensolve picks its own
// basis of the degenerate subspace. Each connected group of such resonances
// has its weights recomputed together at the group's mean field.
void reweigh_degenerate(const LevelProbe& probe, std::vector<Resonance>& rs) {
  auto linked = [](const Resonance& a, const Resonance& b) {
    if (std::abs(a.field_t - b.field_t) >= 2.0 * kResonanceFieldTolerance) return false;
    return (a.lower == b.lower && std::abs(a.upper - b.upper) == 1) ||
           (a.upper == b.upper && std::abs(a.lower - b.lower) == 1);
  };
  for (std::size_t first = 0; first < rs.size();) {
    std::size_t last = first + 1;
    while (last < rs.size() && rs[last].field_t - rs[last - 1].field_t < 2.0 * kResonanceFieldTolerance) ++last;
    std::vector<std::size_t> group(last - first);
    for (std::size_t i = 0; i < group.size(); ++i) group[i] = i;
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = first; i < last; ++i) {
        for (std::size_t j = i + 1; j < last; ++j) {
          if (!linked(rs[i], rs[j])) continue;
          const std::size_t g = std::min(group[i - first], group[j - first]);
          if (group[i - first] != g || group[j - first] != g) {
            group[i - first] = group[j - first] = g;
            changed = true;
          }
        }
      }
    }
    for (std::size_t g = 0; g < group.size(); ++g) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < group.size(); ++i) {
        if (group[i] == g) members.push_back(first + i);
      }
      if (members.size() < 2) continue;
      std::vector<PairIndex> pairs;
      double field = 0.0;
      for (const std::size_t i : members) {
        pairs.push_back({rs[i].lower, rs[i].upper});
        field += rs[i].field_t;
      }
      const std::vector<double> w = probe.weights(field / static_cast<double>(members.size()), pairs);
      for (std::size_t k = 0; k < members.size(); ++k) rs[members[k]].weight = w[k];
    }
    first = last;
  }
}

ResonanceSearch search(const HamiltonianTerms& terms, const SpinOperatorSet& spin,
                       const Vec3& orientation, const SpectrometerSpec& spec) {
  const Vec3 dir = orientation.normalized();
  const double b_min = spec.field_grid_t.front();
  const double b_max = spec.field_grid_t.back();
  const auto d = static_cast<int>(terms.zero_field.rows());
  const LevelProbe probe(terms, spin, dir, spec);

  std::vector<PairIndex> pairs;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) pairs.push_back({a, b});
  }
  ResonanceSearch result;
  Scanner scanner(probe, spec.frequency_ghz, result);
  FieldPoint prev = probe.levels(b_min);
  for (double b = b_min + spec.search_step_t; prev.field_t < b_max; b += spec.search_step_t) {
    FieldPoint next = probe.levels(std::min(b, b_max));
    scanner.scan(prev, next, pairs);
    prev = std::move(next);
  }
  std::stable_sort(result.resonances.begin(), result.resonances.end(),
                   [](const Resonance& a, const Resonance& b) { return a.field_t < b.field_t; });
  reweigh_degenerate(probe, result.resonances);
  return result;
}

std::vector<double> gaussian_convolve(const std::vector<double>& grid, const std::vector<double>& h,
                                      double fwhm_t) {
  const double sigma = fwhm_to_sigma(fwhm_t);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  const double reach = 8.0 * sigma;
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (h[j] == 0.0) continue;
    const auto first = std::lower_bound(grid.begin(), grid.end(), grid[j] - reach);
    const auto last = std::upper_bound(grid.begin(), grid.end(), grid[j] + reach);
    for (auto it = first; it != last; ++it) {
      const double x = (*it - grid[j]) / sigma;
      out[static_cast<std::size_t>(it - grid.begin())] += h[j] * norm * std::exp(-0.5 * x * x);
    }
  }
  return out;
}

}  // namespace

ResonanceSearch resonance_search(const SpinSystem& system, const Vec3& orientation,
                                 const SpectrometerSpec& spec) {
  spec.validate();
  if (!(orientation.norm() > 0.0)) throw ValidationError("orientation must be non-zero");
  return search(HamiltonianTerms(system), total_spin(system), orientation, spec);
}

Spectrum powder_spectrum(const SpinSystem& system, const EnsembleSpec& ensemble,
                         const SpectrometerSpec& spec) {
  spec.validate();
  const std::vector<SpinSystem> samples = strain_samples(system, ensemble);
  const std::vector<Vec3> dirs = ensemble_orientations(ensemble, Vec3::UnitZ());
  const SpinOperatorSet spin = total_spin(system);
  const auto terms = parallel_map(samples.size(), ensemble.threads,
                                  [&](std::size_t i) { return HamiltonianTerms(samples[i]); });

  const std::size_t n = samples.size() * dirs.size();
  const auto searches = parallel_map(n, ensemble.threads, [&](std::size_t k) {
    return search(terms[k / dirs.size()], spin, dirs[k % dirs.size()], spec);
  });

  const auto& grid = spec.field_grid_t;
  std::vector<double> histogram(grid.size(), 0.0);
  Spectrum out;
  std::size_t suspect = 0;
  for (const auto& s : searches) {
    for (const auto& r : s.resonances) {
      // Nearest grid point.
      auto it = std::lower_bound(grid.begin(), grid.end(), r.field_t);
      if (it == grid.end()) {
        --it;
      } else if (it != grid.begin() && r.field_t - *std::prev(it) <= *it - r.field_t) {
        --it;
      }
      histogram[static_cast<std::size_t>(it - grid.begin())] += r.weight;
    }
    suspect += s.warnings.size();
  }
  for (auto& h : histogram) h /= static_cast<double>(n);
  if (suspect > 0) {
    out.warnings.push_back(std::to_string(suspect) + " search intervals over " + std::to_string(n) +
                           " ensemble members may hide a pair of resonances; reduce search_step");
  }

  out.field_t = grid;
  out.amplitude = gaussian_convolve(grid, histogram, units::millitesla_to_tesla(spec.linewidth_fwhm_mt));
  out.kind = SpectrumKind::absorption;
  return out;
}

Spectrum derivative_spectrum(const Spectrum& s) {
  if (s.kind != SpectrumKind::absorption) {
    throw ValidationError("derivative_spectrum expects an absorption spectrum");
  }
  if (s.field_t.size() != s.amplitude.size() || s.field_t.size() < 2) {
    throw ValidationError("spectrum needs at least two points with matching arrays");
  }
  const auto& b = s.field_t;
  const auto& a = s.amplitude;
  const std::size_t n = b.size();
  Spectrum out{b, std::vector<double>(n), SpectrumKind::first_derivative, s.warnings};
  out.amplitude[0] = (a[1] - a[0]) / (b[1] - b[0]);
  out.amplitude[n - 1] = (a[n - 1] - a[n - 2]) / (b[n - 1] - b[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.amplitude[i] = (a[i + 1] - a[i - 1]) / (b[i + 1] - b[i - 1]);
  }
  return out;
}

}  // namespace qudit
