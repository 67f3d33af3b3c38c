#include "qudit/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "qudit/error.hpp"
#include "qudit/parallel.hpp"
#include "qudit/units.hpp"

namespace qudit {
namespace {

void check_temperature(double t_k) {
  if (!(t_k > 0.0) || !std::isfinite(t_k)) {
    throw DomainError("temperature must be positive and finite");
  }
}

// Mean over (strain sample x orientation) of a per-member vector of
// observables. Members are evaluated in parallel and summed in index order.
template <class Member>
std::vector<double> ensemble_mean(const SpinSystem& system, const EnsembleSpec& ensemble,
                                  const FieldSpec& field, std::size_t width, Member&& member) {
  const std::vector<SpinSystem> samples = strain_samples(system, ensemble);
  // At zero field every orientation is equivalent.
  const std::vector<Vec3> dirs = field.magnitude_t == 0.0
                                     ? std::vector<Vec3>{field.direction}
                                     : ensemble_orientations(ensemble, field.direction);
  const auto terms = parallel_map(samples.size(), ensemble.threads,
                                  [&](std::size_t i) { return HamiltonianTerms(samples[i]); });

  const std::size_t n = samples.size() * dirs.size();
  const auto values = parallel_map(n, ensemble.threads, [&](std::size_t k) {
    return member(terms[k / dirs.size()], dirs[k % dirs.size()]);
  });

  std::vector<double> mean(width, 0.0);
  for (const auto& v : values) {
    for (std::size_t j = 0; j < width; ++j) mean[j] += v[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  return mean;
}

double schottky_c_over_r(const Eigen::VectorXd& energies_ghz, double t_k) {
  const Eigen::VectorXd p = populations(energies_ghz, t_k);
  const Eigen::ArrayXd x =
      (energies_ghz.array() - energies_ghz.minCoeff()) / units::kBoltzmannGHzPerK;  // kelvin
  const double mean = (p.array() * x).sum();
  const double mean_sq = (p.array() * x.square()).sum();
  return std::max(0.0, mean_sq - mean * mean) / (t_k * t_k);
}

}  // namespace

void ThermalGrid::validate() const {
  if (temperatures_k.empty()) throw ValidationError("thermal grid is empty");
  for (std::size_t i = 0; i < temperatures_k.size(); ++i) {
    if (!(temperatures_k[i] > 0.0) || !std::isfinite(temperatures_k[i])) {
      throw ValidationError("temperatures must be positive and finite");
    }
    if (i > 0 && !(temperatures_k[i] > temperatures_k[i - 1])) {
      throw ValidationError("temperatures must be strictly ascending");
    }
  }
  field.validate();
}

ThermalGrid ThermalGrid::log_spaced(double t_min_k, double t_max_k, int n, const FieldSpec& field) {
  if (n < 1 || !(t_min_k > 0.0) || !(t_max_k >= t_min_k)) {
    throw ValidationError("log-spaced grid needs n >= 1 and 0 < t_min <= t_max");
  }
  ThermalGrid grid{{}, field};
  const double a = std::log(t_min_k);
  const double b = std::log(t_max_k);
  for (int i = 0; i < n; ++i) {
    grid.temperatures_k.push_back(n == 1 ? t_min_k : std::exp(a + (b - a) * i / (n - 1)));
  }
  grid.validate();
  return grid;
}

ThermalGrid ThermalGrid::linear_spaced(double t_min_k, double t_max_k, int n, const FieldSpec& field) {
  if (n < 1 || !(t_min_k > 0.0) || !(t_max_k >= t_min_k)) {
    throw ValidationError("linear grid needs n >= 1 and 0 < t_min <= t_max");
  }
  ThermalGrid grid{{}, field};
  for (int i = 0; i < n; ++i) {
    grid.temperatures_k.push_back(n == 1 ? t_min_k : t_min_k + (t_max_k - t_min_k) * i / (n - 1));
  }
  grid.validate();
  return grid;
}

Eigen::VectorXd populations(const Eigen::VectorXd& energies_ghz, double t_k) {
  check_temperature(t_k);
  if (energies_ghz.size() == 0) throw ValidationError("no energy levels");
  const double kt = units::kBoltzmannGHzPerK * t_k;
  Eigen::VectorXd w = (-(energies_ghz.array() - energies_ghz.minCoeff()) / kt).exp().matrix();
  return w / w.sum();
}

Eigen::VectorXd populations(const EigenSystem& es, double t_k) { return populations(es.energies, t_k); }

std::vector<double> heat_capacity(const SpinSystem& system, const EnsembleSpec& ensemble,
                                  const ThermalGrid& grid) {
  grid.validate();
  const auto& temps = grid.temperatures_k;
  return ensemble_mean(system, ensemble, grid.field, temps.size(),
                       [&](const HamiltonianTerms& terms, const Vec3& dir) {
                         const Eigen::VectorXd e = eigenvalues(terms.at(grid.field.magnitude_t, dir));
                         std::vector<double> c(temps.size());
                         for (std::size_t j = 0; j < temps.size(); ++j) {
                           c[j] = schottky_c_over_r(e, temps[j]);
                         }
                         return c;
                       });
}

void BaselineTable::validate() const {
  if (temperature_k.size() != c_over_r.size() || temperature_k.empty()) {
    throw ValidationError("baseline table needs matching, non-empty columns");
  }
  for (std::size_t i = 0; i < temperature_k.size(); ++i) {
    if (i > 0 && !(temperature_k[i] > temperature_k[i - 1])) {
      throw ValidationError("baseline temperatures must be strictly ascending");
    }
    if (!(c_over_r[i] >= 0.0)) throw ValidationError("baseline c/R must be non-negative");
  }
}

double BaselineTable::at(double t_k) const {
  if (!(t_k >= temperature_k.front() && t_k <= temperature_k.back())) {
    throw RangeError("temperature " + std::to_string(t_k) + " K outside baseline range [" +
                     std::to_string(temperature_k.front()) + ", " +
                     std::to_string(temperature_k.back()) + "] K");
  }
  const auto hi = std::lower_bound(temperature_k.begin(), temperature_k.end(), t_k);
  const auto j = static_cast<std::size_t>(hi - temperature_k.begin());
  if (temperature_k[j] == t_k) return c_over_r[j];
  const double w = (t_k - temperature_k[j - 1]) / (temperature_k[j] - temperature_k[j - 1]);
  return (1.0 - w) * c_over_r[j - 1] + w * c_over_r[j];
}

BaselineTable BaselineTable::read_csv(std::istream& in, const std::string& source) {
  BaselineTable table;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "T_K,c_over_R") throw DataError(source, line_no, "expected header 'T_K,c_over_R'");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    double t = 0.0;
    double c = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> c) || comma != ',') {
      throw DataError(source, line_no, "expected two numeric columns");
    }
    table.temperature_k.push_back(t);
    table.c_over_r.push_back(c);
  }
  if (!header_seen) throw DataError(source, 0, "missing header");
  try {
    table.validate();
  } catch (const ValidationError& e) {
    throw DataError(source, 0, e.what());
  }
  return table;
}

std::vector<double> add_lattice_baseline(std::span<const double> temperatures_k,
                                         std::span<const double> magnetic,
                                         const BaselineTable& baseline) {
  if (temperatures_k.size() != magnetic.size()) {
    throw ValidationError("temperature and c/R arrays differ in length");
  }
  baseline.validate();
  std::vector<double> out(magnetic.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = magnetic[i] + baseline.at(temperatures_k[i]);
  }
  return out;
}

std::vector<double> magnetization_curve(const SpinSystem& system, const EnsembleSpec& ensemble,
                                        const ThermalGrid& grid) {
  grid.validate();
  const auto& temps = grid.temperatures_k;
  for (double t : temps) check_temperature(t);
  return ensemble_mean(system, ensemble, grid.field, temps.size(),
                       [&](const HamiltonianTerms& terms, const Vec3& dir) {
                         const EigenSystem es = eigensolve(terms.at(grid.field.magnitude_t, dir));
                         const Eigen::VectorXd moment =
                             (es.states.adjoint() * terms.moment_along(dir) * es.states)
                                 .diagonal()
                                 .real();
                         std::vector<double> m(temps.size());
                         for (std::size_t j = 0; j < temps.size(); ++j) {
                           m[j] = populations(es.energies, temps[j]).dot(moment);
                         }
                         return m;
                       });
}

double magnetization(const SpinSystem& system, const EnsembleSpec& ensemble, const FieldSpec& field,
                     double t_k) {
  check_temperature(t_k);
  return magnetization_curve(system, ensemble, ThermalGrid{{t_k}, field}).front();
}

std::vector<double> chi_t_curve(const SpinSystem& system, const EnsembleSpec& ensemble,
                                const ThermalGrid& grid, double probe_field_t) {
  if (!(probe_field_t > 0.0) || !std::isfinite(probe_field_t)) {
    throw DomainError("probe field must be positive");
  }
  ThermalGrid probe = grid;
  probe.field.magnitude_t = probe_field_t;
  std::vector<double> m = magnetization_curve(system, ensemble, probe);
  const double h_oe = probe_field_t * units::kOerstedPerTesla;
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = probe.temperatures_k[i] * m[i] * units::kAvogadroBohrEmu / h_oe;
  }
  return m;
}

}  // namespace qudit
