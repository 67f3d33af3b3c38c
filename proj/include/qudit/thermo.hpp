#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qudit/eigen_system.hpp"
#include "qudit/ensemble.hpp"
#include "qudit/hamiltonian.hpp"

namespace qudit {

/// Temperatures (K, strictly positive and ascending) and the static field.
/// For powder ensembles only the field magnitude matters.
struct ThermalGrid {
  std::vector<double> temperatures_k;
  FieldSpec field;

  void validate() const;

  static ThermalGrid log_spaced(double t_min_k, double t_max_k, int n, const FieldSpec& field);
  static ThermalGrid linear_spaced(double t_min_k, double t_max_k, int n, const FieldSpec& field);
};

/// Boltzmann populations of levels with energies in GHz. Throws DomainError
/// for t <= 0. Energies are shifted by their minimum before exponentiation.
Eigen::VectorXd populations(const Eigen::VectorXd& energies_ghz, double t_k);
Eigen::VectorXd populations(const EigenSystem& es, double t_k);

/// Magnetic heat capacity per molecule in units of R, averaged over the
/// ensemble (mean of heat capacities). Throws ValidationError on an empty
/// grid.
std::vector<double> heat_capacity(const SpinSystem& system, const EnsembleSpec& ensemble,
                                  const ThermalGrid& grid);

/// Tabulated lattice heat capacity, linearly interpolated.
struct BaselineTable {
  std::vector<double> temperature_k;
  std::vector<double> c_over_r;

  void validate() const;
  /// Throws RangeError outside [front, back].
  double at(double t_k) const;

  /// Two-column CSV with header `T_K,c_over_R`; `#` lines are comments.
  static BaselineTable read_csv(std::istream& in, const std::string& source = "<baseline>");
};

/// magnetic[i] + baseline(temperatures[i]). Throws RangeError if any
/// temperature would need extrapolation.
std::vector<double> add_lattice_baseline(std::span<const double> temperatures_k,
                                         std::span<const double> magnetic,
                                         const BaselineTable& baseline);

/// Thermal moment along the field, in muB per molecule, ensemble averaged.
double magnetization(const SpinSystem& system, const EnsembleSpec& ensemble, const FieldSpec& field,
                     double t_k);

/// Magnetization for every temperature of `grid` (muB per molecule).
std::vector<double> magnetization_curve(const SpinSystem& system, const EnsembleSpec& ensemble,
                                        const ThermalGrid& grid);

/// chi*T in emu*K/mol from M/H at a small probe field (tesla). Throws
/// DomainError for probe_field_t <= 0.
std::vector<double> chi_t_curve(const SpinSystem& system, const EnsembleSpec& ensemble,
                                const ThermalGrid& grid, double probe_field_t = 0.1);

}  // namespace qudit
