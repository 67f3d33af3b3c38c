#include "qudit/ensemble.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "qudit/error.hpp"

namespace qudit {

void EnsembleSpec::validate() const {
  if (n_orientations < 1) throw ValidationError("n_orientations must be >= 1");
  if (!(strain.d_fwhm_fraction >= 0.0) || !(strain.e_fwhm_fraction >= 0.0) ||
      !(strain.j_fwhm_k >= 0.0)) {
    throw ValidationError("strain widths must be non-negative");
  }
  if (n_strain_samples < 1) throw ValidationError("n_strain_samples must be >= 1");
  if (threads < 1) throw ValidationError("threads must be >= 1");
}

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

std::vector<Vec3> powder_orientations(int n) {
  if (n < 1) throw ValidationError("powder grid needs at least one orientation");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

std::vector<Vec3> ensemble_orientations(const EnsembleSpec& ensemble, const Vec3& field_direction) {
  ensemble.validate();
  if (ensemble.n_orientations == 1) return {field_direction.normalized()};
  return powder_orientations(ensemble.n_orientations);
}

namespace {

void perturb(SingleIonParams& ion, const StrainSpec& strain, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double dz = unit(rng);
  const double ez = unit(rng);
  ion.d_zfs_k += fwhm_to_sigma(strain.d_fwhm_fraction * std::abs(ion.d_zfs_k)) * dz;
  ion.e_zfs_k += fwhm_to_sigma(strain.e_fwhm_fraction * std::abs(ion.e_zfs_k)) * ez;
}

}  // namespace

std::vector<SpinSystem> strain_samples(const SpinSystem& nominal, const EnsembleSpec& ensemble) {
  ensemble.validate();
  if (!ensemble.strain.active()) return {nominal};

  std::mt19937_64 rng(ensemble.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<SpinSystem> samples;
  samples.reserve(static_cast<std::size_t>(ensemble.n_strain_samples));
  for (int i = 0; i < ensemble.n_strain_samples; ++i) {
    SpinSystem draw = nominal;
    if (auto* ion = std::get_if<SingleIonParams>(&draw)) {
      perturb(*ion, ensemble.strain, rng);
    } else {
      auto& dimer = std::get<DimerParams>(draw);
      perturb(dimer.site1, ensemble.strain, rng);
      perturb(dimer.site2, ensemble.strain, rng);
      dimer.j_exchange_k += fwhm_to_sigma(ensemble.strain.j_fwhm_k) * unit(rng);
    }
    samples.push_back(std::move(draw));
  }
  return samples;
}

}  // namespace qudit
