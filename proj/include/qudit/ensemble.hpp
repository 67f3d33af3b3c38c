#pragma once

#include <cstdint>
#include <vector>

#include "qudit/hamiltonian.hpp"

namespace qudit {

/// Gaussian distributions of the anisotropy parameters across the ensemble.
/// D and E widths are FWHM as fractions of |nominal|; the optional J width is
/// an absolute FWHM in kelvin.
struct StrainSpec {
  double d_fwhm_fraction = 0.0;
  double e_fwhm_fraction = 0.0;
  double j_fwhm_k = 0.0;

  bool active() const { return d_fwhm_fraction > 0.0 || e_fwhm_fraction > 0.0 || j_fwhm_k > 0.0; }
  bool operator==(const StrainSpec&) const = default;
};

/// Inhomogeneous, non-interacting ensemble: a powder of orientations times
/// a set of strain samples.
struct EnsembleSpec {
  int n_orientations = 230;  // 1 means a single crystal along the given field direction
  StrainSpec strain;
  int n_strain_samples = 1;  // ignored when strain is inactive
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  bool operator==(const EnsembleSpec&) const = default;
};

/// Deterministic equal-area spiral on the upper hemisphere (z >= 0).
/// Opposite field directions give identical spectra, so the hemisphere
/// covers the full sphere.
std::vector<Vec3> powder_orientations(int n);

/// Orientations used for `ensemble`: the field direction itself for a
/// single crystal, otherwise the hemisphere spiral.
std::vector<Vec3> ensemble_orientations(const EnsembleSpec& ensemble, const Vec3& field_direction);

/// Parameter draws for the ensemble. Returns the nominal system alone when
/// strain is inactive, so zero-width strain reproduces the unstrained result
/// exactly.
std::vector<SpinSystem> strain_samples(const SpinSystem& nominal, const EnsembleSpec& ensemble);

/// Converts a full width at half maximum to a standard deviation.
double fwhm_to_sigma(double fwhm);

}  // namespace qudit
