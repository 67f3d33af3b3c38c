#pragma once

#include <string>
#include <vector>

#include "qudit/ensemble.hpp"
#include "qudit/hamiltonian.hpp"

namespace qudit {

/// Field-swept cw spectrometer settings.
struct SpectrometerSpec {
  double frequency_ghz = 9.886;
  std::vector<double> field_grid_t;  // binning grid, strictly ascending
  double linewidth_fwhm_mt = 5.0;    // Gaussian convolution width
  double temperature_k = 6.0;
  double search_step_t = 0.005;  // bracketing step of the resonance search

  void validate() const;

  /// Grid from `b_min_t` to `b_max_t` (inclusive) in steps of `step_t`.
  static SpectrometerSpec uniform(double frequency_ghz, double b_min_t, double b_max_t,
                                  double step_t);
};

/// Transition between sorted levels `lower` < `upper` that is resonant at `field_t`.
struct Resonance {
  double field_t = 0.0;
  int lower = 0;
  int upper = 0;
  double weight = 0.0;  // |<lower|S_perp|upper>|^2 times the population difference
};

struct ResonanceSearch {
  std::vector<Resonance> resonances;  // ordered by field
  std::vector<std::string> warnings;
};

/// Bisection tolerance of the resonance search, tesla.
inline constexpr double kResonanceFieldTolerance = 1e-5;

/// All fields inside the spectrometer grid range where a level-pair
/// frequency equals the spectrometer frequency, for a static field along
/// `orientation` (molecular frame). Crossings are bracketed on a grid of
/// `search_step_t` and refined by safeguarded Newton iteration to
/// kResonanceFieldTolerance, starting from a cubic Hermite interpolant of
/// the level gap. Grid intervals in which a level meets a neighbour are
/// bisected until the levels are smooth again, so pairs that cross the
/// frequency several times inside one interval are all found. A smooth gap
/// that turns back toward the frequency is probed at its extremum when the
/// largest possible gap slope allows a crossing; pairs that cannot be
/// separated this way are listed in `warnings`.
ResonanceSearch resonance_search(const SpinSystem& system, const Vec3& orientation,
                                 const SpectrometerSpec& spec);

enum class SpectrumKind { absorption, first_derivative };

struct Spectrum {
  std::vector<double> field_t;
  std::vector<double> amplitude;
  SpectrumKind kind = SpectrumKind::absorption;
  std::vector<std::string> warnings;
};

/// Powder and strain averaged absorption spectrum, binned on the spectrometer
/// grid and convolved with a unit-area Gaussian of the spectrometer linewidth.
/// Unresolved search warnings are summarised in one line. Throws
/// ValidationError on an empty grid.
Spectrum powder_spectrum(const SpinSystem& system, const EnsembleSpec& ensemble,
                         const SpectrometerSpec& spec);

/// First derivative dA/dB (per tesla) by central differences, one-sided at
/// the ends. Throws ValidationError if `s` is already a derivative.
Spectrum derivative_spectrum(const Spectrum& s);

const char* to_string(SpectrumKind kind);

}  // namespace qudit
