#pragma once

#include <string>
#include <vector>

#include "qudit/decay_fit.hpp"

namespace qudit {

enum class Nucleus { H1, N14, N15 };

/// Magnitude of the gyromagnetic ratio over 2 pi, MHz/T.
inline constexpr double kGammaH1MHzPerT = 42.5775;
inline constexpr double kGammaN14MHzPerT = 3.0777;
inline constexpr double kGammaN15MHzPerT = 4.3163;

/// "H1", "N14" or "N15" (case-sensitive). Throws ValidationError otherwise.
Nucleus parse_nucleus(const std::string& tag);
const char* to_string(Nucleus n);

/// Nuclear Larmor frequency in MHz for a field in mT. Throws DomainError for b < 0.
double larmor(Nucleus n, double b_mt);

enum class Window { none, hann };
Window parse_window(const std::string& text);
const char* to_string(Window w);

enum class PeakLabel { rabi, two_x_larmor_n, larmor_h, unassigned };
const char* to_string(PeakLabel label);

struct NutationPeak {
  double freq_mhz = 0.0;
  double magnitude = 0.0;
  PeakLabel label = PeakLabel::unassigned;
  /// Every label the peak is compatible with; more than one entry marks an
  /// ambiguity that is reported rather than resolved.
  std::vector<PeakLabel> candidates;
};

struct NutationOptions {
  Window window = Window::hann;
  int zero_pad_factor = 1;
  double noise_floor_multiple = 5.0;  // times the median magnitude
  double min_relative_height = 0.05;  // of the largest peak; rejects window sidelobes
  Nucleus nitrogen = Nucleus::N14;
  double rabi_band_min_mhz = 10.0;
  double rabi_band_max_mhz = 20.0;

  void validate() const;
  bool operator==(const NutationOptions&) const = default;
};

struct NutationResult {
  std::vector<double> freq_mhz;  // non-negative half, 0 .. Nyquist
  std::vector<double> magnitude;
  std::vector<NutationPeak> peaks;  // ascending frequency
  double resolution_mhz = 0.0;      // 1 / (N_padded dt)
  std::vector<std::string> notes;   // ambiguities

  bool ambiguous() const;
};

/// Mean-subtracted, windowed, zero-padded DFT magnitude of a uniformly
/// sampled trace with peak detection and nuclear-frequency labelling against
/// the trace field. A peak within one resolution bin of 2 nu(N) or nu(H1) is
/// labelled accordingly; the largest remaining peak is labelled rabi. Peaks
/// that also fall inside the Rabi band keep both candidates. Throws
/// ValidationError for fewer than 16 points or sampling that is not uniform
/// to 1e-9 relative.
NutationResult nutation_fft(const DecayTrace& trace, const NutationOptions& options = {});

/// Magnitude of the real DFT of `values` zero-padded to `padded_size`,
/// bins 0 .. padded_size / 2.
std::vector<double> real_dft_magnitude(const std::vector<double>& values, std::size_t padded_size);

}  // namespace qudit
