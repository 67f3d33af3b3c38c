#include "qudit/nutation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "qudit/error.hpp"

namespace qudit {
namespace {

// FFTW planning is not thread-safe.
std::mutex planner_mutex;

}  // namespace

Nucleus parse_nucleus(const std::string& tag) {
  if (tag == "H1") return Nucleus::H1;
  if (tag == "N14") return Nucleus::N14;
  if (tag == "N15") return Nucleus::N15;
  throw ValidationError("unknown nucleus '" + tag + "' (expected H1, N14 or N15)");
}

const char* to_string(Nucleus n) {
  switch (n) {
    case Nucleus::H1: return "H1";
    case Nucleus::N14: return "N14";
    case Nucleus::N15: return "N15";
  }
  return "?";
}

double larmor(Nucleus n, double b_mt) {
  if (!(b_mt >= 0.0) || !std::isfinite(b_mt)) throw DomainError("field must be non-negative");
  double gamma = 0.0;
  switch (n) {
    case Nucleus::H1: gamma = kGammaH1MHzPerT; break;
    case Nucleus::N14: gamma = kGammaN14MHzPerT; break;
    case Nucleus::N15: gamma = kGammaN15MHzPerT; break;
  }
  return gamma * b_mt * 1e-3;
}

Window parse_window(const std::string& text) {
  if (text == "none") return Window::none;
  if (text == "hann") return Window::hann;
  throw ValidationError("unknown window '" + text + "' (expected none or hann)");
}

const char* to_string(Window w) { return w == Window::hann ? "hann" : "none"; }

const char* to_string(PeakLabel label) {
  switch (label) {
    case PeakLabel::rabi: return "rabi";
    case PeakLabel::two_x_larmor_n: return "two_x_larmor_N";
    case PeakLabel::larmor_h: return "larmor_H";
    case PeakLabel::unassigned: return "unassigned";
  }
  return "?";
}

void NutationOptions::validate() const {
  if (zero_pad_factor < 1) throw ValidationError("zero_pad_factor must be >= 1");
  if (!(noise_floor_multiple >= 0.0)) throw ValidationError("noise floor multiple must be >= 0");
  if (!(min_relative_height >= 0.0 && min_relative_height < 1.0)) {
    throw ValidationError("min_relative_height must lie in [0, 1)");
  }
  if (!(rabi_band_max_mhz >= rabi_band_min_mhz)) throw ValidationError("rabi band is inverted");
}

bool NutationResult::ambiguous() const { return !notes.empty(); }

std::vector<double> real_dft_magnitude(const std::vector<double>& values, std::size_t padded_size) {
  if (padded_size < values.size() || padded_size == 0) {
    throw ValidationError("padded size must be at least the input length");
  }
  const int n = static_cast<int>(padded_size);
  double* in = fftw_alloc_real(padded_size);
  fftw_complex* out = fftw_alloc_complex(padded_size / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  }
  std::fill(in, in + padded_size, 0.0);
  std::copy(values.begin(), values.end(), in);
  fftw_execute(plan);
  std::vector<double> mag(padded_size / 2 + 1);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(out[i][0], out[i][1]);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return mag;
}

NutationResult nutation_fft(const DecayTrace& trace, const NutationOptions& options) {
  trace.validate();
  options.validate();
  const auto& t = trace.times_us;
  const std::size_t n = t.size();
  const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(std::abs(dt), std::abs(t[i]))) {
      throw ValidationError("nutation trace is not uniformly sampled (row " + std::to_string(i + 1) + ")");
    }
  }

  double mean = 0.0;
  for (double y : trace.amplitude) mean += y;
  mean /= static_cast<double>(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = options.window == Window::hann
                         ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                static_cast<double>(n - 1))
                         : 1.0;
    x[i] = (trace.amplitude[i] - mean) * w;
  }

  const std::size_t padded = n * static_cast<std::size_t>(options.zero_pad_factor);
  NutationResult r;
  r.magnitude = real_dft_magnitude(x, padded);
  r.resolution_mhz = 1.0 / (static_cast<double>(padded) * dt);
  r.freq_mhz.resize(r.magnitude.size());
  for (std::size_t i = 0; i < r.freq_mhz.size(); ++i) r.freq_mhz[i] = static_cast<double>(i) * r.resolution_mhz;

  // Local maxima above the noise floor, skipping the DC bin.
  std::vector<double> sorted = r.magnitude;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double largest = *std::max_element(r.magnitude.begin(), r.magnitude.end());
  const double floor = std::max(options.noise_floor_multiple * median, options.min_relative_height * largest);
  const auto& m = r.magnitude;
  for (std::size_t i = 1; i < m.size(); ++i) {
    const bool left = m[i] > m[i - 1];
    const bool right = i + 1 == m.size() || m[i] >= m[i + 1];
    if (!(left && right && m[i] > floor && m[i] > 0.0)) continue;
    // Parabolic interpolation of the peak position.
    double offset = 0.0;
    if (i + 1 < m.size()) {
      const double den = m[i - 1] - 2.0 * m[i] + m[i + 1];
      if (den != 0.0) offset = std::clamp(0.5 * (m[i - 1] - m[i + 1]) / den, -0.5, 0.5);
    }
    r.peaks.push_back({(static_cast<double>(i) + offset) * r.resolution_mhz, m[i], PeakLabel::unassigned, {}});
  }

  const double two_n = 2.0 * larmor(options.nitrogen, trace.field_mt);
  const double nu_h = larmor(Nucleus::H1, trace.field_mt);
  const double tol = r.resolution_mhz;
  const NutationPeak* rabi = nullptr;
  for (auto& p : r.peaks) {
    if (trace.field_mt > 0.0 && std::abs(p.freq_mhz - two_n) <= tol) p.candidates.push_back(PeakLabel::two_x_larmor_n);
    if (trace.field_mt > 0.0 && std::abs(p.freq_mhz - nu_h) <= tol) p.candidates.push_back(PeakLabel::larmor_h);
    if (!p.candidates.empty()) {
      p.label = p.candidates.front();
      if (p.freq_mhz >= options.rabi_band_min_mhz && p.freq_mhz <= options.rabi_band_max_mhz) {
        p.candidates.push_back(PeakLabel::rabi);
      }
    } else if (rabi == nullptr || p.magnitude > rabi->magnitude) {
      rabi = &p;
    }
  }
  for (auto& p : r.peaks) {
    if (&p == rabi) {
      p.label = PeakLabel::rabi;
      p.candidates = {PeakLabel::rabi};
    }
    if (p.candidates.size() > 1) {
      std::string note = "peak at " + std::to_string(p.freq_mhz) + " MHz is compatible with";
      for (std::size_t i = 0; i < p.candidates.size(); ++i) {
        note += (i == 0 ? " " : " and ") + std::string(to_string(p.candidates[i]));
      }
      r.notes.push_back(note);
    }
  }
  return r;
}

}  // namespace qudit
