#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qudit/error.hpp"

namespace qudit {

enum class EchoKind { two_pulse, three_pulse };

const char* to_string(EchoKind kind);
/// Accepts "two-pulse"/"2p" and "three-pulse"/"3p". Throws ValidationError otherwise.
EchoKind parse_echo_kind(const std::string& text);

/// Sampled echo decay (or nutation) trace. For two-pulse traces the abscissa
/// is the pulse separation tau, for three-pulse traces the delay T.
struct DecayTrace {
  std::vector<double> times_us;
  std::vector<double> amplitude;
  EchoKind kind = EchoKind::two_pulse;
  double field_mt = 0.0;
  std::string source;  // file name or other label, for messages

  /// At least 16 points, strictly ascending finite times, matching lengths.
  void validate() const;
};

inline constexpr std::size_t kMinTracePoints = 16;

/// y0 + a * exp(-2 t / t_decay) * (1 + k exp(-lambda t) cos(2 pi nu t + phi)),
/// with exp(-t / t_decay) for three-pulse traces.
struct DecayParams {
  double y0 = 0.0;
  double a = 1.0;
  double t_decay_us = 1.0;
  double k = 0.0;
  double lambda_per_us = 0.0;
  double nu_mhz = 0.0;
  double phi = 0.0;

  static constexpr int kCount = 7;
  static const char* name(int i);
  double& operator[](int i);
  double operator[](int i) const;
};

double decay_model(const DecayParams& p, EchoKind kind, double t_us);

struct DecayFit {
  DecayParams params;
  DecayParams errors;  // one standard error per parameter
  double residual_norm = 0.0;
  int iterations = 0;
  /// Non-fatal diagnostics, e.g. "t_decay_at_bound", "modulation_unidentified".
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

/// Raised when the optimiser does not converge. Carries the best parameters
/// found and the optimiser report.
class FitError : public Error {
 public:
  FitError(const std::string& what, DecayFit best, std::string diagnostic)
      : Error(what), best_(std::move(best)), diagnostic_(std::move(diagnostic)) {}

  const DecayFit& best() const noexcept { return best_; }
  const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  DecayFit best_;
  std::string diagnostic_;
};

struct FitOptions {
  int max_iterations = 500;

  bool operator==(const FitOptions&) const = default;
};

inline constexpr double kMinDecayTimeUs = 1e-3;
inline constexpr double kMaxDecayTimeUs = 1e3;
inline constexpr double kMaxModulationDepth = 10.0;
inline constexpr double kMaxModulationDampingPerUs = 1e3;

/// Bounded Levenberg-Marquardt fit of the echo model. Without `init` the
/// start point is estimated from the trace (tail baseline, log-linear
/// envelope, dominant residual frequency) and a few alternative modulation
/// starts are tried. Bounds: t_decay in [1e-3, 1e3] us, k in [0, 10],
/// nu in [0, Nyquist], lambda in [0, 1e3] / us. Throws FitError if no start
/// converges and ValidationError for an invalid trace.
DecayFit fit_decay(const DecayTrace& trace, const std::optional<DecayParams>& init = std::nullopt,
                   const FitOptions& options = {});

struct SweepRow {
  double field_mt;
  double t_decay_us;
  double t_decay_err_us;
  double a;
  double a_err;
  double nu_mhz;
  double nu_err_mhz;
};

/// One row per fit, ordered by field. Throws ValidationError with fewer than
/// two fits.
std::vector<SweepRow> field_sweep_summary(const std::vector<std::pair<double, DecayFit>>& fits);

}  // namespace qudit
