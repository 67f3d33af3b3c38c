#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qudit/control_map.hpp"
#include "qudit/decay_fit.hpp"
#include "qudit/ensemble.hpp"
#include "qudit/epr.hpp"
#include "qudit/hamiltonian.hpp"
#include "qudit/nutation.hpp"

namespace qudit {

/// Field-swept spectrum settings; the binning grid is B_min..B_max in B_step.
struct SpectrumSettings {
  double frequency_ghz = 9.886;
  double b_min_t = 0.0;
  double b_max_t = 1.0;
  double b_step_t = 0.001;
  double linewidth_fwhm_mt = 5.0;
  double temperature_k = 6.0;
  double search_step_t = 0.005;
  bool derivative = true;

  SpectrometerSpec spectrometer() const;
  bool operator==(const SpectrumSettings&) const = default;
};

enum class Spacing { log, linear };

struct ThermalSettings {
  double t_min_k = 0.1;
  double t_max_k = 30.0;
  int points = 120;
  Spacing spacing = Spacing::log;
  double field_t = 0.0;        // static field for heat capacity
  double probe_field_t = 0.1;  // M/H probe for chi*T

  std::vector<double> temperatures() const;
  bool operator==(const ThermalSettings&) const = default;
};

struct ControlSettings {
  Vec3 drive_direction = Vec3::UnitX();
  double threshold_mhz_per_mt = 0.2;
  double addressing_resolution_mhz = 40.0;
  RabiConvention convention = RabiConvention::full;
  bool lie_rank = false;

  bool operator==(const ControlSettings&) const = default;
};

/// Everything a subcommand needs. Built only by parse_config, which
/// validates every block.
struct RunConfig {
  std::string name = "custom";
  SpinSystem system = SingleIonParams{};
  double field_t = 0.5;  // levels, rabi-map, universality
  Vec3 field_direction = Vec3::UnitZ();  // as written; normalised by field()
  EnsembleSpec ensemble;
  SpectrumSettings spectrum;
  ThermalSettings thermal;
  ControlSettings control;
  FitOptions fit;
  NutationOptions nutation;

  FieldSpec field() const { return FieldSpec::along(field_t, field_direction); }
  bool operator==(const RunConfig&) const = default;
};

/// Parses the strict JSON configuration. Every physical quantity carries a
/// unit suffix in its key (`D_K`, `B_T`, `nu_GHz`, ...). Missing keys take
/// their defaults, except `system`. Throws ConfigError naming the key path
/// for unknown keys, keys without their unit suffix, wrong types and
/// out-of-range values.
RunConfig parse_config(std::string_view text);

/// Canonical JSON text of a configuration; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// FNV-1a 64-bit hash of the canonical serialisation, as 16 hex digits.
/// The thread count is left out because results do not depend on it.
std::string config_hash(const RunConfig& config);

/// Names of the bundled presets.
std::vector<std::string> preset_names();

/// JSON text of a bundled preset. Throws ConfigError for an unknown name.
std::string preset_text(const std::string& name);

/// Applies `path.to.key=value` to configuration text before parsing. The
/// value is read as JSON when possible (numbers, booleans, arrays) and as a
/// string otherwise. Throws ConfigError for malformed overrides.
std::string apply_overrides(std::string_view text, const std::vector<std::string>& overrides);

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qudit
