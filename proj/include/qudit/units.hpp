#pragma once

// Physical constants and unit conversions. Energies are carried internally as
// frequencies E/h in GHz.

namespace qudit::units {

/// k_B / h in GHz per kelvin (CODATA).
inline constexpr double kBoltzmannGHzPerK = 20.836619;
/// mu_B / h in GHz per tesla (CODATA).
inline constexpr double kBohrGHzPerT = 13.996245;
/// N_A * mu_B in emu*G/mol.
inline constexpr double kAvogadroBohrEmu = 5585.0;
inline constexpr double kOerstedPerTesla = 1.0e4;

inline constexpr double kelvin_to_ghz(double kelvin) { return kelvin * kBoltzmannGHzPerK; }
inline constexpr double ghz_to_kelvin(double ghz) { return ghz / kBoltzmannGHzPerK; }

inline constexpr double millitesla_to_tesla(double mt) { return mt * 1.0e-3; }
inline constexpr double tesla_to_millitesla(double t) { return t * 1.0e3; }

}  // namespace qudit::units
