#pragma once

#include <array>
#include <variant>

#include "qudit/spin_operators.hpp"

namespace qudit {

/// Single-ion parameters. Energies in kelvin (E/k_B).
///
/// The conventional rhombicity bound |E| <= |D|/3 is deliberately not
/// enforced; fitted parameter sets in the literature sometimes exceed it.
struct SingleIonParams {
  double d_zfs_k = 0.0;
  double e_zfs_k = 0.0;
  double g = 1.99;
  double s = 3.5;

  void validate() const;
  bool operator==(const SingleIonParams&) const = default;
};

/// ZYZ Euler angles in radians.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  bool operator==(const EulerAngles&) const = default;
};

/// Rotation matrix R = Rz(alpha) Ry(beta) Rz(gamma). Its columns are the
/// rotated axes expressed in the reference frame.
Eigen::Matrix3d rotation_matrix(const EulerAngles& angles);

/// Two exchange-coupled ions. `j_exchange_k` < 0 is antiferromagnetic in the
/// -J S1.S2 convention. `axes_rotation` orients the site-2 anisotropy frame
/// relative to site 1; the default is collinear.
struct DimerParams {
  SingleIonParams site1;
  SingleIonParams site2;
  double j_exchange_k = 0.0;
  EulerAngles axes_rotation{};

  void validate() const;
  bool operator==(const DimerParams&) const = default;
};

using SpinSystem = std::variant<SingleIonParams, DimerParams>;

/// Static field: magnitude in tesla, direction a unit vector in the site-1
/// anisotropy frame.
struct FieldSpec {
  double magnitude_t = 0.0;
  Vec3 direction = Vec3::UnitZ();

  /// Normalises `direction`; throws ValidationError on a zero vector.
  static FieldSpec along(double magnitude_t, const Vec3& direction);
  void validate() const;
  bool operator==(const FieldSpec&) const = default;
};

/// -D Sz^2 + E (Sx^2 - Sy^2) - g muB B (n . S), in GHz.
ComplexMatrix single_ion_hamiltonian(const SingleIonParams& p, const FieldSpec& f);

/// H1 (x) 1 + 1 (x) H2 - J S1.S2, in GHz.
ComplexMatrix dimer_hamiltonian(const DimerParams& p, const FieldSpec& f);

ComplexMatrix hamiltonian(const SpinSystem& system, const FieldSpec& f);

/// Zero-field part only (anisotropy plus exchange), in GHz.
ComplexMatrix zero_field_hamiltonian(const SpinSystem& system);

/// Zeeman operator per tesla along `direction`: -sum_i g_i muB (S_i . n), GHz/T.
ComplexMatrix zeeman_per_tesla(const SpinSystem& system, const Vec3& direction);

/// Total spin S = sum_i S_i on the full Hilbert space of the system.
SpinOperatorSet total_spin(const SpinSystem& system);

/// sum_i g_i S_i . n (dimensionless; multiply by muB for the moment).
ComplexMatrix moment_along(const SpinSystem& system, const Vec3& direction);

Eigen::Index dimension(const SpinSystem& system);

/// Field-independent pieces of the Hamiltonian, cached so that H(B) can be
/// assembled cheaply for many fields and orientations.
struct HamiltonianTerms {
  ComplexMatrix zero_field;             // GHz
  std::array<ComplexMatrix, 3> moment;  // sum_i g_i S_i,alpha (dimensionless)

  explicit HamiltonianTerms(const SpinSystem& system);

  /// Moment operator projected on `direction`.
  ComplexMatrix moment_along(const Vec3& direction) const;
  /// Zero-field part plus the Zeeman term -muB B (moment . n).
  ComplexMatrix at(double magnitude_t, const Vec3& direction) const;
};

void validate(const SpinSystem& system);

}  // namespace qudit
