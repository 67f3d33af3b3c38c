#pragma once

#include "qudit/eigen_system.hpp"

namespace qudit {

/// How the Rabi frequency relates to the matrix element of the drive.
/// `full`:  Omega_R = g muB b1 |<n|S_d|m>| / h  (default)
/// `half`:  the rotating-wave form with an extra factor 1/2
enum class RabiConvention { full, half };

/// Pairwise drive rates and transition frequencies between eigenstates.
/// The map is population free: it contains matrix elements only.
struct RabiMap {
  Eigen::MatrixXd rate;  // MHz per mT of drive amplitude b1
  Eigen::MatrixXd freq;  // GHz
  Vec3 drive_direction = Vec3::UnitX();

  Eigen::Index dimension() const { return rate.rows(); }
};

/// freq(n, m) = |E_n - E_m| in GHz.
Eigen::MatrixXd transition_frequencies(const EigenSystem& es);

/// Drive matrix elements of `total_spin . d` between eigenstates. The drive
/// should normally be perpendicular to the static field; this is not
/// enforced. Throws ValidationError for a zero-length direction.
RabiMap rabi_map(const EigenSystem& es, const SpinOperatorSet& total_spin, const Vec3& drive,
                 double g, RabiConvention convention = RabiConvention::full);

}  // namespace qudit
