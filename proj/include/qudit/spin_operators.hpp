#pragma once

#include <Eigen/Dense>

namespace qudit {

using ComplexMatrix = Eigen::MatrixXcd;
using Vec3 = Eigen::Vector3d;

/// Cartesian spin matrices for spin quantum number `s` (hbar = 1).
///
/// The basis is ordered by descending projection, m = s, s-1, ..., -s, so
/// for s = 1/2 the first basis vector is spin up.
struct SpinOperatorSet {
  double s = 0.0;
  ComplexMatrix sx;
  ComplexMatrix sy;
  ComplexMatrix sz;

  Eigen::Index dimension() const { return sz.rows(); }

  /// Projection of the spin vector on `axis` (not normalised here).
  ComplexMatrix along(const Vec3& axis) const {
    return axis.x() * sx + axis.y() * sy + axis.z() * sz;
  }
};

/// Builds the spin matrices via the ladder operators. Throws InvalidSpinError
/// unless 2s is a non-negative integer.
SpinOperatorSet spin_operators(double s);

/// A (x) B for square complex matrices.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Embeds each component of `ops` into a two-site space: site 0 gives
/// ops (x) 1_other, site 1 gives 1_other (x) ops.
SpinOperatorSet embed(const SpinOperatorSet& ops, Eigen::Index other_dimension, int site);

}  // namespace qudit
