#include "qudit/control_map.hpp"

#include <cmath>

#include "qudit/error.hpp"
#include "qudit/units.hpp"

namespace qudit {

Eigen::MatrixXd transition_frequencies(const EigenSystem& es) {
  const Eigen::Index d = es.dimension();
  Eigen::MatrixXd freq(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      freq(n, m) = std::abs(es.energies(n) - es.energies(m));
    }
  }
  return freq;
}

RabiMap rabi_map(const EigenSystem& es, const SpinOperatorSet& total_spin, const Vec3& drive,
                 double g, RabiConvention convention) {
  const double norm = drive.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("drive direction must be a non-zero finite vector");
  }
  if (total_spin.dimension() != es.dimension()) {
    throw ValidationError("spin operators and eigensystem dimensions differ");
  }
  const Vec3 unit = drive / norm;
  // GHz/T equals MHz/mT.
  double prefactor = g * units::kBohrGHzPerT;
  if (convention == RabiConvention::half) prefactor *= 0.5;

  const ComplexMatrix elements = es.states.adjoint() * total_spin.along(unit) * es.states;
  RabiMap map;
  map.rate = prefactor * elements.cwiseAbs();
  // Symmetrise away rounding so rate(n,m) == rate(m,n) exactly.
  map.rate = 0.5 * (map.rate + map.rate.transpose()).eval();
  map.rate.diagonal().setZero();
  map.freq = transition_frequencies(es);
  map.drive_direction = unit;
  return map;
}

}  // namespace qudit
