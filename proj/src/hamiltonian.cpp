#include "qudit/hamiltonian.hpp"

#include <cmath>
#include <string>
#include <type_traits>

#include "qudit/error.hpp"
#include "qudit/units.hpp"

namespace qudit {
namespace {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
}

// Anisotropy terms of one ion with its principal axes given by the columns of `frame`.
ComplexMatrix zfs_operator(const SingleIonParams& p, const SpinOperatorSet& ops,
                           const Eigen::Matrix3d& frame) {
  const ComplexMatrix sx = ops.along(frame.col(0));
  const ComplexMatrix sy = ops.along(frame.col(1));
  const ComplexMatrix sz = ops.along(frame.col(2));
  const double d = units::kelvin_to_ghz(p.d_zfs_k);
  const double e = units::kelvin_to_ghz(p.e_zfs_k);
  return -d * (sz * sz) + e * (sx * sx - sy * sy);
}

struct DimerOperators {
  SpinOperatorSet s1;
  SpinOperatorSet s2;
};

DimerOperators dimer_operators(const DimerParams& p) {
  const SpinOperatorSet a = spin_operators(p.site1.s);
  const SpinOperatorSet b = spin_operators(p.site2.s);
  return {embed(a, b.dimension(), 0), embed(b, a.dimension(), 1)};
}

}  // namespace

void SingleIonParams::validate() const {
  require_finite(d_zfs_k, "D");
  require_finite(e_zfs_k, "E");
  require_finite(g, "g");
  if (!(g > 0.0)) throw ValidationError("g must be positive");
  if (!(s > 0.0)) throw ValidationError("spin must be positive");
  spin_operators(s);  // half-integer check
}

void DimerParams::validate() const {
  site1.validate();
  site2.validate();
  require_finite(j_exchange_k, "J");
  require_finite(axes_rotation.alpha, "alpha");
  require_finite(axes_rotation.beta, "beta");
  require_finite(axes_rotation.gamma, "gamma");
}

Eigen::Matrix3d rotation_matrix(const EulerAngles& a) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(a.alpha, Vec3::UnitZ()) * AngleAxisd(a.beta, Vec3::UnitY()) *
          AngleAxisd(a.gamma, Vec3::UnitZ()))
      .toRotationMatrix();
}

FieldSpec FieldSpec::along(double magnitude_t, const Vec3& direction) {
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("field direction must be a non-zero finite vector");
  }
  FieldSpec f{magnitude_t, direction / norm};
  f.validate();
  return f;
}

void FieldSpec::validate() const {
  if (!std::isfinite(magnitude_t) || magnitude_t < 0.0) {
    throw ValidationError("field magnitude must be finite and non-negative");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw ValidationError("field direction must be a unit vector");
  }
}

ComplexMatrix single_ion_hamiltonian(const SingleIonParams& p, const FieldSpec& f) {
  p.validate();
  f.validate();
  const SpinOperatorSet ops = spin_operators(p.s);
  return zfs_operator(p, ops, Eigen::Matrix3d::Identity()) -
         p.g * units::kBohrGHzPerT * f.magnitude_t * ops.along(f.direction);
}

ComplexMatrix dimer_hamiltonian(const DimerParams& p, const FieldSpec& f) {
  f.validate();
  return zero_field_hamiltonian(p) + f.magnitude_t * zeeman_per_tesla(p, f.direction);
}

ComplexMatrix hamiltonian(const SpinSystem& system, const FieldSpec& f) {
  return std::visit(
      [&](const auto& p) -> ComplexMatrix {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SingleIonParams>) {
          return single_ion_hamiltonian(p, f);
        } else {
          return dimer_hamiltonian(p, f);
        }
      },
      system);
}

ComplexMatrix zero_field_hamiltonian(const SpinSystem& system) {
  validate(system);
  if (const auto* ion = std::get_if<SingleIonParams>(&system)) {
    return zfs_operator(*ion, spin_operators(ion->s), Eigen::Matrix3d::Identity());
  }
  const auto& p = std::get<DimerParams>(system);
  const DimerOperators ops = dimer_operators(p);
  const double j = units::kelvin_to_ghz(p.j_exchange_k);
  return zfs_operator(p.site1, ops.s1, Eigen::Matrix3d::Identity()) +
         zfs_operator(p.site2, ops.s2, rotation_matrix(p.axes_rotation)) -
         j * (ops.s1.sx * ops.s2.sx + ops.s1.sy * ops.s2.sy + ops.s1.sz * ops.s2.sz);
}

ComplexMatrix zeeman_per_tesla(const SpinSystem& system, const Vec3& direction) {
  return -units::kBohrGHzPerT * moment_along(system, direction);
}

SpinOperatorSet total_spin(const SpinSystem& system) {
  if (const auto* ion = std::get_if<SingleIonParams>(&system)) {
    return spin_operators(ion->s);
  }
  const auto& p = std::get<DimerParams>(system);
  const DimerOperators ops = dimer_operators(p);
  return SpinOperatorSet{p.site1.s + p.site2.s, ops.s1.sx + ops.s2.sx, ops.s1.sy + ops.s2.sy,
                         ops.s1.sz + ops.s2.sz};
}

ComplexMatrix moment_along(const SpinSystem& system, const Vec3& direction) {
  if (const auto* ion = std::get_if<SingleIonParams>(&system)) {
    return ion->g * spin_operators(ion->s).along(direction);
  }
  const auto& p = std::get<DimerParams>(system);
  const DimerOperators ops = dimer_operators(p);
  return p.site1.g * ops.s1.along(direction) + p.site2.g * ops.s2.along(direction);
}

Eigen::Index dimension(const SpinSystem& system) {
  if (const auto* ion = std::get_if<SingleIonParams>(&system)) {
    return std::lround(2.0 * ion->s) + 1;
  }
  const auto& p = std::get<DimerParams>(system);
  return (std::lround(2.0 * p.site1.s) + 1) * (std::lround(2.0 * p.site2.s) + 1);
}

HamiltonianTerms::HamiltonianTerms(const SpinSystem& system)
    : zero_field(zero_field_hamiltonian(system)),
      moment{qudit::moment_along(system, Vec3::UnitX()), qudit::moment_along(system, Vec3::UnitY()),
             qudit::moment_along(system, Vec3::UnitZ())} {}

ComplexMatrix HamiltonianTerms::moment_along(const Vec3& direction) const {
  return direction.x() * moment[0] + direction.y() * moment[1] + direction.z() * moment[2];
}

ComplexMatrix HamiltonianTerms::at(double magnitude_t, const Vec3& direction) const {
  return zero_field - (units::kBohrGHzPerT * magnitude_t) * moment_along(direction);
}

void validate(const SpinSystem& system) {
  std::visit([](const auto& p) { p.validate(); }, system);
}

}  // namespace qudit
