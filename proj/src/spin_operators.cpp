#include "qudit/spin_operators.hpp"

#include <cmath>
#include <string>

#include "qudit/error.hpp"

namespace qudit {

SpinOperatorSet spin_operators(double s) {
  const double twice = 2.0 * s;
  if (!std::isfinite(s) || s < 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
    throw InvalidSpinError("spin quantum number must be a non-negative half-integer, got " +
                           std::to_string(s));
  }
  const auto dim = static_cast<Eigen::Index>(std::lround(twice)) + 1;
  s = 0.5 * static_cast<double>(dim - 1);

  // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; row i holds m = s - i.
  ComplexMatrix raise = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix sz = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double m = s - static_cast<double>(i);
    sz(i, i) = m;
    if (i > 0) {
      raise(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
  }
  const ComplexMatrix lower = raise.adjoint();
  const std::complex<double> half_i(0.0, 0.5);

  SpinOperatorSet ops;
  ops.s = s;
  ops.sx = 0.5 * (raise + lower);
  ops.sy = -half_i * (raise - lower);
  ops.sz = std::move(sz);
  return ops;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

SpinOperatorSet embed(const SpinOperatorSet& ops, Eigen::Index other_dimension, int site) {
  const ComplexMatrix id = ComplexMatrix::Identity(other_dimension, other_dimension);
  auto lift = [&](const ComplexMatrix& m) { return site == 0 ? kron(m, id) : kron(id, m); };
  return SpinOperatorSet{ops.s, lift(ops.sx), lift(ops.sy), lift(ops.sz)};
}

}  // namespace qudit
