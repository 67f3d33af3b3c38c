#include "qudit/eigen_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "qudit/error.hpp"

namespace qudit {
namespace {

void check_hermitian(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw ValidationError("eigensolve needs a non-empty square matrix");
  }
  const double scale = std::max(1.0, std::sqrt(h.cwiseAbs2().maxCoeff()));
  const double defect = hermiticity_defect(h);
  if (!(defect <= 1e-10 * scale)) {
    throw ValidationError("matrix is not Hermitian (max |H - H^dagger| = " +
                          std::to_string(defect) + ")");
  }
}

void check_info(lapack_int info) {
  if (info != 0) throw ValidationError("eigensolver failed (LAPACK info " + std::to_string(info) + ")");
}

// zheevd on the lower triangle; `a` is overwritten by the eigenvectors.
Eigen::VectorXd heevd(ComplexMatrix& a, char jobz) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data()));
  return w;
}

}  // namespace

double hermiticity_defect(const ComplexMatrix& h) {
  return std::sqrt((h - h.adjoint()).cwiseAbs2().maxCoeff());
}

EigenSystem eigensolve(const ComplexMatrix& h) {
  check_hermitian(h);
  ComplexMatrix a = h;
  Eigen::VectorXd w = heevd(a, 'V');
  return EigenSystem{std::move(w), std::move(a)};
}

Eigen::VectorXd eigenvalues(const ComplexMatrix& h) {
  check_hermitian(h);
  ComplexMatrix a = h;
  return heevd(a, 'N');
}

EigenSystem eigensolve_selected(const ComplexMatrix& h, std::vector<int> levels) {
  check_hermitian(h);
  const auto n = static_cast<lapack_int>(h.rows());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int i : levels) {
    if (i < 0 || i >= n) throw ValidationError("requested level " + std::to_string(i) + " out of range");
  }
  const auto m = static_cast<lapack_int>(levels.size());

  // Householder reduction to a real tridiagonal matrix.
  ComplexMatrix a = h;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max<lapack_int>(n - 1, 1));
  Eigen::VectorXcd tau(std::max<lapack_int>(n - 1, 1));
  check_info(LAPACKE_zhetrd(LAPACK_COL_MAJOR, 'L', n, a.data(), n, diag.data(), sub.data(), tau.data()));

  EigenSystem out;
  out.energies = diag;
  Eigen::VectorXd scratch = sub;
  check_info(LAPACKE_dsterf(n, out.energies.data(), scratch.data()));
  if (m == 0) return out;

  // Selected eigenvalues by bisection, then inverse iteration.
  // LAPACKE scans n entries of w for NaN even though zstein reads only m.
  Eigen::VectorXd wsel = Eigen::VectorXd::Zero(n);
  Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> bsel = Eigen::Matrix<lapack_int, Eigen::Dynamic, 1>::Ones(n);
  Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> split(n);
  // Tied eigenvalues make dstebz return more than one value per index.
  Eigen::VectorXd w(n);
  Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> block(n);
  for (lapack_int k = 0; k < m; ++k) {
    const lapack_int index = levels[static_cast<std::size_t>(k)] + 1;
    lapack_int found = 0;
    lapack_int nsplit = 0;
    check_info(LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, index, index, 0.0, diag.data(), sub.data(), &found,
                              &nsplit, w.data(), block.data(), split.data()));
    if (nsplit > 1 || found != 1) {
      // Split or degenerate tridiagonal: regrouping per block is not worth
      // it, the full solve handles both.
      EigenSystem full = eigensolve(h);
      out.states.resize(n, m);
      for (lapack_int j = 0; j < m; ++j) {
        out.states.col(j) = full.states.col(levels[static_cast<std::size_t>(j)]);
      }
      out.energies = full.energies;
      return out;
    }
    wsel(k) = w(0);
    bsel(k) = block(0);
  }
  out.states.resize(n, m);
  Eigen::Matrix<lapack_int, Eigen::Dynamic, 1> fail(m);
  check_info(LAPACKE_zstein(LAPACK_COL_MAJOR, n, diag.data(), sub.data(), m, wsel.data(), bsel.data(),
                            split.data(), out.states.data(), n, fail.data()));
  check_info(LAPACKE_zunmtr(LAPACK_COL_MAJOR, 'L', 'L', 'N', n, m, a.data(), n, tau.data(),
                            out.states.data(), n));
  return out;
}

}  // namespace qudit
