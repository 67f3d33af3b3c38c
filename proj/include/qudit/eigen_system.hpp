#pragma once

#include <vector>

#include "qudit/spin_operators.hpp"

namespace qudit {

/// Ascending eigenvalues (GHz) and the matching eigenvectors as columns.
/// Within a degenerate subspace the choice of vectors is arbitrary.
struct EigenSystem {
  Eigen::VectorXd energies;
  ComplexMatrix states;

  Eigen::Index dimension() const { return energies.size(); }
};

/// Largest |h - h^dagger| element.
double hermiticity_defect(const ComplexMatrix& h);

/// Diagonalises a Hermitian matrix. Throws ValidationError when the input is
/// not square or deviates from Hermiticity by more than 1e-10 (scaled by the
/// largest element when that exceeds 1).
EigenSystem eigensolve(const ComplexMatrix& h);

/// Eigenvalues only, ascending. Same validation as eigensolve.
Eigen::VectorXd eigenvalues(const ComplexMatrix& h);

/// All eigenvalues and the eigenvectors of the given (0-based) levels only,
/// as columns in ascending level order with duplicates removed. Cheaper than
/// eigensolve when few vectors are needed.
EigenSystem eigensolve_selected(const ComplexMatrix& h, std::vector<int> levels);

}  // namespace qudit
