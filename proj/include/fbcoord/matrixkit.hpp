#pragma once

/**
 * @file matrixkit.hpp
 * @brief Dense complex Hermitian kernels: Cholesky, ordered eigendecomposition
 * and whitening. Every solver in the library goes through these.
 */

#include <complex>

#include <Eigen/Dense>

namespace fbc {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Q = lower * lower^H. Upper part is exactly zero, diagonal real positive.
struct CholeskyFactor {
  CMat lower;
  Index dim() const { return lower.rows(); }
};

/// Eigenvalues in descending order with orthonormal eigenvector columns.
/// The first component of magnitude > 1e-12 in each column is real positive.
struct EigenPair {
  RVec values;
  CMat vectors;
};

struct Whitened {
  CholeskyFactor factor;
  CMat matrix;  // L^{-1} R L^{-H}
};

/// Throws NotPositiveDefinite when a pivot drops below n * eps * trace(Q).
CholeskyFactor cholesky(const CMat& q);

/// Throws ConvergenceFailure when any eigenpair residual exceeds 1e-10 * ||M||_F.
EigenPair herm_eig(const CMat& m);

/// M = L^{-1} R L^{-H} by triangular solves, symmetrized before return.
Whitened whiten(const CMat& r, const CMat& q);

// --- helpers shared by the solvers ---

CMat hermitian_part(const CMat& m);

/// ||M - M^H||_F / ||M||_F, zero for the zero matrix.
double relative_asymmetry(const CMat& m);

/// Rotates each column so its first component above 1e-12 in magnitude is real positive.
void normalize_column_phases(CMat& vectors);

/// L^{-1} B
CMat lower_solve(const CholeskyFactor& factor, const CMat& b);

/// L^{-H} B
CMat lower_adjoint_solve(const CholeskyFactor& factor, const CMat& b);

/// log2 |A| for Hermitian positive-definite A.
double log2_det_hpd(const CMat& a);

/// Eigenvalues only, ascending. Symmetrizes first.
RVec hermitian_eigenvalues(const CMat& m);

}  // namespace fbc
