#include "fbcoord/matrixkit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fbcoord/errors.hpp"

namespace fbc {
namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kPhaseMagnitude = 1e-12;
constexpr double kResidualTol = 1e-10;
// Relative gap below which adjacent eigenvalues are treated as one cluster.
constexpr double kTieTol = 1e-12;

void require_square(const CMat& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
}

void require_hermitian(const CMat& m, const char* what) {
  require_square(m, what);
  if (relative_asymmetry(m) > kHermitianTol) {
    throw InvalidInput(std::string(what) + ": matrix is not Hermitian");
  }
}

// Replaces the columns of a degenerate eigenspace with the orthonormalized
// projections of e_0, e_1, ... so that the basis only depends on the subspace.
void canonicalize_cluster(CMat& vectors, Index first, Index count) {
  const Index n = vectors.rows();
  const CMat basis = vectors.middleCols(first, count);
  CMat chosen(n, count);
  Index found = 0;
  for (Index i = 0; i < n && found < count; ++i) {
    CVec p = basis * basis.row(i).adjoint();
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < found; ++k) {
        p -= chosen.col(k) * chosen.col(k).dot(p);
      }
    }
    const double norm = p.norm();
    if (norm > 1e-6) {
      chosen.col(found++) = p / norm;
    }
  }
  if (found == count) {
    vectors.middleCols(first, count) = chosen;
  }
}

}  // namespace

CMat hermitian_part(const CMat& m) { return (m + m.adjoint()) * 0.5; }

double relative_asymmetry(const CMat& m) {
  const double norm = m.norm();
  if (norm == 0.0) return 0.0;
  return (m - m.adjoint()).norm() / norm;
}

void normalize_column_phases(CMat& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    for (Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      if (mag > kPhaseMagnitude) {
        vectors.col(c) *= std::conj(vectors(r, c)) / mag;
        vectors(r, c) = cd(vectors(r, c).real(), 0.0);
        break;
      }
    }
  }
}

CholeskyFactor cholesky(const CMat& q) {
  require_hermitian(q, "cholesky");
  const Index n = q.rows();
  const CMat h = hermitian_part(q);
  Eigen::LLT<CMat> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  CholeskyFactor factor{llt.matrixL().toDenseMatrix()};
  const double trace = h.trace().real();
  const double pivot_floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * trace;
  for (Index i = 0; i < n; ++i) {
    const double diag = factor.lower(i, i).real();
    if (!(diag > 0.0) || diag * diag <= pivot_floor) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(i) + " below n*eps*trace");
    }
    factor.lower(i, i) = cd(diag, 0.0);
  }
  return factor;
}

EigenPair herm_eig(const CMat& m) {
  require_hermitian(m, "herm_eig");
  const Index n = m.rows();
  const CMat h = hermitian_part(m);
  Eigen::SelfAdjointEigenSolver<CMat> solver(h);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("herm_eig: eigensolver did not converge");
  }

  EigenPair out{RVec(n), CMat(n, n)};
  for (Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }

  const double scale = std::max(out.values.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  for (Index start = 0; start < n;) {
    Index stop = start + 1;
    while (stop < n && out.values(stop - 1) - out.values(stop) <= kTieTol * scale) ++stop;
    if (stop - start > 1) canonicalize_cluster(out.vectors, start, stop - start);
    start = stop;
  }
  normalize_column_phases(out.vectors);

  const double bound = kResidualTol * h.norm();
  for (Index i = 0; i < n; ++i) {
    const double residual = (h * out.vectors.col(i) - out.values(i) * out.vectors.col(i)).norm();
    if (residual > bound && residual > 0.0) {
      throw ConvergenceFailure("herm_eig: residual " + std::to_string(residual) + " above tolerance");
    }
  }
  return out;
}

Whitened whiten(const CMat& r, const CMat& q) {
  require_hermitian(r, "whiten");
  if (r.rows() != q.rows()) {
    throw DimensionMismatch("whiten: signal and interference covariances differ in size");
  }
  Whitened out{cholesky(q), CMat()};
  // L^{-1} R L^{-H} = L^{-1} (L^{-1} R)^H for Hermitian R.
  const CMat half = lower_solve(out.factor, r);
  out.matrix = hermitian_part(lower_solve(out.factor, half.adjoint()));
  return out;
}

CMat lower_solve(const CholeskyFactor& factor, const CMat& b) {
  return factor.lower.triangularView<Eigen::Lower>().solve(b);
}

CMat lower_adjoint_solve(const CholeskyFactor& factor, const CMat& b) {
  return factor.lower.adjoint().triangularView<Eigen::Upper>().solve(b);
}

double log2_det_hpd(const CMat& a) {
  Eigen::LLT<CMat> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("log2_det_hpd: matrix is not positive definite");
  }
  double log_det = 0.0;
  const CMat& l = llt.matrixLLT();
  for (Index i = 0; i < a.rows(); ++i) log_det += std::log(l(i, i).real());
  return 2.0 * log_det / std::numbers::ln2;
}

RVec hermitian_eigenvalues(const CMat& m) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(hermitian_part(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("hermitian_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues();
}

}  // namespace fbc
