#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "mgbeam/error.hpp"

namespace mgbeam {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Universal denominator floor.
inline constexpr double kDenominatorFloor = 1e-30;

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kPinvRelativeTolerance = 1e-12;

namespace linalg {

/// Moore-Penrose pseudo-inverse by SVD with a relative singular value cutoff.
inline CMatrix pinv(const CMatrix& a) {
  if (a.size() == 0) return CMatrix::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double cutoff = kPinvRelativeTolerance * (s.size() > 0 ? s(0) : 0.0);
  RVector inv_s = RVector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv_s(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().adjoint();
}

/// Orthonormal basis of the column space of `a` (numerical rank per the
/// pseudo-inverse tolerance).
inline CMatrix range_basis(const CMatrix& a) {
  if (a.cols() == 0) return CMatrix(a.rows(), 0);
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
  const RVector& s = svd.singularValues();
  const double cutoff = kPinvRelativeTolerance * (s.size() > 0 ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Projects the columns of `x` onto the orthogonal complement of col(a).
inline CMatrix project_out(const CMatrix& a, const CMatrix& x) {
  const CMatrix u = range_basis(a);
  return x - u * (u.adjoint() * x);
}

/// Solves A X = B for Hermitian positive definite A. When the Cholesky
/// factorization fails a relative ridge of 1e-12 * trace / n is added once.
inline CMatrix hpd_solve_with_ridge(const CMatrix& a, const CMatrix& b) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  const Eigen::Index n = a.rows();
  const double ridge = 1e-12 * a.trace().real() / static_cast<double>(n);
  llt.compute(a + ridge * CMatrix::Identity(n, n));
  if (llt.info() != Eigen::Success || !(ridge > 0.0)) {
    throw SingularityError("Hermitian system is not positive definite");
  }
  return llt.solve(b);
}

/// Hermitian part, used to clean round-off before factorizing Gram matrices.
inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace linalg
}  // namespace mgbeam
