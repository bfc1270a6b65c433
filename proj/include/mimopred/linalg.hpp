// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "mimopred/errors.hpp"

namespace mimopred {

/// Complex dense matrix, double precision, column-major (Eigen default).
using CMatrix = Eigen::MatrixXcd;
/// Complex dense column vector.
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Default element budget for kronecker() outputs (guards against
/// accidental quadratic blow-ups when stacking pilot blocks).
inline constexpr std::uint64_t kKroneckerElementBudget = std::uint64_t{1} << 24;

/// Relative Frobenius tolerance used to accept a matrix as Hermitian.
inline constexpr double kHermitianTolerance = 1e-10;

/// \brief Solve A·X = B for Hermitian A.
///
/// Cholesky (LLT) first; if A is not numerically positive definite the
/// solve falls back to pivoted LDLᴴ. One pass of iterative refinement
/// keeps the relative residual at working precision even near the
/// conditioning limit.
///
/// \throws NotHermitian if ‖A−Aᴴ‖_F > 1e-10·‖A‖_F (relative)
/// \throws Singular if a factorization pivot falls below 1e-14 × max |diag(A)|
CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b);

/// Convenience overload for vector right-hand sides.
CVector hermitian_solve(const CMatrix& a, const CVector& b);

/// \brief Moore-Penrose pseudo-inverse via SVD.
///
/// Singular values below max(rows, cols)·σ_max·1e-12 are truncated, so
/// rank-deficient inputs are handled without error.
CMatrix pseudo_inverse(const CMatrix& a);

/// \brief Kronecker product A ⊗ B.
///
/// Output entry (i·rowsB+k, j·colsB+l) = A(i,j)·B(k,l).
///
/// \throws SizeOverflow if the output would exceed `element_budget` entries
CMatrix kronecker(const CMatrix& a, const CMatrix& b,
                  std::uint64_t element_budget = kKroneckerElementBudget);

/// \brief Nearest Hermitian positive-semidefinite matrix.
///
/// Hermitian-symmetrizes ((A+Aᴴ)/2), then clips negative eigenvalues to 0.
///
/// \throws ShapeMismatch if A is not square
/// \throws EigenFailure if the eigensolver does not converge
CMatrix psd_project(const CMatrix& a);

/// (A + Aᴴ)/2.
CMatrix hermitize(const CMatrix& a);

/// Column-major vectorization vec(A) (stacks columns).
CVector vec(const CMatrix& a);

/// Inverse of vec(): reshape a length rows·cols vector into rows×cols,
/// column-major.
///
/// \throws ShapeMismatch if v.size() != rows·cols
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace mimopred
