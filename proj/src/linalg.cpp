// SPDX-License-Identifier: Apache-2.0
#include "mimopred/linalg.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace mimopred {

namespace {

/// Largest absolute diagonal entry, used to scale the singularity pivot test.
double max_abs_diagonal(const CMatrix& a) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, i)));
  return m;
}

void check_hermitian(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw NotHermitian("matrix is not square: " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()));
  const double scale = std::max(1.0, a.norm());
  const double dev = (a - a.adjoint()).norm();
  if (dev > kHermitianTolerance * scale)
    throw NotHermitian("Hermitian deviation " + std::to_string(dev / scale) +
                       " exceeds tolerance");
}

}  // namespace

CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b) {
  check_hermitian(a);
  if (a.rows() != b.rows())
    throw ShapeMismatch("hermitian_solve: A has " + std::to_string(a.rows()) +
                        " rows, B has " + std::to_string(b.rows()));

  const double pivot_floor = 1e-14 * max_abs_diagonal(a);

  // Cholesky first (all inverses in the target algebra are of PSD + I
  // matrices); pivoted LDLH as fallback covers merely-Hermitian inputs
  // such as sampled, possibly indefinite, covariance estimates.
  Eigen::LLT<CMatrix> llt(a);
  CMatrix x;
  bool solved = false;
  if (llt.info() == Eigen::Success) {
    const CMatrix& l = llt.matrixLLT();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      min_pivot = std::min(min_pivot, std::abs(l(i, i)) * std::abs(l(i, i)));
    if (min_pivot > pivot_floor) {
      x = llt.solve(b);
      x += llt.solve(b - a * x);  // one refinement pass
      solved = true;
    }
  }
  if (!solved) {
    Eigen::LDLT<CMatrix> ldlt(a);
    if (ldlt.info() != Eigen::Success)
      throw Singular("hermitian_solve: LDLT factorization failed");
    const auto d = ldlt.vectorD();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.size(); ++i)
      min_pivot = std::min(min_pivot, std::abs(d(i)));
    if (!(min_pivot > pivot_floor))
      throw Singular("hermitian_solve: pivot " + std::to_string(min_pivot) +
                     " below floor " + std::to_string(pivot_floor));
    x = ldlt.solve(b);
    x += ldlt.solve(b - a * x);
  }
  return x;
}

CVector hermitian_solve(const CMatrix& a, const CVector& b) {
  return CVector(hermitian_solve(a, CMatrix(b)));
}

CMatrix pseudo_inverse(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw ShapeMismatch("pseudo_inverse: empty matrix");
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  const double cutoff =
      static_cast<double>(std::max(a.rows(), a.cols())) * sigma_max * 1e-12;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

CMatrix kronecker(const CMatrix& a, const CMatrix& b, std::uint64_t element_budget) {
  const std::uint64_t rows = static_cast<std::uint64_t>(a.rows()) * b.rows();
  const std::uint64_t cols = static_cast<std::uint64_t>(a.cols()) * b.cols();
  const unsigned __int128 total =
      static_cast<unsigned __int128>(rows) * static_cast<unsigned __int128>(cols);
  if (total > element_budget)
    throw SizeOverflow("kronecker: output " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " exceeds element budget " +
                       std::to_string(element_budget));
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix psd_project(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw ShapeMismatch("psd_project: matrix is not square");
  const CMatrix h = hermitize(a);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  if (eig.info() != Eigen::Success)
    throw EigenFailure("psd_project: eigendecomposition did not converge");
  Eigen::VectorXd vals = eig.eigenvalues();
  if (vals.size() == 0 || vals.minCoeff() >= 0.0) return h;  // already in the cone
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = std::max(vals(i), 0.0);
  return hermitize(eig.eigenvectors() * vals.asDiagonal() *
                   eig.eigenvectors().adjoint());
}

CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols)
    throw ShapeMismatch("unvec: vector length " + std::to_string(v.size()) +
                        " != " + std::to_string(rows) + "x" + std::to_string(cols));
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

}  // namespace mimopred
