#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>

#include "besov_invert/errors.hpp"

namespace besov_invert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr Eigen::Index kDenseSolveLimit = 4096;

struct SolveInfo {
  double relative_residual = 0.0;
  int iterations = 0;  ///< 0 for the direct solver
};

/// Solves A x = b for symmetric positive definite A: dense Cholesky up to
/// kDenseSolveLimit unknowns, conjugate gradients above.
inline Vector solve_spd(const Matrix& A, const Vector& b, SolveInfo* info = nullptr, double residual_tol = 1e-10) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw ShapeError("solve_spd: dimension mismatch");
  Vector x;
  SolveInfo si;
  if (A.rows() <= kDenseSolveLimit) {
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success) {
      Eigen::JacobiSVD<Matrix> svd(A);
      const auto& sv = svd.singularValues();
      std::ostringstream os;
      os << "system matrix is not positive definite (condition estimate "
         << (sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY) << ")";
      throw NumericalError(os.str());
    }
    x = llt.solve(b);
  } else {
    Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper> cg(A);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * A.rows()));
    x = cg.solve(b);
    si.iterations = static_cast<int>(cg.iterations());
  }
  const double bn = b.norm();
  si.relative_residual = bn > 0.0 ? (A * x - b).norm() / bn : (A * x).norm();
  if (!std::isfinite(si.relative_residual) || si.relative_residual > residual_tol) {
    std::ostringstream os;
    os << "linear solve residual " << si.relative_residual << " exceeds " << residual_tol;
    throw NumericalError(os.str());
  }
  if (info) *info = si;
  return x;
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
inline Matrix inverse_spd(const Matrix& A) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(A.rows(), A.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace besov_invert
