#pragma once

#include <Eigen/Dense>

namespace seisop {

/// Dense real matrix, row-major.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// |A - A^T|_inf <= tol * |A|_inf
bool is_symmetric(const DenseMatrix& a, double tol = 1e-12);

struct GeneralizedEigen {
  Vector values;        ///< ascending
  DenseMatrix vectors;  ///< columns are mass-normalized: Phi^T M Phi = I
};

/// Solves K phi = lambda M phi for symmetric K and symmetric positive definite M.
///
/// The pencil is reduced with the Cholesky factor M = L L^T to the standard
/// problem L^-1 K L^-T y = lambda y, which is diagonalized by cyclic Jacobi
/// rotations. Intended for n <= 64.
///
/// Throws NumericError if M is not positive definite (the message names the
/// failing leading minor) or if the sweeps do not converge.
GeneralizedEigen solve_sym_generalized_eig(const DenseMatrix& k, const DenseMatrix& m);

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi; ascending order.
GeneralizedEigen jacobi_eigen(const DenseMatrix& a);

/// Lower-triangular Cholesky factor of an SPD matrix.
DenseMatrix cholesky_lower(const DenseMatrix& a);

/// Gaussian elimination with partial pivoting. Throws NumericError naming the
/// pivot column when A is singular to working precision.
Vector solve_linear(const DenseMatrix& a, const Vector& b);

}  // namespace seisop
