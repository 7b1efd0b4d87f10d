#pragma once

// Dense real-matrix kernels shared by the factorization code.

#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace daimc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numerics {

/// Relative tolerance used when checking that an input is symmetric.
inline constexpr double kSymmetryTol = 1e-10;

/// Largest d*K for which the dense Kronecker Sylvester solve is permitted.
inline constexpr Eigen::Index kKronSizeCap = 4096;

/// max(1, ||a||_F), the scale all relative tolerances are measured against.
double frob_scale(const Matrix& a);

/// Throws InvalidInput naming `what` and the first offending coordinate.
void require_finite(const Matrix& a, std::string_view what);

/// Positive and negative parts: a = pos - neg, |a| = pos + neg, both >= 0.
std::pair<Matrix, Matrix> pos_neg_split(const Matrix& a);

struct SymEig {
  Vector values;  // ascending
  Matrix vectors;  // orthonormal columns, column j pairs with values[j]
};

/// Eigendecomposition of a symmetric matrix. The input is symmetrized as
/// (A + A^T)/2 after the symmetry check.
SymEig sym_eig(const Matrix& a);

/// Solves A X = B for symmetric positive definite A via Cholesky. Throws
/// NumericError reporting the smallest eigenvalue when A is not PD.
Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Solves A X + X B = C by forming the (dK)x(dK) system
/// [I_K (x) A + B^T (x) I_d] vec(X) = vec(C) and solving it densely.
/// Intended as a reference solution for small problems only.
Matrix sylvester_kron_oracle(const Matrix& a, const Matrix& b, const Matrix& c);

}  // namespace numerics
}  // namespace daimc
