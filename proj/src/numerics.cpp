#include "daimc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "daimc/error.hpp"

namespace daimc::numerics {

namespace {

void require_square(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << a.rows() << "x" << a.cols();
    throw InvalidInput(os.str());
  }
}

void require_symmetric(const Matrix& a, std::string_view what) {
  require_square(a, what);
  const double asym = (a - a.transpose()).norm();
  if (asym > kSymmetryTol * frob_scale(a)) {
    std::ostringstream os;
    os << what << ": matrix is not symmetric (||A - A^T||_F = " << asym << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

double frob_scale(const Matrix& a) { return std::max(1.0, a.norm()); }

void require_finite(const Matrix& a, std::string_view what) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j))) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i << ", " << j << ")";
        throw InvalidInput(os.str());
      }
    }
  }
}

std::pair<Matrix, Matrix> pos_neg_split(const Matrix& a) {
  require_finite(a, "pos_neg_split");
  Matrix pos = a.cwiseMax(0.0);
  Matrix neg = (-a).cwiseMax(0.0);
  return {std::move(pos), std::move(neg)};
}

SymEig sym_eig(const Matrix& a) {
  require_finite(a, "sym_eig");
  require_symmetric(a, "sym_eig");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "sym_eig: eigensolver did not converge for " << a.rows() << "x" << a.cols()
       << " matrix with ||A||_F = " << a.norm();
    throw NumericError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  require_square(a, "solve_spd");
  if (b.rows() != a.rows()) {
    std::ostringstream os;
    os << "solve_spd: right-hand side has " << b.rows() << " rows, expected " << a.rows();
    throw InvalidInput(os.str());
  }
  require_finite(a, "solve_spd");
  require_finite(b, "solve_spd");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::LLT<Matrix> llt(sym);
  // LLT reports success for some semidefinite inputs; a zero or negative
  // diagonal in L means the factor is unusable.
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto diag = llt.matrixLLT().diagonal();
    ok = diag.allFinite() && (diag.array() > 0.0).all();
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const Eigen::Index n = sym.rows();
    double lam = std::numeric_limits<double>::quiet_NaN();
    if (eig.info() == Eigen::Success) lam = eig.eigenvalues().minCoeff();
    std::ostringstream os;
    os << "solve_spd: " << n << "x" << n
       << " matrix is not positive definite (smallest eigenvalue " << lam << ")";
    throw NumericError(os.str());
  }
  return llt.solve(b);
}

Matrix sylvester_kron_oracle(const Matrix& a, const Matrix& b, const Matrix& c) {
  require_square(a, "sylvester_kron_oracle(a)");
  require_square(b, "sylvester_kron_oracle(b)");
  const Eigen::Index d = a.rows();
  const Eigen::Index k = b.rows();
  if (c.rows() != d || c.cols() != k) {
    std::ostringstream os;
    os << "sylvester_kron_oracle: c is " << c.rows() << "x" << c.cols() << ", expected " << d
       << "x" << k;
    throw InvalidInput(os.str());
  }
  if (d * k > kKronSizeCap) {
    std::ostringstream os;
    os << "sylvester_kron_oracle: d*K = " << d * k << " exceeds cap " << kKronSizeCap;
    throw InvalidInput(os.str());
  }
  require_finite(a, "sylvester_kron_oracle");
  require_finite(b, "sylvester_kron_oracle");
  require_finite(c, "sylvester_kron_oracle");

  const Eigen::Index n = d * k;
  Matrix system = Matrix::Zero(n, n);
  // vec is column-major: block (p, q) of size d x d is
  // delta_pq * A + B(q, p) * I_d.
  for (Eigen::Index q = 0; q < k; ++q) {
    for (Eigen::Index p = 0; p < k; ++p) {
      auto block = system.block(p * d, q * d, d, d);
      block.diagonal().array() += b(q, p);
      if (p == q) block += a;
    }
  }
  const Eigen::Map<const Vector> rhs(c.data(), n);
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "sylvester_kron_oracle: Kronecker system of size " << n << " is singular (rank "
       << lu.rank() << ")";
    throw NumericError(os.str());
  }
  Vector x = lu.solve(rhs);
  return Eigen::Map<Matrix>(x.data(), d, k);
}

}  // namespace daimc::numerics
