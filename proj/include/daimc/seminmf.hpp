#pragma once

// Single-view semi-NMF: X (M x N) ~ U V^T with V >= 0 and U unconstrained.

#include <cstdint>
#include <vector>

#include "daimc/numerics.hpp"

namespace daimc::seminmf {

inline constexpr double kRidge = 1e-12;
inline constexpr double kEpsilon = 1e-10;

struct Options {
  double tol = 1e-6;
  int max_iter = 200;
  double epsilon = kEpsilon;
};

struct State {
  Matrix u;  // M x K
  Matrix v;  // N x K, entrywise >= 0
  double objective = 0.0;
  std::vector<double> trace;  // trace[0] is the initial objective
  int iterations = 0;
};

/// ||X - U V^T||_F^2
double objective(const Matrix& x, const Matrix& u, const Matrix& v);

/// Least-squares basis for fixed V: U = X V (V^T V + ridge I)^{-1}. Sets
/// `degenerate` when V has an all-zero column.
Matrix update_u(const Matrix& x, const Matrix& v, bool* degenerate = nullptr);

/// One multiplicative step
///   V <- V .* sqrt(((X^T U)^+ + V (U^T U)^-) ./ ((X^T U)^- + V (U^T U)^+ + eps)).
Matrix update_v(const Matrix& x, const Matrix& u, const Matrix& v,
                double epsilon = kEpsilon);

/// Scale-matched random start: V_jk = |z_jk| * mean_i |X_ij| with z standard
/// normal, then U from update_u.
State initialize(const Matrix& x, Eigen::Index k, std::uint64_t seed);

/// Alternates update_u and update_v from `init` until the relative objective
/// change drops below opts.tol or opts.max_iter iterations have run.
State fit_from(const Matrix& x, State init, const Options& opts = {});

State fit(const Matrix& x, Eigen::Index k, std::uint64_t seed, const Options& opts = {});

}  // namespace daimc::seminmf
