#pragma once

// Doubly aligned incomplete multi-view clustering: a joint weighted semi-NMF
// over all views with a shared nonnegative latent matrix V, plus per-view
// L2,1-regularized regressions B^(i) that pull each basis U^(i) towards
// B^(i)^T U^(i) = I_K.
//
//   J = sum_i ||(X_i - U_i V^T) W_i||_F^2
//         + alpha (||B_i^T U_i - I||_F^2 + beta ||B_i||_{2,1})
//
// W_i is the 0/1 diagonal presence matrix of view i.

#include <cstdint>
#include <vector>

#include "daimc/dataset.hpp"
#include "daimc/numerics.hpp"

namespace daimc::model {

enum class RegressionForm {
  woodbury,  // K x K inner solve, the default
  direct,    // d x d solve of (U U^T + beta/2 D) B = U
};

struct Hyperparams {
  double alpha = 1e1;
  double beta = 1e0;
  Eigen::Index k = 2;
  double outer_tol = 1e-6;
  double inner_tol = 1e-5;
  int outer_max = 200;
  int inner_max = 50;
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  RegressionForm regression_form = RegressionForm::woodbury;
};

/// Throws InvalidInput when a field is out of range.
void validate(const Hyperparams& hp);

struct FactorizationState {
  std::vector<Matrix> basis;       // U_i, d_i x K
  Matrix latent;                   // V, N x K, entrywise >= 0
  std::vector<Matrix> regression;  // B_i, d_i x K
  /// Objective after initialization, then after every outer iteration
  /// (post-normalization).
  std::vector<double> objective_trace;
  /// Objective at the end of each outer iteration, before normalization.
  std::vector<double> pre_normalization_trace;
  int iterations = 0;
  bool converged = false;
  /// Columns of V left unscaled by the last normalization (zero column sum).
  std::vector<Eigen::Index> unscaled_columns;
};

double l21_norm(const Matrix& b);

/// L2,1 norm with Huber-smoothed row norms: rows shorter than eps contribute
/// r^2/(2 eps) + eps/2. This is the quantity the eps-guarded reweighting
/// step decreases monotonically.
double l21_norm_smoothed(const Matrix& b, double eps);

/// ||B^T U - I||_F^2 + beta ||B||_{2,1}
double regression_objective(const Matrix& u, const Matrix& b, double beta);
double regression_objective_smoothed(const Matrix& u, const Matrix& b, double beta, double eps);

/// sum_i ||(X_i - U_i V^T) W_i||_F^2 (the weighted reconstruction term).
double data_term(const data::MultiViewDataset& ds, const std::vector<Matrix>& basis,
                 const Matrix& latent);

double objective(const data::MultiViewDataset& ds, const FactorizationState& st,
                 const Hyperparams& hp);

/// Solves A X + X B = C for symmetric PSD A (d x d) and B (K x K) by
/// diagonalizing B = Q L Q^T and solving (A + l_j I) y_j = (C Q)_j column by
/// column.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Exact minimizer of ||(X_i - U V^T) W_i||^2 + alpha ||B_i^T U - I||^2 in U.
Matrix update_basis(const data::MultiViewDataset& ds, const FactorizationState& st,
                    const Hyperparams& hp, Eigen::Index view);

/// One multiplicative step on V over all views.
Matrix latent_step(const data::MultiViewDataset& ds, const std::vector<Matrix>& basis,
                   const Matrix& latent, double epsilon);

/// Repeats latent_step until the relative change of the data term is below
/// hp.inner_tol or hp.inner_max steps were taken. When `inner_trace` is given
/// it receives the data term before the first step and after every step.
Matrix update_latent(const data::MultiViewDataset& ds, const FactorizationState& st,
                     const Hyperparams& hp, std::vector<double>* inner_trace = nullptr);

/// Reweighting step for B given U, with D_jj = 1/max(||b_j||, eps) taken
/// from `current`. beta == 0 yields the ridge least-squares solution.
Matrix regression_woodbury(const Matrix& u, const Matrix& current, double beta, double eps);
Matrix regression_direct(const Matrix& u, const Matrix& current, double beta, double eps);

Matrix update_regression(const FactorizationState& st, const Hyperparams& hp, Eigen::Index view);

/// Rescales V's columns to unit sum and each U_i by the inverse factors so
/// every U_i V^T is unchanged. Zero-sum columns are left as they are and
/// reported in unscaled_columns.
FactorizationState normalize(FactorizationState st);

/// Per-view semi-NMF on the present instances, averaged into a starting V;
/// U_i from update_basis with alpha = 0; B_i from the reweighting step with
/// D = I.
FactorizationState initialize(const data::MultiViewDataset& ds, const Hyperparams& hp);

FactorizationState fit_from(const data::MultiViewDataset& ds, const Hyperparams& hp,
                            FactorizationState init);

FactorizationState fit(const data::MultiViewDataset& ds, const Hyperparams& hp);

/// Gradient of the data term with respect to V.
Matrix latent_gradient(const data::MultiViewDataset& ds, const std::vector<Matrix>& basis,
                       const Matrix& latent);

/// max_jk min(V_jk, |dJ/dV_jk|); zero at a KKT point.
double kkt_residual(const data::MultiViewDataset& ds, const FactorizationState& st);

}  // namespace daimc::model
