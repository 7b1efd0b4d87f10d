#include "daimc/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "daimc/error.hpp"
#include "daimc/evaluation.hpp"
#include "daimc/seminmf.hpp"

namespace daimc::model {

using data::MultiViewDataset;
using Index = Eigen::Index;

namespace {

constexpr double kRidge = 1e-12;

std::size_t at(Index i) { return static_cast<std::size_t>(i); }

void require_view(const MultiViewDataset& ds, Index view) {
  if (view < 0 || view >= ds.n_views()) {
    std::ostringstream os;
    os << "view index " << view << " out of range [0, " << ds.n_views() << ")";
    throw InvalidInput(os.str());
  }
}

void require_shapes(const MultiViewDataset& ds, const FactorizationState& st) {
  const auto nv = at(ds.n_views());
  if (st.basis.size() != nv || st.regression.size() != nv)
    throw InvalidInput("factorization state does not match the number of views");
  const Index k = st.latent.cols();
  if (st.latent.rows() != ds.n_instances()) throw InvalidInput("V has the wrong number of rows");
  for (std::size_t i = 0; i < nv; ++i) {
    const Index d = ds.views()[i].rows();
    if (st.basis[i].rows() != d || st.basis[i].cols() != k || st.regression[i].rows() != d ||
        st.regression[i].cols() != k) {
      std::ostringstream os;
      os << "view " << i << ": U/B shapes do not match d = " << d << ", K = " << k;
      throw InvalidInput(os.str());
    }
  }
}

// Solves (M + ridge) X = R, adding a small ridge once if M is singular.
Matrix solve_spd_with_ridge(const Matrix& m, const Matrix& rhs, const char* what) {
  try {
    return numerics::solve_spd(m, rhs);
  } catch (const NumericError&) {
    Matrix reg = m;
    reg.diagonal().array() += kRidge * numerics::frob_scale(m);
    try {
      return numerics::solve_spd(reg, rhs);
    } catch (const NumericError& e) {
      throw NumericError(std::string(what) + ": singular after ridge: " + e.what());
    }
  }
}

// Inverse IRLS weights, 1 / D_jj = max(||b_j||, eps).
Vector inverse_row_weights(const Matrix& b, double eps) {
  return b.rowwise().norm().cwiseMax(eps);
}

Matrix ridge_least_squares(const Matrix& u) {
  // (U U^T + ridge I)^{-1} U rewritten through the K x K Gram matrix.
  Matrix gram = u.transpose() * u;
  gram.diagonal().array() += kRidge;
  return solve_spd_with_ridge(gram, u.transpose(), "regression").transpose();
}

// Positive/negative parts of X_i^T U_i and U_i^T U_i, fixed while V moves.
struct LatentTerms {
  std::vector<Matrix> xu_pos, xu_neg, uu_pos, uu_neg;
};

LatentTerms latent_terms(const MultiViewDataset& ds, const std::vector<Matrix>& basis) {
  LatentTerms t;
  for (Index i = 0; i < ds.n_views(); ++i) {
    // Rows of missing instances are weighted out in latent_step_impl.
    auto [xp, xn] = numerics::pos_neg_split(ds.view(i).transpose() * basis[at(i)]);
    auto [up, un] = numerics::pos_neg_split(basis[at(i)].transpose() * basis[at(i)]);
    t.xu_pos.push_back(std::move(xp));
    t.xu_neg.push_back(std::move(xn));
    t.uu_pos.push_back(std::move(up));
    t.uu_neg.push_back(std::move(un));
  }
  return t;
}

Matrix latent_step_impl(const MultiViewDataset& ds, const LatentTerms& t, const Matrix& v,
                        double epsilon) {
  const Index n = v.rows();
  const Index k = v.cols();
  Matrix numer = Matrix::Zero(n, k);
  Matrix denom = Matrix::Zero(n, k);
  Vector coverage = Vector::Zero(n);
  for (std::size_t i = 0; i < t.xu_pos.size(); ++i) {
    const Vector w = ds.indicator().weights(static_cast<Index>(i));
    numer.noalias() += w.asDiagonal() * (t.xu_pos[i] + v * t.uu_neg[i]);
    denom.noalias() += w.asDiagonal() * (t.xu_neg[i] + v * t.uu_pos[i]);
    coverage += w;
  }
  Matrix out = v.array() * (numer.array() / (denom.array() + epsilon)).sqrt();
  // An instance absent from every view has 0/0 here; keep its row.
  for (Index j = 0; j < n; ++j)
    if (coverage(j) == 0.0) out.row(j) = v.row(j);
  return out;
}

}  // namespace

void validate(const Hyperparams& hp) {
  std::ostringstream os;
  if (!(hp.alpha >= 0.0) || !std::isfinite(hp.alpha)) os << "alpha must be finite and >= 0; ";
  if (!(hp.beta >= 0.0) || !std::isfinite(hp.beta)) os << "beta must be finite and >= 0; ";
  if (hp.k < 1) os << "k must be >= 1; ";
  if (!(hp.outer_tol > 0.0)) os << "outer_tol must be > 0; ";
  if (!(hp.inner_tol > 0.0)) os << "inner_tol must be > 0; ";
  if (hp.outer_max < 0) os << "outer_max must be >= 0; ";
  if (hp.inner_max < 1) os << "inner_max must be >= 1; ";
  if (!(hp.epsilon > 0.0)) os << "epsilon must be > 0; ";
  if (!os.str().empty()) throw InvalidInput("hyperparameters: " + os.str());
}

// ---------------------------------------------------------------------------
// Objective

double l21_norm(const Matrix& b) { return b.rowwise().norm().sum(); }

double l21_norm_smoothed(const Matrix& b, double eps) {
  double total = 0.0;
  for (Index j = 0; j < b.rows(); ++j) {
    const double r = b.row(j).norm();
    total += r >= eps ? r : r * r / (2.0 * eps) + 0.5 * eps;
  }
  return total;
}

double regression_objective(const Matrix& u, const Matrix& b, double beta) {
  const Index k = u.cols();
  return (b.transpose() * u - Matrix::Identity(k, k)).squaredNorm() + beta * l21_norm(b);
}

double regression_objective_smoothed(const Matrix& u, const Matrix& b, double beta, double eps) {
  const Index k = u.cols();
  return (b.transpose() * u - Matrix::Identity(k, k)).squaredNorm() +
         beta * l21_norm_smoothed(b, eps);
}

double data_term(const MultiViewDataset& ds, const std::vector<Matrix>& basis,
                 const Matrix& latent) {
  double total = 0.0;
  for (Index i = 0; i < ds.n_views(); ++i) {
    const Vector w = ds.indicator().weights(i);
    total += ((ds.view(i) - basis[at(i)] * latent.transpose()) * w.asDiagonal()).squaredNorm();
  }
  return total;
}

double objective(const MultiViewDataset& ds, const FactorizationState& st,
                 const Hyperparams& hp) {
  require_shapes(ds, st);
  double total = data_term(ds, st.basis, st.latent);
  for (Index i = 0; i < ds.n_views(); ++i)
    total += hp.alpha * regression_objective(st.basis[at(i)], st.regression[at(i)], hp.beta);
  return total;
}

// ---------------------------------------------------------------------------
// U update

Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || c.rows() != a.rows() ||
      c.cols() != b.rows())
    throw InvalidInput("solve_sylvester: shape mismatch");
  const numerics::SymEig eig = numerics::sym_eig(b);
  const Matrix c_rot = c * eig.vectors;
  Matrix x_rot(c.rows(), c.cols());
  Matrix shifted = a;
  for (Index j = 0; j < b.rows(); ++j) {
    shifted.diagonal() = a.diagonal().array() + eig.values(j);
    x_rot.col(j) = solve_spd_with_ridge(shifted, c_rot.col(j), "solve_sylvester");
  }
  return x_rot * eig.vectors.transpose();
}

Matrix update_basis(const MultiViewDataset& ds, const FactorizationState& st,
                    const Hyperparams& hp, Index view) {
  require_view(ds, view);
  const Vector w = ds.indicator().weights(view);
  const Matrix& v = st.latent;
  const Matrix xwv = (ds.view(view) * w.asDiagonal()) * v;
  const Matrix vwv = v.transpose() * w.asDiagonal() * v;
  if (hp.alpha == 0.0) {
    Matrix gram = vwv;
    gram.diagonal().array() += kRidge;
    return solve_spd_with_ridge(gram, xwv.transpose(), "update_basis").transpose();
  }
  const Matrix& b = st.regression[at(view)];
  return solve_sylvester(hp.alpha * b * b.transpose(), vwv, xwv + hp.alpha * b);
}

// ---------------------------------------------------------------------------
// V update

Matrix latent_step(const MultiViewDataset& ds, const std::vector<Matrix>& basis,
                   const Matrix& latent, double epsilon) {
  return latent_step_impl(ds, latent_terms(ds, basis), latent, epsilon);
}

Matrix update_latent(const MultiViewDataset& ds, const FactorizationState& st,
                     const Hyperparams& hp, std::vector<double>* inner_trace) {
  require_shapes(ds, st);
  const LatentTerms terms = latent_terms(ds, st.basis);
  Matrix v = st.latent;
  double prev = data_term(ds, st.basis, v);
  if (inner_trace) inner_trace->assign(1, prev);
  for (int step = 0; step < hp.inner_max; ++step) {
    v = latent_step_impl(ds, terms, v, hp.epsilon);
    const double cur = data_term(ds, st.basis, v);
    if (inner_trace) inner_trace->push_back(cur);
    const bool done = std::abs(prev - cur) <= hp.inner_tol * prev;
    prev = cur;
    if (done) break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// B update

Matrix regression_woodbury(const Matrix& u, const Matrix& current, double beta, double eps) {
  if (current.rows() != u.rows() || current.cols() != u.cols())
    throw InvalidInput("regression: B and U shapes differ");
  if (beta == 0.0) return ridge_least_squares(u);
  // (U U^T + beta/2 D)^{-1} U
  //   = 2/beta [D^-1 - D^-1 U (U^T D^-1 U + beta/2 I)^-1 U^T D^-1] U
  //   = D^-1 U (U^T D^-1 U + beta/2 I)^-1
  const Vector dinv = inverse_row_weights(current, eps);
  const Matrix dinv_u = dinv.asDiagonal() * u;
  Matrix inner = u.transpose() * dinv_u;
  inner.diagonal().array() += 0.5 * beta;
  return solve_spd_with_ridge(inner, dinv_u.transpose(), "update_regression").transpose();
}

Matrix regression_direct(const Matrix& u, const Matrix& current, double beta, double eps) {
  if (current.rows() != u.rows() || current.cols() != u.cols())
    throw InvalidInput("regression: B and U shapes differ");
  if (beta == 0.0) return ridge_least_squares(u);
  const Vector d = inverse_row_weights(current, eps).cwiseInverse();
  Matrix system = u * u.transpose();
  system.diagonal() += 0.5 * beta * d;
  return solve_spd_with_ridge(system, u, "update_regression");
}

Matrix update_regression(const FactorizationState& st, const Hyperparams& hp, Index view) {
  if (view < 0 || at(view) >= st.basis.size()) throw InvalidInput("view index out of range");
  const Matrix& u = st.basis[at(view)];
  const Matrix& b = st.regression[at(view)];
  return hp.regression_form == RegressionForm::woodbury
             ? regression_woodbury(u, b, hp.beta, hp.epsilon)
             : regression_direct(u, b, hp.beta, hp.epsilon);
}

// ---------------------------------------------------------------------------
// Normalization

FactorizationState normalize(FactorizationState st) {
  st.unscaled_columns.clear();
  const Vector sums = st.latent.colwise().sum().transpose();
  for (Index c = 0; c < st.latent.cols(); ++c) {
    const double q = sums(c);
    if (!(q > 0.0)) {
      st.unscaled_columns.push_back(c);
      continue;
    }
    st.latent.col(c) /= q;
    for (Matrix& u : st.basis) u.col(c) *= q;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

void require_fit_preconditions(const MultiViewDataset& ds, const Hyperparams& hp) {
  validate(hp);
  Index limit = ds.n_instances();
  for (const Matrix& x : ds.views()) limit = std::min(limit, x.rows());
  if (hp.k > limit) {
    std::ostringstream os;
    os << "K = " << hp.k << " exceeds min(N, d_i) = " << limit;
    throw InvalidInput(os.str());
  }
  ds.indicator().require_rank_capacity(hp.k);
}

std::uint64_t view_seed(std::uint64_t seed, Index view) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(view + 1));
}

Matrix column_normalized(Matrix v) {
  for (Index c = 0; c < v.cols(); ++c) {
    const double s = v.col(c).sum();
    if (s > 0.0) v.col(c) /= s;
  }
  return v;
}

// Permutes the columns of `latent` to best match those of `reference`
// (largest total inner product), since each view's factorization orders its
// components arbitrarily.
Matrix align_columns(const Matrix& latent, const Matrix& reference) {
  const Index k = latent.cols();
  Vector ln = latent.colwise().norm().transpose();
  Vector rn = reference.colwise().norm().transpose();
  const Matrix sim = reference.transpose() * latent;
  std::vector<std::vector<long long>> cost(at(k), std::vector<long long>(at(k), 0));
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) {
      const double denom = std::max(rn(r) * ln(c), 1e-300);
      cost[at(r)][at(c)] = -std::llround(1e9 * sim(r, c) / denom);
    }
  }
  const std::vector<int> match = eval::hungarian(cost);
  Matrix out(latent.rows(), k);
  for (Index r = 0; r < k; ++r) out.col(r) = latent.col(match[at(r)]);
  return out;
}

// Inputs are validated before the loop, so anything thrown in here is a
// numeric breakdown of an intermediate quantity.
template <typename Fn>
Matrix with_context(int iteration, const char* stage, Index view, Fn&& fn) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "iteration " << iteration << ", " << stage;
    if (view >= 0) os << " (view " << view << ")";
    os << ": " << what;
    throw NumericError(os.str());
  };
  Matrix out;
  try {
    out = fn();
  } catch (const NumericError& e) {
    fail(e.what());
  } catch (const InvalidInput& e) {
    fail(e.what());
  }
  if (!out.allFinite()) fail("non-finite result");
  return out;
}

}  // namespace

FactorizationState initialize(const MultiViewDataset& ds, const Hyperparams& hp) {
  require_fit_preconditions(ds, hp);
  const Index n = ds.n_instances();
  const Index k = hp.k;
  Matrix v = Matrix::Zero(n, k);
  Matrix reference;
  for (Index i = 0; i < ds.n_views(); ++i) {
    const std::vector<Index> present = ds.indicator().present_instances(i);
    Matrix x(ds.view(i).rows(), static_cast<Index>(present.size()));
    for (std::size_t c = 0; c < present.size(); ++c) x.col(static_cast<Index>(c)) = ds.view(i).col(present[c]);
    const seminmf::State sn = seminmf::fit(x, k, view_seed(hp.seed, i));
    const Matrix latent = column_normalized(sn.v);
    const Eigen::RowVectorXd fill = latent.colwise().mean();
    Matrix full = fill.replicate(n, 1);
    for (std::size_t c = 0; c < present.size(); ++c) full.row(present[c]) = latent.row(static_cast<Index>(c));
    if (i == 0) {
      reference = full;
    } else {
      full = align_columns(full, reference);
    }
    v += full;
  }
  v /= static_cast<double>(ds.n_views());

  FactorizationState st;
  st.latent = column_normalized(std::move(v));
  st.basis.resize(at(ds.n_views()));
  st.regression.resize(at(ds.n_views()));
  Hyperparams plain = hp;
  plain.alpha = 0.0;
  for (Index i = 0; i < ds.n_views(); ++i) {
    st.basis[at(i)] = Matrix::Zero(ds.view(i).rows(), k);
    st.regression[at(i)] = Matrix::Zero(ds.view(i).rows(), k);
  }
  for (Index i = 0; i < ds.n_views(); ++i) {
    st.basis[at(i)] = update_basis(ds, st, plain, i);
    // D = I is the reweighting step from a B whose rows all have unit norm.
    const Matrix unit_rows = Matrix::Constant(ds.view(i).rows(), k, 1.0 / std::sqrt(double(k)));
    st.regression[at(i)] = regression_woodbury(st.basis[at(i)], unit_rows, hp.beta, hp.epsilon);
  }
  st.objective_trace = {objective(ds, st, hp)};
  return st;
}

FactorizationState fit_from(const MultiViewDataset& ds, const Hyperparams& hp,
                            FactorizationState st) {
  require_fit_preconditions(ds, hp);
  require_shapes(ds, st);
  if (!st.latent.allFinite()) throw InvalidInput("V has non-finite entries");
  for (std::size_t i = 0; i < st.basis.size(); ++i)
    if (!st.basis[i].allFinite() || !st.regression[i].allFinite())
      throw InvalidInput("view " + std::to_string(i) + ": U or B has non-finite entries");
  if (st.objective_trace.empty()) st.objective_trace = {objective(ds, st, hp)};
  st.pre_normalization_trace.clear();
  st.iterations = 0;
  st.converged = false;
  double prev = st.objective_trace.back();
  for (int it = 1; it <= hp.outer_max; ++it) {
    for (Index i = 0; i < ds.n_views(); ++i) {
      st.basis[at(i)] = with_context(it, "update_basis", i, [&] { return update_basis(ds, st, hp, i); });
      st.regression[at(i)] =
          with_context(it, "update_regression", i, [&] { return update_regression(st, hp, i); });
    }
    st.latent = with_context(it, "update_latent", -1, [&] { return update_latent(ds, st, hp); });
    st.pre_normalization_trace.push_back(objective(ds, st, hp));
    st = normalize(std::move(st));
    const double cur = objective(ds, st, hp);
    st.objective_trace.push_back(cur);
    st.iterations = it;
    if (!std::isfinite(cur)) {
      std::ostringstream os;
      os << "iteration " << it << ", objective: non-finite value";
      throw NumericError(os.str());
    }
    if (std::abs(prev - cur) <= hp.outer_tol * prev) {
      st.converged = true;
      break;
    }
    prev = cur;
  }
  return st;
}

FactorizationState fit(const MultiViewDataset& ds, const Hyperparams& hp) {
  return fit_from(ds, hp, initialize(ds, hp));
}

Matrix latent_gradient(const MultiViewDataset& ds, const std::vector<Matrix>& basis,
                       const Matrix& latent) {
  Matrix g = Matrix::Zero(latent.rows(), latent.cols());
  for (Index i = 0; i < ds.n_views(); ++i) {
    const Matrix& u = basis[at(i)];
    const Vector w = ds.indicator().weights(i);
    g.noalias() += 2.0 * w.asDiagonal() * (latent * (u.transpose() * u) - ds.view(i).transpose() * u);
  }
  return g;
}

double kkt_residual(const MultiViewDataset& ds, const FactorizationState& st) {
  const Matrix g = latent_gradient(ds, st.basis, st.latent);
  return st.latent.cwiseMin(g.cwiseAbs()).maxCoeff();
}

}  // namespace daimc::model
