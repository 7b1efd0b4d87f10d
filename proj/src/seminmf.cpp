#include "daimc/seminmf.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "daimc/error.hpp"

namespace daimc::seminmf {

using Index = Eigen::Index;

double objective(const Matrix& x, const Matrix& u, const Matrix& v) {
  return (x - u * v.transpose()).squaredNorm();
}

Matrix update_u(const Matrix& x, const Matrix& v, bool* degenerate) {
  if (x.cols() != v.rows()) throw InvalidInput("update_u: X and V disagree on N");
  if (degenerate) *degenerate = (v.colwise().squaredNorm().array() == 0.0).any();
  Matrix gram = v.transpose() * v;
  gram.diagonal().array() += kRidge;
  const Matrix xv = x * v;
  return numerics::solve_spd(gram, xv.transpose()).transpose();
}

Matrix update_v(const Matrix& x, const Matrix& u, const Matrix& v, double epsilon) {
  if (x.cols() != v.rows() || x.rows() != u.rows() || u.cols() != v.cols())
    throw InvalidInput("update_v: shape mismatch");
  numerics::require_finite(x, "update_v(x)");
  numerics::require_finite(u, "update_v(u)");
  numerics::require_finite(v, "update_v(v)");
  const auto [xu_pos, xu_neg] = numerics::pos_neg_split(x.transpose() * u);
  const auto [uu_pos, uu_neg] = numerics::pos_neg_split(u.transpose() * u);
  const Matrix numer = xu_pos + v * uu_neg;
  const Matrix denom = xu_neg + v * uu_pos;
  return v.array() * (numer.array() / (denom.array() + epsilon)).sqrt();
}

State initialize(const Matrix& x, Index k, std::uint64_t seed) {
  if (k < 1 || k > std::min(x.rows(), x.cols())) {
    std::ostringstream os;
    os << "seminmf: K = " << k << " must lie in [1, " << std::min(x.rows(), x.cols()) << "]";
    throw InvalidInput(os.str());
  }
  numerics::require_finite(x, "seminmf input");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vector col_scale = x.cwiseAbs().colwise().mean().transpose();
  Matrix v(x.cols(), k);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < x.cols(); ++j) v(j, c) = std::abs(gauss(rng)) * col_scale(j);
  State st;
  st.u = update_u(x, v);
  st.v = std::move(v);
  st.objective = objective(x, st.u, st.v);
  st.trace = {st.objective};
  return st;
}

State fit_from(const Matrix& x, State st, const Options& opts) {
  if (st.trace.empty()) {
    st.objective = objective(x, st.u, st.v);
    st.trace = {st.objective};
  }
  for (int it = 0; it < opts.max_iter; ++it) {
    st.u = update_u(x, st.v);
    st.v = update_v(x, st.u, st.v, opts.epsilon);
    const double prev = st.objective;
    st.objective = objective(x, st.u, st.v);
    st.trace.push_back(st.objective);
    ++st.iterations;
    if (std::abs(prev - st.objective) <= opts.tol * prev) break;
  }
  return st;
}

State fit(const Matrix& x, Index k, std::uint64_t seed, const Options& opts) {
  return fit_from(x, initialize(x, k, seed), opts);
}

}  // namespace daimc::seminmf
