#include <limits>

#include "doctest.h"
#include "support.hpp"

#include "daimc/error.hpp"
#include "daimc/factorization.hpp"
#include "daimc/seminmf.hpp"

using namespace daimc;
using namespace daimc::model;
using data::IndicatorMatrix;
using data::MultiViewDataset;
using testing::Gen;

namespace {

FactorizationState random_state(Gen& g, const MultiViewDataset& ds, Index k) {
  FactorizationState st;
  for (Index i = 0; i < ds.n_views(); ++i) {
    st.basis.push_back(g.gaussian(ds.view(i).rows(), k));
    st.regression.push_back(g.gaussian(ds.view(i).rows(), k) * 0.1);
  }
  st.latent = g.nonneg(ds.n_instances(), k);
  return st;
}

// Replaces every masked column by noise.
MultiViewDataset scramble_missing(Gen& g, const MultiViewDataset& ds) {
  MultiViewDataset out = ds;
  for (Index i = 0; i < ds.n_views(); ++i) {
    Matrix x = ds.view(i);
    for (Index j = 0; j < ds.n_instances(); ++j)
      if (!ds.indicator().present(i, j)) x.col(j) = g.gaussian(x.rows(), 1) * 1e3;
    out = out.with_view(i, x);
  }
  return out;
}

MultiViewDataset one_view(const Matrix& x) { return MultiViewDataset({x}); }

}  // namespace

TEST_SUITE("factorization") {

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(validate(hp));
  hp.alpha = -1;
  CHECK_THROWS_AS(validate(hp), InvalidInput);
  hp = {};
  hp.beta = -0.5;
  CHECK_THROWS_AS(validate(hp), InvalidInput);
  hp = {};
  hp.k = 0;
  CHECK_THROWS_AS(validate(hp), InvalidInput);
  hp = {};
  hp.outer_tol = 0;
  CHECK_THROWS_AS(validate(hp), InvalidInput);
  hp = {};
  hp.inner_tol = -1;
  CHECK_THROWS_AS(validate(hp), InvalidInput);
}

TEST_CASE("objective examples") {
  MultiViewDataset ds = one_view(Matrix::Zero(3, 4));
  FactorizationState st;
  st.basis = {Matrix::Zero(3, 2)};
  st.regression = {Matrix::Zero(3, 2)};
  st.latent = Matrix::Zero(4, 2);
  Hyperparams hp;
  hp.alpha = 0.5;
  hp.k = 2;
  CHECK(objective(ds, st, hp) == doctest::Approx(1.0));

  Gen g(41);
  Matrix u = g.gaussian(3, 3);
  Matrix v = g.nonneg(5, 3);
  MultiViewDataset exact = one_view(u * v.transpose());
  FactorizationState ex;
  ex.basis = {u};
  ex.latent = v;
  ex.regression = {u.transpose().inverse()};
  hp.beta = 0;
  hp.k = 3;
  CHECK(std::abs(objective(exact, ex, hp)) <= 1e-20 + 1e-12 * u.squaredNorm());
}

TEST_CASE("objective matches a hand evaluation") {
  Gen g(42);
  auto ds = testing::random_problem(g, 20, 2, 6, 2, 0.3);
  auto st = random_state(g, ds, 2);
  Hyperparams hp;
  hp.alpha = 0.7;
  hp.beta = 0.3;
  hp.k = 2;
  double expect = 0;
  for (Index i = 0; i < 2; ++i) {
    Matrix w = data::build_weight_matrix(ds.indicator(), i);
    expect += ((ds.view(i) - st.basis[i] * st.latent.transpose()) * w).squaredNorm();
    Matrix b = st.regression[i];
    double l21 = 0;
    for (Index r = 0; r < b.rows(); ++r) l21 += std::sqrt(b.row(r).squaredNorm());
    expect += hp.alpha * ((b.transpose() * st.basis[i] - Matrix::Identity(2, 2)).squaredNorm() +
                          hp.beta * l21);
  }
  CHECK(objective(ds, st, hp) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("objective ignores masked columns") {
  Gen g(43);
  auto ds = testing::random_problem(g, 15, 3, 5, 2, 0.4);
  auto st = random_state(g, ds, 2);
  Hyperparams hp;
  hp.k = 2;
  auto noisy = scramble_missing(g, ds);
  CHECK(objective(ds, st, hp) == objective(noisy, st, hp));
}

TEST_CASE("objective rejects shape mismatch") {
  Gen g(44);
  auto ds = testing::random_problem(g, 10, 2, 5, 2, 0.0);
  auto st = random_state(g, ds, 2);
  Hyperparams hp;
  hp.k = 2;
  st.basis[1] = Matrix::Zero(1, 2);
  CHECK_THROWS_AS(objective(ds, st, hp), InvalidInput);
  st = random_state(g, ds, 2);
  st.latent = Matrix::Zero(3, 2);
  CHECK_THROWS_AS(objective(ds, st, hp), InvalidInput);
}

TEST_CASE("l2,1 norms") {
  Matrix b(3, 2);
  b << 3, 4, 0, 0, 1, 0;
  CHECK(l21_norm(b) == doctest::Approx(6));
  CHECK(l21_norm_smoothed(b, 1e-10) == doctest::Approx(6 + 0.5e-10));
  CHECK(l21_norm_smoothed(b, 2.0) == doctest::Approx(5 + 0.25 + 1.0 + 0 + 1.0));
}

TEST_CASE("solve_sylvester examples") {
  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 1;
  b << 1;
  c << 3;
  CHECK(solve_sylvester(a, b, c)(0, 0) == doctest::Approx(1.5));

  Gen g(45);
  Matrix bb = g.spd(3);
  Matrix cc = g.gaussian(4, 3);
  Matrix x = solve_sylvester(Matrix::Zero(4, 4), bb, cc);
  CHECK(testing::rel_diff(x, cc * bb.inverse()) <= 1e-10);
}

TEST_CASE("solve_sylvester agrees with the Kronecker oracle") {
  Gen g(46);
  for (int t = 0; t < 100; ++t) {
    const Index d = g.integer(1, 8), k = g.integer(1, 5);
    Matrix a = g.psd(d, g.integer(0, static_cast<int>(d)));
    Matrix b = g.spd(k, g.uniform(0.01, 1));
    Matrix c = g.gaussian(d, k);
    Matrix x = solve_sylvester(a, b, c);
    Matrix ref = numerics::sylvester_kron_oracle(a, b, c);
    CHECK(testing::rel_diff(x, ref) <= 1e-8);
    CHECK((a * x + x * b - c).norm() <= 1e-8 * numerics::frob_scale(c));
  }
}

TEST_CASE("solve_sylvester ridge and failure") {
  // exactly singular: absorbed by the ridge
  Matrix x = solve_sylvester(Matrix::Zero(2, 2), Matrix::Zero(1, 1), Matrix::Ones(2, 1));
  CHECK(x.allFinite());
  Matrix neg = -Matrix::Identity(2, 2);
  CHECK_THROWS_AS(solve_sylvester(neg, Matrix::Zero(1, 1), Matrix::Ones(2, 1)), NumericError);
}

TEST_CASE("update_basis scalar case") {
  Matrix x(1, 2);
  x << 2, 0;
  auto ds = one_view(x);
  FactorizationState st;
  st.basis = {Matrix::Zero(1, 1)};
  st.regression = {Matrix::Ones(1, 1)};
  st.latent = Matrix::Zero(2, 1);
  st.latent(0, 0) = 1;
  Hyperparams hp;
  hp.alpha = 1;
  hp.k = 1;
  CHECK(update_basis(ds, st, hp, 0)(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("update_basis with alpha = 0 is the semi-NMF basis") {
  Gen g(47);
  Matrix x = g.gaussian(6, 15);
  auto ds = one_view(x);
  auto st = random_state(g, ds, 3);
  Hyperparams hp;
  hp.alpha = 0;
  hp.k = 3;
  CHECK(testing::rel_diff(update_basis(ds, st, hp, 0), seminmf::update_u(x, st.latent)) <= 1e-10);
}

TEST_CASE("update_basis solves its Sylvester equation and lowers its objective") {
  Gen g(48);
  for (int t = 0; t < 30; ++t) {
    auto ds = testing::random_problem(g, g.integer(8, 30), g.integer(1, 3), 10, 3, 0.3);
    const Index k = g.integer(1, 3);
    auto st = random_state(g, ds, k);
    Hyperparams hp;
    hp.k = k;
    hp.alpha = g.uniform(0.01, 20);
    for (Index i = 0; i < ds.n_views(); ++i) {
      Matrix u = update_basis(ds, st, hp, i);
      const Vector w = ds.indicator().weights(i);
      const Matrix& b = st.regression[i];
      Matrix a = hp.alpha * b * b.transpose();
      Matrix bb = st.latent.transpose() * w.asDiagonal() * st.latent;
      Matrix c = ds.view(i) * w.asDiagonal() * st.latent + hp.alpha * b;
      CHECK((a * u + u * bb - c).norm() <= 1e-8 * numerics::frob_scale(c));
      auto partial = [&](const Matrix& basis) {
        return ((ds.view(i) - basis * st.latent.transpose()) * w.asDiagonal()).squaredNorm() +
               hp.alpha * (b.transpose() * basis - Matrix::Identity(k, k)).squaredNorm();
      };
      CHECK(partial(u) <= partial(st.basis[i]) * (1 + 1e-12));
    }
  }
}

TEST_CASE("update_basis depends only on present columns") {
  Gen g(49);
  auto ds = testing::random_problem(g, 20, 2, 6, 2, 0.5);
  auto st = random_state(g, ds, 2);
  Hyperparams hp;
  hp.k = 2;
  Matrix before = update_basis(ds, st, hp, 0);
  auto noisy = scramble_missing(g, ds);
  auto st2 = st;
  for (Index j = 0; j < ds.n_instances(); ++j)
    if (!ds.indicator().present(0, j)) st2.latent.row(j) = g.nonneg(1, 2) * 100;
  CHECK(testing::rel_diff(update_basis(noisy, st2, hp, 0), before) <= 1e-12);
}

TEST_CASE("latent_step examples") {
  Matrix x(1, 2);
  x << 2, 2;
  auto ds = one_view(x);
  Matrix v = Matrix::Ones(2, 1);
  Matrix u = Matrix::Ones(1, 1);
  Matrix next = latent_step(ds, {u}, v, 1e-10);
  CHECK(next(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));

  Gen g(50);
  Matrix xr = g.gaussian(5, 12);
  auto dr = one_view(xr);
  Matrix ur = g.gaussian(5, 3);
  Matrix vr = g.nonneg(12, 3);
  Matrix a = vr, b = vr;
  for (int s = 0; s < 5; ++s) {
    a = latent_step(dr, {ur}, a, 1e-10);
    b = seminmf::update_v(xr, ur, b, 1e-10);
  }
  CHECK(testing::rel_diff(a, b) <= 1e-14);
}

TEST_CASE("update_latent keeps zeros and nonnegativity and decreases the data term") {
  Gen g(51);
  for (int t = 0; t < 30; ++t) {
    auto ds = testing::random_problem(g, g.integer(8, 40), g.integer(1, 3), 10, 3, 0.3);
    const Index k = g.integer(1, 3);
    auto st = random_state(g, ds, k);
    st.latent(0, 0) = 0;
    st.latent(ds.n_instances() - 1, k - 1) = 0;
    Hyperparams hp;
    hp.k = k;
    std::vector<double> trace;
    Matrix v = update_latent(ds, st, hp, &trace);
    CHECK(v(0, 0) == 0);
    CHECK(v(ds.n_instances() - 1, k - 1) == 0);
    CHECK(v.minCoeff() >= 0);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1 + 1e-10));
    CHECK(static_cast<int>(trace.size()) <= hp.inner_max + 1);
  }
}

TEST_CASE("update_latent ignores masked columns") {
  Gen g(52);
  auto ds = testing::random_problem(g, 25, 3, 8, 3, 0.5);
  auto st = random_state(g, ds, 3);
  Hyperparams hp;
  hp.k = 3;
  Matrix a = update_latent(ds, st, hp);
  Matrix b = update_latent(scramble_missing(g, ds), st, hp);
  CHECK(a == b);
}

TEST_CASE("regression update examples") {
  Matrix u = Matrix::Ones(1, 1);
  Matrix b = Matrix::Ones(1, 1);
  CHECK(regression_woodbury(u, b, 1.0, 1e-10)(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(regression_direct(u, b, 1.0, 1e-10)(0, 0) == doctest::Approx(2.0 / 3.0));

  Gen g(53);
  Matrix uu = g.gaussian(20, 3);
  Matrix bb = g.gaussian(20, 3);
  Matrix w = regression_woodbury(uu, bb, 0.1, 1e-10);
  Matrix d = regression_direct(uu, bb, 0.1, 1e-10);
  CHECK(testing::rel_diff(w, d) <= 1e-8);

  // beta = 0 gives the minimum-norm least-squares solution.
  Matrix ls = uu * (uu.transpose() * uu).inverse();
  CHECK(testing::rel_diff(regression_woodbury(uu, bb, 0.0, 1e-10), ls) <= 1e-8);
  CHECK(testing::rel_diff(regression_direct(uu, bb, 0.0, 1e-10), ls) <= 1e-8);
}

TEST_CASE("regression step minimizes the reweighted objective") {
  Gen g(54);
  for (int t = 0; t < 20; ++t) {
    const Index d = g.integer(2, 15), k = g.integer(1, 4);
    Matrix u = g.gaussian(d, k);
    Matrix cur = g.gaussian(d, k);
    const double beta = g.uniform(0.01, 5);
    Vector dd(d);
    for (Index j = 0; j < d; ++j) dd(j) = 1.0 / std::max(cur.row(j).norm(), 1e-10);
    auto surrogate = [&](const Matrix& b) {
      return (b.transpose() * u - Matrix::Identity(k, k)).squaredNorm() +
             0.5 * beta * (b.transpose() * dd.asDiagonal() * b).trace();
    };
    Matrix next = regression_woodbury(u, cur, beta, 1e-10);
    const double best = surrogate(next);
    for (int p = 0; p < 10; ++p)
      CHECK(best <= surrogate(next + g.gaussian(d, k) * 1e-3) + 1e-12 * std::abs(best));
  }
}

TEST_CASE("IRLS descent on the smoothed regression objective") {
  Gen g(55);
  for (int t = 0; t < 50; ++t) {
    const Index d = g.integer(2, 20), k = g.integer(1, 5);
    Matrix u = g.gaussian(d, k);
    Matrix b = g.gaussian(d, k);
    if (t % 5 == 0) b.row(0).setZero();
    const double beta = g.uniform(0.01, 10);
    double prev = regression_objective_smoothed(u, b, beta, 1e-10);
    for (int s = 0; s < 20; ++s) {
      b = regression_woodbury(u, b, beta, 1e-10);
      const double cur = regression_objective_smoothed(u, b, beta, 1e-10);
      CHECK(cur <= prev + 1e-9 * std::max(1.0, prev));
      prev = cur;
    }
  }
}

TEST_CASE("update_regression honours the configured form") {
  Gen g(56);
  auto ds = testing::random_problem(g, 12, 2, 9, 3, 0.0);
  auto st = random_state(g, ds, 3);
  Hyperparams hp;
  hp.k = 3;
  hp.beta = 0.4;
  Matrix a = update_regression(st, hp, 1);
  hp.regression_form = RegressionForm::direct;
  Matrix b = update_regression(st, hp, 1);
  CHECK(testing::rel_diff(a, b) <= 1e-8);
  CHECK(testing::rel_diff(a, regression_direct(st.basis[1], st.regression[1], 0.4, hp.epsilon)) <= 1e-12);
}

TEST_CASE("normalize examples") {
  FactorizationState st;
  st.latent.resize(2, 2);
  st.latent << 1, 3, 1, 1;
  st.basis = {Matrix::Ones(1, 2)};
  st.regression = {Matrix::Ones(1, 2)};
  auto n = normalize(st);
  Matrix expect(2, 2);
  expect << 0.5, 0.75, 0.5, 0.25;
  CHECK(n.latent.isApprox(expect));
  CHECK(n.basis[0](0, 0) == doctest::Approx(2));
  CHECK(n.basis[0](0, 1) == doctest::Approx(4));
  CHECK(n.unscaled_columns.empty());

  auto again = normalize(n);
  CHECK(again.latent.isApprox(n.latent, 1e-15));
  CHECK(again.basis[0].isApprox(n.basis[0], 1e-15));
}

TEST_CASE("normalize flags zero columns") {
  FactorizationState st;
  st.latent = Matrix::Ones(3, 2);
  st.latent.col(1).setZero();
  st.basis = {Matrix::Ones(2, 2)};
  st.regression = {Matrix::Ones(2, 2)};
  auto n = normalize(st);
  CHECK(n.unscaled_columns == std::vector<Index>{1});
  CHECK(n.latent.col(1).isZero(0));
  CHECK(n.basis[0].col(1) == st.basis[0].col(1));
  CHECK(n.latent.col(0).sum() == doctest::Approx(1));
}

TEST_CASE("normalize preserves reconstructions") {
  Gen g(57);
  for (int t = 0; t < 50; ++t) {
    auto ds = testing::random_problem(g, g.integer(5, 30), g.integer(1, 3), 8, 3, 0.3);
    auto st = random_state(g, ds, g.integer(1, 3));
    st.latent *= g.uniform(0.01, 100);
    auto n = normalize(st);
    for (Index c = 0; c < n.latent.cols(); ++c) CHECK(std::abs(n.latent.col(c).sum() - 1) <= 1e-12);
    for (Index i = 0; i < ds.n_views(); ++i) {
      Matrix r0 = st.basis[i] * st.latent.transpose();
      Matrix r1 = n.basis[i] * n.latent.transpose();
      CHECK((r0 - r1).norm() <= 1e-10 * std::max(1.0, r0.norm()));
    }
    const double d0 = data_term(ds, st.basis, st.latent);
    const double d1 = data_term(ds, n.basis, n.latent);
    CHECK(std::abs(d0 - d1) <= 1e-10 * std::max(1.0, d0));
  }
}

TEST_CASE("initialize produces a valid state") {
  Gen g(58);
  auto ds = testing::random_problem(g, 30, 3, 10, 3, 0.3);
  Hyperparams hp;
  hp.k = 3;
  auto st = initialize(ds, hp);
  REQUIRE(st.basis.size() == 3);
  REQUIRE(st.regression.size() == 3);
  CHECK(st.latent.rows() == 30);
  CHECK(st.latent.cols() == 3);
  CHECK(st.latent.minCoeff() >= 0);
  for (Index c = 0; c < 3; ++c) CHECK(st.latent.col(c).sum() == doctest::Approx(1));
  for (Index i = 0; i < 3; ++i) {
    CHECK(st.basis[i].rows() == ds.view(i).rows());
    CHECK(st.regression[i].allFinite());
  }
  auto again = initialize(ds, hp);
  CHECK(again.latent == st.latent);
}

TEST_CASE("fit with outer_max = 0 returns the initialization") {
  Gen g(59);
  auto ds = testing::random_problem(g, 20, 2, 8, 2, 0.3);
  Hyperparams hp;
  hp.k = 2;
  hp.outer_max = 0;
  auto st = fit(ds, hp);
  auto init = initialize(ds, hp);
  CHECK(st.latent == init.latent);
  CHECK(st.basis == init.basis);
  CHECK(st.iterations == 0);
  CHECK(st.objective_trace.size() == 1);
}

TEST_CASE("fit rejects a subspace larger than the data") {
  Gen g(60);
  auto ds = testing::random_problem(g, 20, 2, 3, 3, 0.0);
  Hyperparams hp;
  hp.k = 30;
  CHECK_THROWS(fit(ds, hp));
}

TEST_CASE("fit trace is monotone before normalization") {
  Gen g(61);
  for (int t = 0; t < 25; ++t) {
    auto ds = testing::random_problem(g, g.integer(8, 50), g.integer(1, 3), 20, 4,
                                      g.uniform(0, 0.5));
    Hyperparams hp;
    hp.k = g.integer(1, 4);
    hp.alpha = std::pow(10.0, g.integer(-2, 2));
    hp.beta = std::pow(10.0, g.integer(-2, 1));
    hp.seed = static_cast<std::uint64_t>(t);
    hp.outer_max = 60;
    auto st = fit(ds, hp);
    const auto& pre = st.pre_normalization_trace;
    REQUIRE(pre.size() == static_cast<std::size_t>(st.iterations));
    CHECK(st.objective_trace.size() == pre.size() + 1);
    for (std::size_t i = 1; i < pre.size(); ++i)
      CHECK(pre[i] <= pre[i - 1] + 1e-8 * std::max(1.0, std::abs(pre[i - 1])));
    CHECK(st.latent.minCoeff() >= 0);
  }
}

TEST_CASE("each outer iteration descends from its normalized start") {
  Gen g(64);
  for (int t = 0; t < 60; ++t) {
    const Index k = g.integer(1, 4);
    auto ds = testing::random_problem(g, g.integer(10, 50), 1 + t % 3, 20, k, g.uniform(0, 0.5));
    Hyperparams hp;
    hp.k = k;
    hp.alpha = std::pow(10.0, g.integer(-3, 3));
    hp.beta = std::pow(10.0, g.integer(-3, 2));
    hp.seed = static_cast<std::uint64_t>(t);
    auto st = fit(ds, hp);
    const auto& pre = st.pre_normalization_trace;
    const auto& post = st.objective_trace;
    for (std::size_t i = 0; i < pre.size(); ++i)
      CHECK(pre[i] <= post[i] + 1e-8 * std::max(1.0, std::abs(post[i])));
  }
}

TEST_CASE("fit ignores masked columns") {
  Gen g(62);
  auto ds = testing::random_problem(g, 30, 3, 8, 2, 0.4);
  Hyperparams hp;
  hp.k = 2;
  hp.outer_max = 20;
  auto a = fit(ds, hp);
  auto b = fit(scramble_missing(g, ds), hp);
  CHECK(a.latent == b.latent);
  CHECK(a.objective_trace == b.objective_trace);
}

TEST_CASE("converged fit satisfies complementarity") {
  data::SynthSpec s;
  s.n_per_cluster = 20;
  s.dims = {6, 6, 6};
  s.separation = 4;
  s.noise_sd = 1;
  auto ds = data::apply_incomplete_rate(data::synth_planted(s), 0.3, 1);
  Hyperparams hp;
  hp.k = 3;
  hp.outer_tol = 1e-9;
  hp.inner_tol = 1e-12;
  hp.outer_max = 1000;
  auto st = fit(ds, hp);
  // min(V, |grad|) with each side measured against its own scale, since
  // normalization fixes the magnitude of V and pushes it into U.
  const Matrix grad = latent_gradient(ds, st.basis, st.latent).cwiseAbs();
  const double gscale = latent_gradient(ds, st.basis, Matrix::Zero(st.latent.rows(), 3)).cwiseAbs().maxCoeff();
  const Matrix resid = (st.latent / st.latent.maxCoeff()).cwiseMin(grad / gscale);
  CHECK(resid.maxCoeff() <= 1e-4);
  CHECK(kkt_residual(ds, st) == doctest::Approx(st.latent.cwiseMin(grad).maxCoeff()));
}

TEST_CASE("numeric failures carry iteration and stage") {
  Matrix x = Matrix::Constant(2, 4, 1e154);
  x(0, 1) = -1e154;
  auto ds = one_view(x);
  Hyperparams hp;
  hp.k = 1;
  hp.alpha = 0;
  FactorizationState st;
  st.basis = {Matrix::Ones(2, 1)};
  st.regression = {Matrix::Ones(2, 1)};
  st.latent = Matrix::Ones(4, 1);
  st.objective_trace = {1.0};
  try {
    fit_from(ds, hp, st);
    FAIL("expected a numeric failure");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("iteration 1") != std::string::npos);
    CHECK(msg.find("(view 0)") != std::string::npos);
  }
}

TEST_CASE("fit_from rejects a non-finite starting state") {
  auto ds = one_view(Matrix::Ones(2, 4));
  Hyperparams hp;
  hp.k = 1;
  FactorizationState st;
  st.basis = {Matrix::Ones(2, 1)};
  st.regression = {Matrix::Ones(2, 1)};
  st.latent = Matrix::Ones(4, 1);
  st.latent(2, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fit_from(ds, hp, st), InvalidInput);
}

}  // TEST_SUITE
