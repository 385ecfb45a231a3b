#include <doctest.h>

#include <cmath>
#include <random>

#include "fvkit/errors.hpp"
#include "fvkit/gmm.hpp"
#include "oracles.hpp"

using namespace fvkit;

namespace {

GmmModel two_far_components(int d) {
  Vector w(2);
  w << 0.5, 0.5;
  RowMatrix mu = RowMatrix::Zero(2, d);
  mu.row(1).setConstant(100.0);
  RowMatrix var = RowMatrix::Ones(2, d);
  return GmmModel(w, mu, var, 1e-9);
}

GmmModel random_model(std::mt19937_64& rng, int m, int d) {
  std::uniform_real_distribution<double> u(0.3, 2.0);
  Vector w(m);
  for (int k = 0; k < m; ++k) w[k] = u(rng);
  w /= w.sum();
  RowMatrix var(m, d);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < d; ++j) var(k, j) = u(rng);
  return GmmModel(w, oracle::gaussian(rng, m, d), var, 1e-9);
}

}  // namespace

TEST_CASE("a single component is the sample mean and variance") {
  std::mt19937_64 rng(1);
  const RowMatrix X = (oracle::gaussian(rng, 400, 4) * 1.5).array() - 2.0;
  const auto fit = gmm_fit_em(FeatureSet(X), 1, GmmFitOptions{});
  const Vector mean = X.colwise().mean().transpose();
  for (int j = 0; j < 4; ++j) {
    const double var = (X.col(j).array() - mean[j]).square().mean();
    CHECK(std::abs(fit.model.means()(0, j) - mean[j]) <= 1e-6);
    CHECK(std::abs(fit.model.variances()(0, j) - var) <= 1e-6);
  }
  CHECK(fit.model.weights()[0] == doctest::Approx(1.0));
}

TEST_CASE("two separated 2-D blobs are recovered") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Vector2d a(-4.0, 1.0), b(5.0, -2.0);
  RowMatrix X(2000, 2);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector2d c = i % 2 ? a : b;
    X(i, 0) = c[0] + n(rng);
    X(i, 1) = c[1] + n(rng);
  }
  GmmFitOptions opt;
  opt.seed = 9;
  const auto fit = gmm_fit_em(FeatureSet(X), 2, opt);
  const auto& M = fit.model.means();
  const int ia = (M.row(0).transpose() - a).norm() < (M.row(1).transpose() - a).norm() ? 0 : 1;
  CHECK((M.row(ia).transpose() - a).norm() < 0.1);
  CHECK((M.row(1 - ia).transpose() - b).norm() < 0.1);
  CHECK(std::abs(fit.model.weights()[0] - 0.5) <= 0.05);
}

TEST_CASE("log-likelihood trace is non-decreasing and the fit is seeded") {
  std::mt19937_64 rng(3);
  RowMatrix X = oracle::gaussian(rng, 500, 3);
  for (int i = 0; i < 500; i += 3) X.row(i).array() += 4.0;
  GmmFitOptions opt;
  opt.seed = 4;
  opt.tol = 0.0;
  opt.max_iter = 40;
  const auto a = gmm_fit_em(FeatureSet(X), 5, opt);
  const auto b = gmm_fit_em(FeatureSet(X), 5, opt);
  CHECK(a.model == b.model);
  REQUIRE(a.loglik_trace.size() >= 2);
  for (std::size_t t = 1; t < a.loglik_trace.size(); ++t) CHECK(a.loglik_trace[t] >= a.loglik_trace[t - 1] - 1e-9);
  CHECK(a.loglik_trace.back() ==
        doctest::Approx(gmm_log_likelihood(FeatureSet(X), a.model) / 500.0).epsilon(1e-9));
}

TEST_CASE("duplicated features stay above the variance floor") {
  RowMatrix X(60, 2);
  for (int i = 0; i < 60; ++i) X.row(i) << (i < 30 ? 0.0 : 1.0), (i < 30 ? 0.0 : 2.0);
  const auto fit = gmm_fit_em(FeatureSet(X), 3, GmmFitOptions{});
  const double floor = variance_floor_for(FeatureSet(X));
  CHECK(floor > 0.0);
  CHECK(fit.model.variance_floor() == floor);
  CHECK((fit.model.variances().array() >= floor).all());
  CHECK(fit.model.weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("EM argument checks") {
  std::mt19937_64 rng(5);
  const FeatureSet X(oracle::gaussian(rng, 4, 2));
  CHECK_THROWS_AS(gmm_fit_em(X, 5, GmmFitOptions{}), InvalidArgument);
  CHECK_THROWS_AS(gmm_fit_em(X, 0, GmmFitOptions{}), InvalidArgument);
}

TEST_CASE("posteriors") {
  SUBCASE("one component gives responsibility one") {
    const GmmModel g(Vector::Ones(1), RowMatrix::Zero(1, 3), RowMatrix::Ones(1, 3), 1e-9);
    const Vector gamma = gmm_posteriors(Vector::Constant(3, 7.0), g);
    CHECK(gamma.size() == 1);
    CHECK(gamma[0] == 1.0);
  }
  SUBCASE("a point on a far-separated mean belongs to it") {
    const GmmModel g = two_far_components(3);
    CHECK(gmm_posteriors(Vector::Zero(3), g)[0] > 0.999);
  }
  SUBCASE("random inputs sum to one and match the batch form") {
    std::mt19937_64 rng(6);
    const GmmModel g = random_model(rng, 6, 4);
    const RowMatrix X = oracle::gaussian(rng, 50, 4) * 3.0;
    Vector loglik;
    const RowMatrix batch = gmm_posteriors_batch(FeatureSet(X), g, &loglik);
    for (int i = 0; i < 50; ++i) {
      const Vector gamma = gmm_posteriors(X.row(i).transpose(), g);
      CHECK(std::abs(gamma.sum() - 1.0) <= 1e-12);
      CHECK((gamma.transpose() - batch.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(loglik.sum() == doctest::Approx(oracle::mixture_loglik(X, g.weights(), g.means(), g.variances())));
  }
  SUBCASE("far-away points do not underflow") {
    const GmmModel g = two_far_components(2);
    const Vector gamma = gmm_posteriors(Vector::Constant(2, 1e4), g);
    CHECK(gamma.allFinite());
    CHECK(gamma.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("a feature on a mean with full responsibility") {
  const GmmModel g = two_far_components(3);
  RowMatrix X = RowMatrix::Zero(1, 3);
  const FisherVector fv = gmmfv_pool(FeatureSet(X), g);
  REQUIRE(fv.values.size() == 2 * 3 * 2);
  CHECK(fv.values.segment(0, 3).cwiseAbs().maxCoeff() <= 1e-12);
  for (int j = 0; j < 3; ++j) CHECK(fv.values[6 + j] == doctest::Approx(-std::sqrt(1.0 / (2 * 0.5))));
}

TEST_CASE("pooled GMM vectors are additive over features") {
  std::mt19937_64 rng(7);
  const GmmModel g = random_model(rng, 3, 4);
  const FeatureSet A(oracle::gaussian(rng, 10, 4)), B(oracle::gaussian(rng, 7, 4));
  const Vector va = gmmfv_pool(A, g).values, vb = gmmfv_pool(B, g).values;
  const Vector both = gmmfv_pool(FeatureSet::concat(A, B), g).values;
  CHECK((both - va - vb).cwiseAbs().maxCoeff() <= 1e-10);
  const Vector doubled = gmmfv_pool(FeatureSet::concat(A, A), g).values;
  CHECK((doubled - 2.0 * va).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("mean block matches finite differences of the log-likelihood") {
  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 5; ++inst) {
    const GmmModel g = random_model(rng, 2, 4);
    const RowMatrix X = oracle::gaussian(rng, 3, 4);
    const FisherVector fv = gmmfv_pool(FeatureSet(X), g);
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 4; ++j) {
        RowMatrix mp = g.means(), mm = g.means();
        mp(k, j) += h;
        mm(k, j) -= h;
        const double fd = (oracle::mixture_loglik(X, g.weights(), mp, g.variances()) -
                           oracle::mixture_loglik(X, g.weights(), mm, g.variances())) /
                          (2 * h);
        const double block = fv.values[k * 4 + j] * std::sqrt(g.weights()[k] / g.variances()(k, j));
        CHECK(std::abs(fd - block) <= 1e-5 * std::abs(fd));
      }
  }
}

TEST_CASE("mean-only layout and normalized encoding") {
  std::mt19937_64 rng(9);
  const GmmModel g = random_model(rng, 3, 5);
  const FeatureSet X(oracle::gaussian(rng, 20, 5));
  const FisherVector full = gmmfv_pool(X, g);
  const FisherVector mean_only = gmmfv_pool(X, g, true);
  CHECK(full.layout.length() == 30);
  CHECK(mean_only.layout.length() == 15);
  CHECK(mean_only.values == full.values.head(15));

  const FisherVector enc = gmmfv_encode(X, g, NormalizationSpec{});
  for (int s = 0; s < 6; ++s) CHECK(enc.values.segment(s * 5, 5).norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(gmmfv_pool(FeatureSet(oracle::gaussian(rng, 2, 4)), g), DimensionError);
}
