#include <doctest.h>

#include <numeric>
#include <random>

#include "fvkit/errors.hpp"
#include "fvkit/scfvc.hpp"
#include "oracles.hpp"

using namespace fvkit;

namespace {

SparseCodingParams params(double lambda, double sigma2 = 1.0) {
  SparseCodingParams p;
  p.lambda = lambda;
  p.sigma2 = sigma2;
  return p;
}

Vector vectorize(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace

TEST_CASE("a zero code gives the zero matrix") {
  std::mt19937_64 rng(1);
  const Dictionary dict(oracle::random_bases(rng, 6, 4));
  CHECK(scfv_encode_one(Vector::Zero(6), dict, params(0.1)).isZero(0.0));
  const Vector x = oracle::gaussian_vec(rng, 6);
  CHECK(scfv_encode_one(x, dict, params(1e3)).isZero(0.0));
}

TEST_CASE("a feature equal to an orthonormal basis vector") {
  std::mt19937_64 rng(2);
  const Matrix Q = oracle::gaussian(rng, 6, 6).householderQr().householderQ();
  const Dictionary dict(Matrix(Q.leftCols(4)));
  for (double sigma2 : {1.0, 0.5}) {
    const double lambda = 0.1;
    const double u1 = std::max(0.0, 1.0 - lambda * sigma2 / 2.0);
    const Matrix enc = scfv_encode_one(Q.col(0), dict, params(lambda, sigma2));
    CHECK((enc.col(0) - (Q.col(0) - u1 * Q.col(0)) * u1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(enc.rightCols(3).isZero(0.0));
  }
}

TEST_CASE("column k is nonzero exactly when the code uses atom k") {
  std::mt19937_64 rng(3);
  const Dictionary dict(oracle::random_bases(rng, 10, 25));
  const SparseCodingParams p = params(0.3);
  for (int inst = 0; inst < 20; ++inst) {
    const Vector x = oracle::gaussian_vec(rng, 10);
    const SparseCode code = lasso_solve(x, dict, p);
    const Matrix enc = scfv_encode_one(x, dict, p);
    const Vector r = x - dict.bases() * code.u;
    for (int k = 0; k < 25; ++k) {
      if (code.u[k] == 0.0)
        CHECK(enc.col(k).isZero(0.0));
      else if (r.norm() > 0.0)
        CHECK(enc.col(k).norm() > 0.0);
    }
  }
}

TEST_CASE("the encoder is the gradient of the minimized objective up to -2/sigma2") {
  std::mt19937_64 rng(4);
  for (int inst = 0; inst < 5; ++inst) {
    const Matrix B = oracle::random_bases(rng, 8, 5, 0.9);
    const Vector x = oracle::gaussian_vec(rng, 8);
    const SparseCodingParams p = params(0.1, inst % 2 ? 1.0 : 0.7);
    const Matrix enc = scfv_encode_one(x, Dictionary(B), p);
    const double h = 1e-5;
    const double scale = enc.cwiseAbs().maxCoeff() * 2.0 / p.sigma2;
    for (int i = 0; i < 8; ++i)
      for (int k = 0; k < 5; ++k) {
        Matrix Bp = B, Bm = B;
        Bp(i, k) += h;
        Bm(i, k) -= h;
        const Dictionary dp(Bp), dm(Bm);
        const double fp = lasso_objective(x, dp, lasso_solve(x, dp, p).u, p);
        const double fm = lasso_objective(x, dm, lasso_solve(x, dm, p).u, p);
        const double fd = (fp - fm) / (2 * h);
        const double analytic = -2.0 / p.sigma2 * enc(i, k);
        CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(std::abs(analytic), 1e-6 * scale));
      }
  }
}

TEST_CASE("image encoding is sum pooling of per-feature matrices") {
  std::mt19937_64 rng(5);
  const Dictionary dict(oracle::random_bases(rng, 6, 8));
  const SparseCodingParams p = params(0.2);
  const FeatureSet A(oracle::gaussian(rng, 7, 6)), B(oracle::gaussian(rng, 5, 6));

  SUBCASE("single feature") {
    const FeatureSet one = A.slice(0, 1);
    const Vector direct = vectorize(scfv_encode_one(one.row(0).transpose(), dict, p));
    NormalizationSpec norm;
    const FisherVector fv = scfv_encode_image(one, dict, p, norm);
    norm.subvector_len = 6;
    CHECK((fv.values - normalize(direct, norm)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(fv.layout.kind == EncodingKind::Scfvc);
    CHECK(fv.layout.length() == 48);
  }
  SUBCASE("concatenation adds") {
    const Vector va = scfv_pool(A, dict, p).values, vb = scfv_pool(B, dict, p).values;
    CHECK((scfv_pool(FeatureSet::concat(A, B), dict, p).values - va - vb).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("feature order does not matter") {
    std::vector<std::size_t> order(7);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    CHECK((scfv_pool(A.select(order), dict, p).values - scfv_pool(A, dict, p).values).cwiseAbs().maxCoeff() <=
          1e-12);
  }
  SUBCASE("all-zero codes give the zero vector") {
    const FisherVector fv = scfv_encode_image(A, dict, params(1e4), NormalizationSpec{});
    CHECK(fv.values.isZero(0.0));
  }
  SUBCASE("repeated encodings are bit-identical") {
    CHECK(scfv_encode_image(A, dict, p, NormalizationSpec{}).values ==
          scfv_encode_image(A, dict, p, NormalizationSpec{}).values);
  }
}

TEST_CASE("unconverged features use their last iterate and are counted") {
  std::mt19937_64 rng(6);
  const Dictionary dict(oracle::random_bases(rng, 10, 40));
  SparseCodingParams p = params(0.01);
  p.max_iter = 1;
  const FeatureSet X(oracle::gaussian(rng, 6, 10));
  ScfvStats stats;
  const FisherVector fv = scfv_pool(X, dict, p, &stats);
  CHECK(stats.unconverged > 0);
  CHECK(stats.unconverged <= 6);
  CHECK(fv.values.allFinite());
  CHECK_THROWS_AS(scfv_encode_one(X.row(0).transpose(), dict, p), ConvergenceError);
}

TEST_CASE("dimension mismatch is rejected") {
  std::mt19937_64 rng(7);
  const Dictionary dict(oracle::random_bases(rng, 6, 4));
  CHECK_THROWS_AS(scfv_pool(FeatureSet(oracle::gaussian(rng, 3, 5)), dict, params(0.1)), DimensionError);
}
