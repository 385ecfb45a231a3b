#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "fvkit/errors.hpp"
#include "fvkit/sparse_coding.hpp"
#include "oracles.hpp"

using namespace fvkit;

namespace {

// Rows are sparse combinations of the columns of B plus Gaussian noise.
FeatureSet sparse_mixtures(const Matrix& B, std::size_t T, int per_row, double noise, std::mt19937_64& rng) {
  const auto d = B.rows(), K = B.cols();
  std::uniform_int_distribution<Eigen::Index> atom(0, K - 1);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  std::normal_distribution<double> n(0.0, noise);
  RowMatrix X(static_cast<Eigen::Index>(T), d);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Vector x = Vector::Zero(d);
    std::vector<Eigen::Index> used;
    while (static_cast<int>(used.size()) < per_row) {
      const auto k = atom(rng);
      if (std::find(used.begin(), used.end(), k) != used.end()) continue;
      used.push_back(k);
      x += (flip(rng) ? -1.0 : 1.0) * mag(rng) * B.col(k);
    }
    for (Eigen::Index j = 0; j < d; ++j) x[j] += n(rng);
    X.row(i) = x.transpose();
  }
  return FeatureSet(X);
}

}  // namespace

TEST_CASE("rank-one data is learned up to sign") {
  std::mt19937_64 rng(1);
  Vector v = oracle::gaussian_vec(rng, 5);
  v.normalize();
  RowMatrix X(40, 5);
  for (int i = 0; i < 40; ++i) X.row(i) = v.transpose();
  SparseCodingParams p;
  p.lambda = 0.1;
  const auto res = dict_learn(FeatureSet(X), 1, p, 10, 3);
  const Vector b = res.dictionary.bases().col(0);
  CHECK(std::abs(b.dot(v)) == doctest::Approx(1.0).epsilon(1e-9));
  // With b = v each code is 1 - lambda/2, so F = lambda^2/4 + lambda (1 - lambda/2).
  const double per_row = 0.01 / 4 + 0.1 * (1 - 0.05);
  CHECK(res.objective_trace.back() == doctest::Approx(40 * per_row).epsilon(1e-9));
}

TEST_CASE("objective trace never increases over 20 outer iterations") {
  std::mt19937_64 rng(2);
  const Matrix truth = oracle::random_bases(rng, 16, 24);
  const FeatureSet X = sparse_mixtures(truth, 400, 3, 0.05, rng);
  for (double lambda : {0.05, 0.2}) {
    SparseCodingParams p;
    p.lambda = lambda;
    const auto res = dict_learn(X, 24, p, 20, 11);
    REQUIRE(res.objective_trace.size() == 20);
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
      CHECK(res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-9 * std::abs(res.objective_trace[t - 1]));
    CHECK(res.unconverged_codes == 0);
  }
}

TEST_CASE("a known 20x10 dictionary is recovered within 10 degrees") {
  std::mt19937_64 rng(3);
  const Matrix truth = oracle::random_bases(rng, 20, 10);
  const FeatureSet X = sparse_mixtures(truth, 2000, 3, 0.01, rng);
  SparseCodingParams p;
  p.lambda = 0.1;
  // Alternating minimization has rotated-subspace local minima, so keep the
  // restart with the lowest training objective. The truth plays no part in
  // the choice.
  std::optional<DictLearnResult> best;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto res = dict_learn(X, 10, p, 100, seed);
    if (!best || res.objective_trace.back() < best->objective_trace.back()) best = std::move(res);
  }
  const Matrix& B = best->dictionary.bases();
  double worst_deg = 0.0;
  for (Eigen::Index k = 0; k < 10; ++k) {
    double cos = 0.0;
    for (Eigen::Index j = 0; j < 10; ++j) cos = std::max(cos, std::abs(truth.col(k).dot(B.col(j))) / B.col(j).norm());
    worst_deg = std::max(worst_deg, std::acos(std::min(1.0, cos)) * 180.0 / M_PI);
  }
  MESSAGE("worst angular error " << worst_deg << " degrees");
  CHECK(worst_deg < 10.0);
}

TEST_CASE("learned dictionaries are valid and deterministic") {
  std::mt19937_64 rng(4);
  const Matrix truth = oracle::random_bases(rng, 12, 8);
  const FeatureSet X = sparse_mixtures(truth, 150, 2, 0.05, rng);
  SparseCodingParams p;
  p.lambda = 0.1;
  const auto a = dict_learn(X, 16, p, 6, 42);
  const auto b = dict_learn(X, 16, p, 6, 42);
  CHECK(a.dictionary == b.dictionary);
  CHECK(a.objective_trace == b.objective_trace);
  const Matrix& B = a.dictionary.bases();
  for (Eigen::Index k = 0; k < B.cols(); ++k) {
    CHECK(B.col(k).norm() <= 1.0 + Dictionary::kNormSlack);
    CHECK(B.col(k).norm() > 0.0);
  }
  CHECK_FALSE(a.undersampled);
}

TEST_CASE("more atoms than features is flagged, and unused atoms are reset") {
  std::mt19937_64 rng(5);
  RowMatrix X = oracle::gaussian(rng, 6, 10);
  SparseCodingParams p;
  p.lambda = 0.5;
  const auto res = dict_learn(FeatureSet(X), 12, p, 4, 1);
  CHECK(res.undersampled);
  CHECK(res.dead_atom_resets > 0);
  for (Eigen::Index k = 0; k < 12; ++k) CHECK(res.dictionary.bases().col(k).norm() > 0.0);
  for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
    CHECK(res.objective_trace[t] <= res.objective_trace[t - 1] + 1e-9 * std::abs(res.objective_trace[t - 1]));
}

TEST_CASE("dict_learn argument checks") {
  std::mt19937_64 rng(6);
  const FeatureSet X(oracle::gaussian(rng, 5, 3));
  CHECK_THROWS_AS(dict_learn(X, 0, SparseCodingParams{}, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(dict_learn(X, 2, SparseCodingParams{}, 0, 1), InvalidArgument);
}
