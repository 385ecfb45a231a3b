#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "fvkit/errors.hpp"
#include "fvkit/pooling.hpp"
#include "oracles.hpp"

using namespace fvkit;

TEST_CASE("sum pooling") {
  std::mt19937_64 rng(1);
  const Vector v = oracle::gaussian_vec(rng, 6);
  SUBCASE("single element is the identity") {
    const std::vector<Vector> one{v};
    CHECK(sum_pool(one) == v);
  }
  SUBCASE("v and -v cancel") {
    const std::vector<Vector> two{v, -v};
    CHECK(sum_pool(two).isZero(0.0));
  }
  SUBCASE("order does not matter") {
    std::vector<Vector> many;
    for (int i = 0; i < 9; ++i) many.push_back(oracle::gaussian_vec(rng, 6));
    const Vector a = sum_pool(many);
    std::shuffle(many.begin(), many.end(), rng);
    CHECK((sum_pool(many) - a).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("length mismatch and empty input") {
    const std::vector<Vector> bad{v, Vector::Zero(5)};
    CHECK_THROWS_AS(sum_pool(bad), DimensionError);
    CHECK_THROWS_AS(sum_pool(std::vector<Vector>{}), InvalidArgument);
  }
}

TEST_CASE("power normalization") {
  Vector z(1);
  z << -4.0;
  CHECK(power_normalize(z, 0.5)[0] == doctest::Approx(-2.0));

  std::mt19937_64 rng(2);
  const Vector v = oracle::gaussian_vec(rng, 50);
  CHECK(power_normalize(v, 1.0) == v);
  const Vector p = power_normalize(v, 0.3);
  for (Eigen::Index i = 0; i < v.size(); ++i) CHECK((p[i] > 0) == (v[i] > 0));

  // Monotone in each coordinate.
  Vector sorted = v;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const Vector ps = power_normalize(sorted, 0.5);
  for (Eigen::Index i = 1; i < ps.size(); ++i) CHECK(ps[i] >= ps[i - 1]);

  CHECK_THROWS_AS(power_normalize(v, 0.0), InvalidArgument);
  CHECK_THROWS_AS(power_normalize(v, 1.5), InvalidArgument);
}

TEST_CASE("intra normalization") {
  Vector v(4);
  v << 3, 4, 0, 0;
  const Vector n = intra_normalize(v, 2);
  CHECK(n[0] == doctest::Approx(0.6));
  CHECK(n[1] == doctest::Approx(0.8));
  CHECK(n[2] == 0.0);
  CHECK(n[3] == 0.0);

  std::mt19937_64 rng(3);
  const Vector w = oracle::gaussian_vec(rng, 24);
  const Vector once = intra_normalize(w, 6);
  CHECK((intra_normalize(once, 6) - once).cwiseAbs().maxCoeff() <= 1e-12);
  for (int s = 0; s < 4; ++s) CHECK(std::abs(once.segment(s * 6, 6).norm() - 1.0) <= 1e-12);
  CHECK((intra_normalize(37.5 * w, 6) - once).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(intra_normalize(w, 5), DimensionError);
}

TEST_CASE("normalize applies the configured order") {
  std::mt19937_64 rng(4);
  const Vector v = oracle::gaussian_vec(rng, 12);
  NormalizationSpec spec;
  spec.subvector_len = 4;
  CHECK((normalize(v, spec) - intra_normalize(power_normalize(v, 0.5), 4)).cwiseAbs().maxCoeff() == 0.0);
  spec.order = NormOrder::IntraThenPower;
  CHECK((normalize(v, spec) - power_normalize(intra_normalize(v, 4), 0.5)).cwiseAbs().maxCoeff() == 0.0);
  spec.global_l2 = true;
  CHECK(normalize(v, spec).norm() == doctest::Approx(1.0));
  CHECK(normalize(v, NormalizationSpec::none()) == v);

  NormalizationSpec bad;
  bad.power_alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  NormalizationSpec no_len;
  CHECK_THROWS_AS(normalize(v, no_len), InvalidArgument);
}

TEST_CASE("Fisher vectors are intra-normalized per layout sub-vector") {
  std::mt19937_64 rng(5);
  const FisherLayout layout{EncodingKind::Scfvc, 3, 4, false};
  Vector v = oracle::gaussian_vec(rng, 12);
  v.segment(3, 3).setZero();
  const FisherVector out = normalize(FisherVector(v, layout), NormalizationSpec{});
  CHECK(out.layout == layout);
  for (int s = 0; s < 4; ++s) {
    const double n = out.values.segment(s * 3, 3).norm();
    CHECK((s == 1 ? n == 0.0 : std::abs(n - 1.0) <= 1e-12));
  }
}
