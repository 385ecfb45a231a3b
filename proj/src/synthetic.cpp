#include "fvkit/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "fvkit/errors.hpp"

namespace fvkit {

namespace {

Matrix random_atoms(std::size_t dim, std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix A(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    for (Eigen::Index j = 0; j < A.rows(); ++j) A(j, k) = normal(rng);
    A.col(k).normalize();
  }
  return A;
}

// Draws `count` distinct atoms; each draw comes from `preferred` with
// probability `bias`, otherwise from the whole pool.
std::vector<std::size_t> draw_atoms(std::size_t pool, const std::vector<std::size_t>& preferred, double bias,
                                    std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any(0, pool - 1);
  std::vector<std::size_t> out;
  while (out.size() < count) {
    std::size_t a;
    if (!preferred.empty() && unif(rng) < bias) {
      std::uniform_int_distribution<std::size_t> pick(0, preferred.size() - 1);
      a = preferred[pick(rng)];
    } else {
      a = any(rng);
    }
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  }
  return out;
}

void fill_feature(Eigen::Ref<Eigen::RowVectorXd> row, const Matrix& atoms, const std::vector<std::size_t>& used,
                  double noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  row.setZero();
  for (std::size_t a : used) {
    const double c = mag(rng) * (flip(rng) ? -1.0 : 1.0);
    row += c * atoms.col(static_cast<Eigen::Index>(a)).transpose();
  }
  for (Eigen::Index j = 0; j < row.size(); ++j) row[j] += noise * normal(rng);
  for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = static_cast<double>(static_cast<float>(row[j]));
}

}  // namespace

void SyntheticSpec::validate() const {
  if (classes < 1 || dim < 1 || latent_atoms < 1 || features_per_image < 1)
    throw InvalidArgument("synthetic: classes, dim, latent atoms and features per image must be positive");
  if (train_per_class + test_per_class < 1) throw InvalidArgument("synthetic: no images requested");
  if (atoms_per_feature < 1 || atoms_per_feature > latent_atoms)
    throw InvalidArgument("synthetic: atoms per feature must be in [1, latent atoms]");
  if (class_atoms > latent_atoms) throw InvalidArgument("synthetic: class atoms exceed latent atoms");
  if (!(class_bias >= 0.0 && class_bias <= 1.0)) throw InvalidArgument("synthetic: class bias must be in [0, 1]");
  if (!(noise >= 0.0)) throw InvalidArgument("synthetic: noise must be >= 0");
}

SyntheticCorpus generate_corpus(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus corpus;
  corpus.atoms = random_atoms(spec.dim, spec.latent_atoms, rng);

  // Disjoint class subsets when they fit, otherwise independent draws.
  std::vector<std::size_t> pool(spec.latent_atoms);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::shuffle(pool.begin(), pool.end(), rng);
  const bool disjoint = spec.classes * spec.class_atoms <= spec.latent_atoms;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    std::vector<std::size_t> subset;
    if (disjoint) {
      subset.assign(pool.begin() + static_cast<std::ptrdiff_t>(c * spec.class_atoms),
                    pool.begin() + static_cast<std::ptrdiff_t>((c + 1) * spec.class_atoms));
    } else {
      std::shuffle(pool.begin(), pool.end(), rng);
      subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.class_atoms));
    }
    std::sort(subset.begin(), subset.end());
    corpus.class_atoms.push_back(std::move(subset));
  }

  const auto n = static_cast<Eigen::Index>(spec.features_per_image);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t j = 0; j < spec.train_per_class + spec.test_per_class; ++j) {
      RowMatrix X(n, static_cast<Eigen::Index>(spec.dim));
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto used =
            draw_atoms(spec.latent_atoms, corpus.class_atoms[c], spec.class_bias, spec.atoms_per_feature, rng);
        fill_feature(X.row(i), corpus.atoms, used, spec.noise, rng);
      }
      corpus.images.push_back({FeatureSet(std::move(X)), static_cast<int>(c), j >= spec.train_per_class});
    }
  }
  return corpus;
}

FeatureSet generate_features(std::size_t count, std::size_t dim, std::size_t latent_atoms,
                             std::size_t atoms_per_feature, double noise, std::uint64_t seed) {
  if (count < 1 || dim < 1 || latent_atoms < 1) throw InvalidArgument("synthetic: sizes must be positive");
  if (atoms_per_feature < 1 || atoms_per_feature > latent_atoms)
    throw InvalidArgument("synthetic: atoms per feature must be in [1, latent atoms]");
  std::mt19937_64 rng(seed);
  const Matrix atoms = random_atoms(dim, latent_atoms, rng);
  RowMatrix X(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto used = draw_atoms(latent_atoms, {}, 0.0, atoms_per_feature, rng);
    fill_feature(X.row(i), atoms, used, noise, rng);
  }
  return FeatureSet(std::move(X));
}

}  // namespace fvkit
