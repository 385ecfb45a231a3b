#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fvkit/types.hpp"

namespace fvkit {

// Desk-scale stand-in for regional CNN descriptors: every local feature is a
// sparse signed combination of latent unit-norm atoms plus i.i.d. Gaussian
// noise. Class identity only changes which atoms an image tends to use.
struct SyntheticSpec {
  std::size_t classes = 5;
  std::size_t train_per_class = 50;
  std::size_t test_per_class = 20;
  std::size_t features_per_image = 64;
  std::size_t dim = 256;
  std::size_t latent_atoms = 100;
  // Atoms combined per feature.
  std::size_t atoms_per_feature = 4;
  // Size of each class's preferred atom subset.
  std::size_t class_atoms = 12;
  // Probability that a feature's atom comes from its class subset rather
  // than from the whole pool.
  double class_bias = 0.5;
  // Standard deviation of the per-entry Gaussian noise.
  double noise = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t images() const { return classes * (train_per_class + test_per_class); }
};

struct SyntheticImage {
  FeatureSet features;
  int label;
  bool test;
};

struct SyntheticCorpus {
  Matrix atoms;  // dim x latent_atoms
  std::vector<std::vector<std::size_t>> class_atoms;
  std::vector<SyntheticImage> images;
};

// Images are ordered class by class, training images first within a class.
// All values are rounded to f32 so that feature files reproduce them exactly.
SyntheticCorpus generate_corpus(const SyntheticSpec& spec);

// Class-free sample of `count` features drawn from `latent_atoms` atoms.
FeatureSet generate_features(std::size_t count, std::size_t dim, std::size_t latent_atoms,
                             std::size_t atoms_per_feature, double noise, std::uint64_t seed);

}  // namespace fvkit
