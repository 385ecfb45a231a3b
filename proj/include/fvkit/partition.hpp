#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fvkit/sparse_coding.hpp"
#include "fvkit/types.hpp"

namespace fvkit {

// Average Euclidean distance from each feature to its closest GMM mean.
double partition_resolution_gmm(const FeatureSet& features, const GmmModel& gmm);

// Average Euclidean distance from each feature to its sparse reconstruction
// B u*. Throws ConvergenceError (with the row) if a lasso solve fails.
double partition_resolution_sc(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p);

struct ResolutionConfig {
  // Feature file to use; when empty, a synthetic sample is generated.
  std::string feature_file;
  std::size_t samples = 4000;
  std::size_t latent_atoms = 100;
  std::size_t atoms_per_feature = 4;
  double noise = 0.05;

  // Each dimension is obtained by PCA of the source features.
  std::vector<std::size_t> dims{100, 200, 500, 1000};
  std::size_t fixed_components = 100;
  std::size_t sweep_dim = 500;
  std::vector<std::size_t> component_sweep{100, 200, 500, 1000};
  std::size_t dictionary_atoms = 100;

  // 0 selects default_lambda() of the reduced features.
  double lambda = 0.0;
  std::size_t dict_iters = 10;
  std::size_t gmm_iters = 30;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ResolutionRow {
  std::string model;  // "gmm" or "sc"
  std::size_t param;  // components or atoms
  std::size_t dim;
  double d;

  friend bool operator==(const ResolutionRow&, const ResolutionRow&) = default;
};

// Rows for d against feature dimension at a fixed GMM size, then d against
// GMM size and for the learned dictionary at `sweep_dim`.
std::vector<ResolutionRow> resolution_experiment(const ResolutionConfig& config, std::ostream* log = nullptr);

void write_resolution_csv(const std::vector<ResolutionRow>& rows, std::ostream& out);
std::vector<ResolutionRow> read_resolution_csv(std::istream& in);

}  // namespace fvkit
