#pragma once

#include <cstddef>

#include "fvkit/types.hpp"

namespace fvkit {

struct PcaModel {
  Vector mean;         // d
  Matrix projection;   // d x out_dim, orthonormal columns
  Vector eigenvalues;  // out_dim, descending
  bool whiten = false;
  // Number of eigenvalues above 1e-12 times the largest.
  std::size_t effective_rank = 0;

  std::size_t in_dim() const { return static_cast<std::size_t>(projection.rows()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(projection.cols()); }

  friend bool operator==(const PcaModel&, const PcaModel&) = default;
};

// Top eigenvectors of the sample covariance (divisor T). Each eigenvector is
// signed so that its largest-magnitude entry is positive.
PcaModel pca_fit(const FeatureSet& features, std::size_t out_dim, bool whiten = false);

// (x - mean) * projection per row; divided by sqrt(eigenvalue) when whitening.
FeatureSet pca_transform(const FeatureSet& features, const PcaModel& model);

// Maps reduced rows back to the input space (unwhitening if needed).
FeatureSet pca_inverse(const FeatureSet& reduced, const PcaModel& model);

}  // namespace fvkit
