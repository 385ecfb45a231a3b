#pragma once

#include <cstddef>

#include "fvkit/pooling.hpp"
#include "fvkit/sparse_coding.hpp"
#include "fvkit/types.hpp"

namespace fvkit {

// Sparse-coding Fisher vector of one feature: the outer product of the
// reconstruction residual and the code, (x - B u*) u*^T, as a d x K matrix.
// Column k is zero exactly when u*_k is zero. The constant -2/sigma2 of the
// true derivative of the minimized objective is not applied.
Matrix scfv_encode_one(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const SparseCodingParams& p);

struct ScfvStats {
  // Features whose lasso solve hit max_iter; their last iterate was used.
  std::size_t unconverged = 0;
};

// Sum over features of the per-feature matrices, vectorized column by column
// (sub-vector k is column k). No normalization.
FisherVector scfv_pool(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p,
                       ScfvStats* stats = nullptr);

// Reuses a solver (and its Gram matrix) across images.
FisherVector scfv_pool(const FeatureSet& features, const LassoSolver& solver, ScfvStats* stats = nullptr);

FisherVector scfv_encode_image(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p,
                               const NormalizationSpec& norm, ScfvStats* stats = nullptr);

}  // namespace fvkit
