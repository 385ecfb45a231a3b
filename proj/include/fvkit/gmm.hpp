#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fvkit/pooling.hpp"
#include "fvkit/types.hpp"

namespace fvkit {

struct GmmFitOptions {
  std::size_t max_iter = 100;
  // Stop once the mean log-likelihood improves by less than this.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t kmeans_iters = 5;
};

struct GmmFitResult {
  GmmModel model;
  // Mean per-feature log-likelihood; entry 0 is the initialization.
  std::vector<double> loglik_trace;
  // Iterations (1-based) at which at least one collapsed component was reseeded.
  std::vector<std::size_t> collapse_events;
  bool converged = false;
};

// 1e-6 times the mean per-dimension variance of X (never below 1e-12).
double variance_floor_for(const FeatureSet& features);

// EM for a diagonal-covariance mixture; k-means++ seeding followed by a few
// Lloyd iterations provides the starting point.
GmmFitResult gmm_fit_em(const FeatureSet& features, std::size_t components, const GmmFitOptions& options);

Vector gmm_posteriors(const Eigen::Ref<const Vector>& x, const GmmModel& gmm);

// T x m responsibilities; `loglik` (optional) receives log p(x_i) per row.
RowMatrix gmm_posteriors_batch(const FeatureSet& features, const GmmModel& gmm, Vector* loglik = nullptr);

double gmm_log_likelihood(const FeatureSet& features, const GmmModel& gmm);

// Pooled mean (and variance) gradients before any normalization.
FisherVector gmmfv_pool(const FeatureSet& features, const GmmModel& gmm, bool mean_only = false);

FisherVector gmmfv_encode(const FeatureSet& features, const GmmModel& gmm, const NormalizationSpec& norm,
                          bool mean_only = false);

}  // namespace fvkit
