#include "fvkit/scfvc.hpp"

namespace fvkit {

Matrix scfv_encode_one(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const SparseCodingParams& p) {
  const SparseCode code = lasso_solve(x, dict, p);
  const Vector residual = x - dict.bases() * code.u;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dict.dim()), static_cast<Eigen::Index>(dict.atoms()));
  for (Eigen::Index k = 0; k < code.u.size(); ++k)
    if (code.u[k] != 0.0) out.col(k) = residual * code.u[k];
  return out;
}

FisherVector scfv_pool(const FeatureSet& features, const LassoSolver& solver, ScfvStats* stats) {
  const Matrix& B = solver.bases();
  const auto d = B.rows();
  const auto K = B.cols();
  if (static_cast<Eigen::Index>(features.dim()) != d)
    throw DimensionError("scfvc: feature dimension does not match dictionary");

  Vector pooled = Vector::Zero(d * K);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Vector x = features.row(i).transpose();
    auto out = solver.try_solve(x);
    if (!out.converged && stats) ++stats->unconverged;
    const Vector& u = out.code.u;
    const Vector residual = x - B * u;
    for (Eigen::Index k = 0; k < K; ++k)
      if (u[k] != 0.0) pooled.segment(k * d, d) += u[k] * residual;
  }
  return FisherVector(std::move(pooled), FisherLayout{EncodingKind::Scfvc, static_cast<std::size_t>(d),
                                                      static_cast<std::size_t>(K), false});
}

FisherVector scfv_pool(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p,
                       ScfvStats* stats) {
  return scfv_pool(features, LassoSolver(dict, p), stats);
}

FisherVector scfv_encode_image(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p,
                               const NormalizationSpec& norm, ScfvStats* stats) {
  return normalize(scfv_pool(features, dict, p, stats), norm);
}

}  // namespace fvkit
