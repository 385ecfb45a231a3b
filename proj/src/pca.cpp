#include "fvkit/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fvkit/errors.hpp"

namespace fvkit {

PcaModel pca_fit(const FeatureSet& features, std::size_t out_dim, bool whiten) {
  const RowMatrix& X = features.data();
  if (out_dim == 0 || out_dim > std::min(features.size(), features.dim()))
    throw InvalidArgument("pca: out_dim must be in [1, min(T, d)], got " + std::to_string(out_dim));

  PcaModel model;
  model.mean = X.colwise().mean().transpose();
  const RowMatrix centered = X.rowwise() - model.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(X.rows());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca: eigen-decomposition failed");

  // Eigen returns ascending eigenvalues.
  const auto d = cov.rows();
  const auto k = static_cast<Eigen::Index>(out_dim);
  model.projection.resize(d, k);
  model.eigenvalues.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = eig.eigenvectors().col(d - 1 - j);
    Eigen::Index big;
    v.cwiseAbs().maxCoeff(&big);
    if (v[big] < 0.0) v = -v;
    model.projection.col(j) = v;
    model.eigenvalues[j] = std::max(0.0, eig.eigenvalues()[d - 1 - j]);
  }

  const double top = std::max(0.0, eig.eigenvalues()[d - 1]);
  model.effective_rank = static_cast<std::size_t>((eig.eigenvalues().array() > 1e-12 * top).count());
  if (top == 0.0) model.effective_rank = 0;
  model.whiten = whiten;
  if (whiten && model.effective_rank < out_dim)
    throw NumericalError("pca: cannot whiten, covariance rank " + std::to_string(model.effective_rank) +
                         " < out_dim " + std::to_string(out_dim));
  return model;
}

FeatureSet pca_transform(const FeatureSet& features, const PcaModel& model) {
  if (features.dim() != model.in_dim()) throw DimensionError("pca_transform: dimension mismatch");
  RowMatrix out = (features.data().rowwise() - model.mean.transpose()) * model.projection;
  if (model.whiten) out = out.array().rowwise() / model.eigenvalues.transpose().array().sqrt();
  return FeatureSet(std::move(out));
}

FeatureSet pca_inverse(const FeatureSet& reduced, const PcaModel& model) {
  if (reduced.dim() != model.out_dim()) throw DimensionError("pca_inverse: dimension mismatch");
  RowMatrix z = reduced.data();
  if (model.whiten) z = z.array().rowwise() * model.eigenvalues.transpose().array().sqrt();
  RowMatrix out = z * model.projection.transpose();
  out.rowwise() += model.mean.transpose();
  return FeatureSet(std::move(out));
}

}  // namespace fvkit
