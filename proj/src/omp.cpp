#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "fvkit/sparse_coding.hpp"

namespace fvkit {

SparseCode omp_solve(const Eigen::Ref<const Vector>& x, const Dictionary& dict, std::size_t k_max) {
  const Matrix& B = dict.bases();
  const auto K = B.cols();
  if (static_cast<std::size_t>(x.size()) != dict.dim()) throw DimensionError("omp: feature dimension mismatch");
  if (k_max < 1 || k_max > std::min(dict.dim(), dict.atoms()))
    throw InvalidArgument("omp: k_max must be in [1, min(d, K)]");
  if (!x.allFinite()) throw DataError("omp: non-finite input");

  const Vector norms = B.colwise().norm().transpose();
  const double xnorm = x.norm();
  const double stop = 1e-12 * std::max(1.0, xnorm);

  std::vector<Eigen::Index> support;
  std::vector<bool> chosen(static_cast<std::size_t>(K), false);
  Vector residual = x;
  Vector coef;
  bool rank_deficient = false;

  while (support.size() < k_max && residual.norm() > stop) {
    const Vector corr = B.transpose() * residual;
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (chosen[static_cast<std::size_t>(k)] || norms[k] == 0.0) continue;
      const double score = std::abs(corr[k]) / norms[k];
      if (score > best) {
        best = score;
        pick = k;
      }
    }
    if (pick < 0 || best <= stop) break;
    support.push_back(pick);
    chosen[static_cast<std::size_t>(pick)] = true;

    Matrix sub(B.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s) sub.col(static_cast<Eigen::Index>(s)) = B.col(support[s]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    if (qr.rank() < sub.cols()) {
      rank_deficient = true;
      coef = sub.completeOrthogonalDecomposition().solve(x);
    } else {
      coef = qr.solve(x);
    }
    residual = x - sub * coef;
  }

  Vector u = Vector::Zero(K);
  for (std::size_t s = 0; s < support.size(); ++s) u[support[s]] = coef[static_cast<Eigen::Index>(s)];
  SparseCode code = SparseCode::from(std::move(u));
  code.iterations = support.size();
  code.rank_deficient = rank_deficient;
  return code;
}

}  // namespace fvkit
