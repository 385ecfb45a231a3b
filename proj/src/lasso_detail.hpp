#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fvkit/sparse_coding.hpp"

namespace fvkit::detail {

// `grad` is dF/du with F the lasso objective.
double kkt_residual(const Vector& u, const Vector& grad, double lambda);

double objective_from_gram(double xx, const Vector& c, const Matrix& gram, const Vector& u,
                           const SparseCodingParams& p);

inline std::vector<Eigen::Index> support_of(const Vector& u) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index k = 0; k < u.size(); ++k)
    if (u[k] != 0.0) s.push_back(k);
  return s;
}

enum class FaceStep { None, Exact, Reduced };

// Works on the orthant face of `u`, where the halved objective is the
// quadratic 0.5 u'Gu - c'u + thresh * s'u. If the face minimizer keeps the
// signs of `u` it is returned as Exact. Otherwise `out` moves from `u` toward
// the minimizer, or along a null direction of the restricted Gram matrix when
// there is none, and stops where the first coordinate reaches zero (Reduced).
// Along either path the objective does not increase.
inline FaceStep face_step(const Matrix& gram, const Vector& c, const Vector& u, double thresh, Vector& out) {
  const auto support = support_of(u);
  if (support.empty()) return FaceStep::None;
  const auto n = static_cast<Eigen::Index>(support.size());
  Matrix g(n, n);
  Vector rhs(n), us(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto i = support[a];
    us[a] = u[i];
    rhs[a] = c[i] - thresh * (u[i] > 0.0 ? 1.0 : -1.0);
    for (Eigen::Index b = 0; b < n; ++b) g(a, b) = gram(i, support[b]);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  if (eig.info() != Eigen::Success) return FaceStep::None;
  const Vector& ev = eig.eigenvalues();
  const double top = std::max(ev[n - 1], 1e-300);

  Vector dir;
  if (ev[0] > 1e-10 * top) {
    const Vector target = eig.eigenvectors() * ((eig.eigenvectors().transpose() * rhs).array() / ev.array()).matrix();
    if (!target.allFinite()) return FaceStep::None;
    bool consistent = true;
    for (Eigen::Index a = 0; a < n; ++a)
      if (target[a] == 0.0 || (target[a] > 0.0) != (us[a] > 0.0)) consistent = false;
    if (consistent) {
      out = Vector::Zero(u.size());
      for (Eigen::Index a = 0; a < n; ++a) out[support[a]] = target[a];
      return FaceStep::Exact;
    }
    dir = target - us;
  } else {
    // The face is flat along this direction up to the linear term; walk
    // the way that lowers it.
    dir = eig.eigenvectors().col(0);
    if ((g * us - rhs).dot(dir) > 0.0) dir = -dir;
  }

  double step = std::numeric_limits<double>::infinity();
  Eigen::Index hit = -1;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (dir[a] * us[a] < 0.0) {
      const double s = -us[a] / dir[a];
      if (s < step) {
        step = s;
        hit = a;
      }
    }
  }
  if (hit < 0) return FaceStep::None;
  out = Vector::Zero(u.size());
  for (Eigen::Index a = 0; a < n; ++a) {
    const double v = a == hit ? 0.0 : us[a] + step * dir[a];
    // Coordinates that reach zero together, or overshoot by rounding, drop.
    out[support[a]] = (v > 0.0) == (us[a] > 0.0) ? v : 0.0;
  }
  return FaceStep::Reduced;
}

}  // namespace fvkit::detail
